#include "ricci/functionals.hpp"

#include "ricci/gauge.hpp"
#include "ricci/nelder_mead.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

namespace ricci {

namespace {

constexpr double kDensityFloor = 1e-8;

Field checked_density(const KahlerPotential& p, const char* who) {
  const Field rho = density(p);
  const double lo = min_value(rho);
  if (!(lo >= kDensityFloor))
    throw PositivityViolation(std::string(who) + ": density below floor (min = " + std::to_string(lo) + ")", lo);
  return rho;
}

}  // namespace

double am(const KahlerPotential& p) {
  const ConformalMetric& m = p.base_metric();
  const Field rho = density(p);
  return (integrate(p.psi, m) + integrate(p.psi * rho, m)) / (2.0 * m.V());
}

double log_mean_exp(const Field& g, const ConformalMetric& m) {
  const double top = max_value(g);
  if (!std::isfinite(top)) throw InvalidArgument("log_mean_exp: non-finite exponent");
  return top + std::log(integrate(exp(g - top), m) / m.V());
}

double ding(const KahlerPotential& p) {
  return -am(p) - log_mean_exp(p.base->ricci_potential - p.psi, p.base_metric());
}

double mabuchi(const KahlerPotential& p) {
  const ConformalMetric& m = p.base_metric();
  const Field rho = checked_density(p, "mabuchi");
  const Field& f = p.base->ricci_potential;
  const Field log_rho = Field::from_values(rho.grid_ptr(), rho.values().array().max(1e-300).log().matrix());
  const double V = m.V();
  return integrate(rho * (log_rho - f), m) / V - am(p) + integrate(p.psi * rho, m) / V + p.base->f_mean;
}

double entropy(const KahlerPotential& p) {
  const ConformalMetric& m = p.base_metric();
  const Field rho = checked_density(p, "entropy");
  const Field& f = p.base->ricci_potential;
  const double c = log_mean_exp(f - p.psi, m);
  const Field log_rho = Field::from_values(rho.grid_ptr(), rho.values().array().max(1e-300).log().matrix());
  // d(ω_ψ) / d(e^{f − ψ̃} ω) = ρ e^{ψ̃ − f} with ψ̃ = ψ + c
  return integrate(rho * (log_rho - f + p.psi + c), m) / m.V();
}

double d1_norm(const Field& xi, const KahlerPotential& p) {
  return integrate(abs(xi) * density(p), p.base_metric()) / p.V();
}

double d1_proxy(const KahlerPotential& a, const KahlerPotential& b) {
  if (a.base != b.base) throw InvalidArgument("d1_proxy: potentials over different reference forms");
  const Field diff = abs(a.psi - b.psi);
  const ConformalMetric& m = a.base_metric();
  return integrate(diff * density(a), m) + integrate(diff * density(b), m);
}

OrbitDistance d1g_proxy(const KahlerPotential& a, const KahlerPotential& b, const OrbitSearchOptions& opts) {
  OrbitDistance out;
  out.raw_value = d1_proxy(a, b);

  const Balanced ba = balance(u_from_psi(a));
  const Balanced bb = balance(u_from_psi(b));
  const Alignment R = align_rotation(ba.metric, bb.metric);
  MobiusMap g0 = bb.map * R.rotation * ba.map.inverse();

  auto value_at = [&](const MobiusMap& g) { return d1_proxy(a, pullback_potential(g, b)); };
  double start = value_at(g0);
  if (out.raw_value < start) {
    g0 = MobiusMap::identity();
    start = out.raw_value;
  }
  out.start_value = start;
  out.value = start;
  out.minimizer = g0.matrix();
  if (start <= opts.f_tol) return out;

  auto map_of = [&](const Eigen::VectorXd& x) {
    return g0 * MobiusMap::exp_traceless({x(0), x(1)}, {x(2), x(3)}, {x(4), x(5)});
  };
  const SimplexResult res = nelder_mead([&](const Eigen::VectorXd& x) { return value_at(map_of(x)); },
                                        Eigen::VectorXd::Zero(6), std::min(opts.initial_step, std::max(start, 1e-8)), opts.max_evaluations,
                                        opts.f_tol, opts.x_tol);
  out.evaluations = res.evaluations;
  if (res.value < start) {
    out.value = res.value;
    out.minimizer = map_of(res.x).matrix();
  }
  out.stalled = start > opts.f_tol && !(out.value < start * (1.0 - opts.stall_tol));
  return out;
}

std::string energy_csv_header() {
  return "k,tau,AM,Ding,Mabuchi,entropy,f_mean,d1_proxy_to_KE,sup_u,osc_u";
}

std::string energy_csv_row(const EnergyRecord& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", r.k, r.tau, r.AM,
                r.Ding, r.Mabuchi, r.entropy, r.f_mean, r.d1_proxy_to_KE, r.sup_u, r.osc_u);
  return buf;
}

}  // namespace ricci
