#include "ricci/geometry.hpp"

#include "ricci/functionals.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace ricci {

ConformalMetric round_metric(double V, GridPtr grid) {
  if (!(V > 0)) throw InvalidArgument("round_metric: V must be positive");
  return ConformalMetric::unnormalized(Field::zero(std::move(grid)), V);
}

Field scalar_curvature(const ConformalMetric& m) {
  const double inv_s = 1.0 / m.scale();
  const Field top = inv_s * (2.0 - round_laplacian(m.u()));
  if (sup_norm(m.u()) == 0.0) return top;
  return Field::from_values(m.grid_ptr(), top.values().cwiseQuotient(m.factor().values()));
}

double gauss_bonnet_defect(const ConformalMetric& m) {
  return integrate(scalar_curvature(m), m) - 8.0 * std::numbers::pi;
}

Field ricci_potential(const ConformalMetric& m, const SolverConfig& cfg) {
  const Field rhs = scalar_curvature(m) - 8.0 * std::numbers::pi / m.V();
  const Field f = solve_poisson(rhs, m, cfg);
  return f - log_mean_exp(f, m);
}

ReferencePtr make_reference(const ConformalMetric& m, const SolverConfig& cfg) {
  auto ref = std::make_shared<ReferenceForm>();
  ref->metric = m;
  ref->ricci_potential = ricci_potential(m, cfg);
  ref->f_mean = integrate(ref->ricci_potential, m) / m.V();
  return ref;
}

Field density(const KahlerPotential& p) {
  return 1.0 + 0.5 * laplacian(p.psi, p.base_metric());
}

void check_admissible(const KahlerPotential& p, double floor) {
  const double lo = min_value(density(p));
  if (!(lo > floor))
    throw PositivityViolation("potential leaves the Kähler cone: min(1 + ½Δψ) = " + std::to_string(lo), lo);
}

ConformalMetric u_from_psi(const KahlerPotential& p) {
  const Field rho = density(p);
  const double lo = min_value(rho);
  if (!(lo > 0)) throw PositivityViolation("u_from_psi: 1 + ½Δψ <= 0 somewhere", lo);
  return ConformalMetric(p.base_metric().u() + log(rho), p.V());
}

KahlerPotential psi_from_u(const ConformalMetric& m, const ReferencePtr& base, const SolverConfig& cfg) {
  const ConformalMetric& b = base->metric;
  if (m.grid_ptr() != b.grid_ptr()) throw InvalidArgument("psi_from_u: metrics on different grids");
  if (std::abs(m.V() - b.V()) > 1e-12 * b.V()) throw InvalidArgument("psi_from_u: volume mismatch");
  const double defect = area(m) - area(b);
  if (std::abs(defect) > cfg.tol_solvability * b.V())
    throw SolvabilityViolation("psi_from_u: areas differ by " + std::to_string(defect), defect);
  const ConformalMetric round = round_metric(kFourPi, m.grid_ptr());
  const Field rhs = (2.0 * b.scale()) * (m.factor() - b.factor());
  const Field psi = solve_poisson_projected(rhs, round);
  KahlerPotential p{psi, base};
  return shifted(p, -am(p));
}

KahlerPotential shifted(const KahlerPotential& p, double c) { return {p.psi + c, p.base}; }

}  // namespace ricci
