#include "ricci/iteration.hpp"

#include "ricci/random_fields.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ricci {

namespace {

constexpr int kMaxHalvings = 10;

void require_canonical_volume(double V, const char* who) {
  if (std::abs(V - kFourPi) > 1e-12 * kFourPi)
    throw InvalidArgument(std::string(who) + ": the iteration runs at V = 4π (got " + std::to_string(V) + ")");
}

// Damped Newton on a band-limited residual map. `solve` returns the full
// Newton update at the current iterate; `admissible` may veto a trial point.
template <class Residual, class Solve, class Admissible>
Field damped_newton(Field x, const Residual& residual, const Solve& solve, const Admissible& admissible,
                    const IterationConfig& cfg, const char* who, StepInfo* info) {
  Field F = residual(x);
  double res = sup_norm(F);
  int it = 0;
  for (; it < cfg.newton_max && res > cfg.newton_tol; ++it) {
    const Field dx = solve(x, F);
    double t = 1.0;
    bool accepted = false;
    for (int h = 0; h <= kMaxHalvings; ++h, t *= 0.5) {
      const Field trial = x + t * dx;
      if (!admissible(trial)) continue;
      const Field Ft = residual(trial);
      const double rt = sup_norm(Ft);
      if (rt < res) {
        x = trial, F = Ft, res = rt;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  if (info) *info = {it, res};
  if (!(res <= cfg.newton_tol))
    throw NewtonDivergence(std::string(who) + ": Newton stopped at residual " + std::to_string(res) + " after " +
                               std::to_string(it) + " iterations",
                           res);
  return x;
}

}  // namespace

void validate(const IterationConfig& cfg) {
  if (!(cfg.tau > 0.0 && cfg.tau <= 1.0))
    throw InvalidArgument("tau must lie in (0, 1] (got " + std::to_string(cfg.tau) + ")");
  if (!(cfg.stop_tol > 0 && cfg.newton_tol > 0 && cfg.monotonicity_tol >= 0))
    throw InvalidArgument("iteration tolerances must be positive");
  if (cfg.max_steps < 1 || cfg.newton_max < 1 || cfg.gauge_every < 1)
    throw InvalidArgument("max_steps, newton_max and gauge_every must be at least 1");
}

ReferencePtr round_reference(const GridPtr& grid) {
  auto ref = std::make_shared<ReferenceForm>();
  ref->metric = round_metric(kFourPi, grid);
  ref->ricci_potential = Field::zero(grid);
  ref->f_mean = 0.0;
  return ref;
}

// ---------------------------------------------------------------------------
// Steps

Field step_tau1(const Field& u_prev, const ConformalMetric& base, const SolverConfig& cfg) {
  require_canonical_volume(base.V(), "step_tau1");
  const Field e_prev = exp(u_prev);
  const double defect = integrate(e_prev, base) - base.V();
  if (std::abs(defect) > cfg.tol_solvability * base.V())
    throw SolvabilityViolation("step_tau1: ∫ e^{u_prev} dA_ω differs from V by " + std::to_string(defect), defect);
  const Field rhs = scalar_curvature(base) - 2.0 * e_prev;
  const Field u = solve_poisson_projected(rhs, base);
  return u - std::log(integrate(exp(u), base) / base.V());
}

Field step_tau(const Field& u_prev, const IterationConfig& cfg, const ConformalMetric& base, StepInfo* info) {
  validate(cfg);
  require_canonical_volume(base.V(), "step_tau");
  if (cfg.tau == 1.0) {
    Field u = step_tau1(u_prev, base, cfg.solver);
    if (info) *info = {1, sup_norm(step_residual(u_prev, u, 1.0, base))};
    return u;
  }
  const double tau = cfg.tau;
  const Field& w = base.u();
  const Field e_prev = exp(analyze(u_prev) + w);
  const ConformalMetric round = round_metric(kFourPi, base.grid_ptr());

  auto residual = [&](const Field& U) {
    return (0.5 * tau) * round_laplacian(U) - analyze((1.0 - tau) * exp(U) - e_prev) - tau;
  };
  auto solve = [&](const Field& U, const Field& F) {
    const Field c = (2.0 * (1.0 - tau) / tau) * exp(U);
    return solve_helmholtz_like(c, (-2.0 / tau) * F, round, cfg.solver);
  };
  const Field U = damped_newton(analyze(u_prev) + w, residual, solve, [](const Field&) { return true; }, cfg,
                                "step_tau", info);
  return analyze(U - w);
}

KahlerPotential step_potential(const KahlerPotential& psi_prev, const IterationConfig& cfg, StepInfo* info,
                               double* prev_shift) {
  validate(cfg);
  const ConformalMetric& m = psi_prev.base_metric();
  require_canonical_volume(m.V(), "step_potential");
  const double tau = cfg.tau;
  const Field& f = psi_prev.base->ricci_potential;
  const Field ew = m.factor();
  const ConformalMetric round = round_metric(kFourPi, m.grid_ptr());

  if (tau == 1.0) {
    const double c = log_mean_exp(f - psi_prev.psi, m);
    if (prev_shift) *prev_shift = c;
    const Field E = exp(m.u() + f - (psi_prev.psi + c));
    Field psi = solve_poisson_projected(2.0 * (E - ew), round);
    psi = psi + log_mean_exp(f - psi, m);
    if (info) {
      const Field G = analyze(ew) + 0.5 * round_laplacian(psi) - analyze(E);
      *info = {1, sup_norm(G)};
    }
    return {psi, psi_prev.base};
  }

  if (prev_shift) *prev_shift = 0.0;
  const double a = 1.0 - 1.0 / tau;  // < 0
  const Field g = m.u() + f - (1.0 / tau) * psi_prev.psi;
  auto exponent = [&](const Field& psi) { return exp(g - a * psi); };
  auto residual = [&](const Field& psi) {
    return analyze(ew) + 0.5 * round_laplacian(psi) - analyze(exponent(psi));
  };
  auto solve = [&](const Field& psi, const Field& G) {
    const Field c = (2.0 * (1.0 / tau - 1.0)) * exponent(psi);
    return solve_helmholtz_like(c, -2.0 * G, round, cfg.solver);
  };
  auto admissible = [&](const Field& psi) { return min_value(density({psi, psi_prev.base})) > 0.0; };

  // Start from ψ_prev with the constant that satisfies the normalization.
  const Field start = psi_prev.psi + log_mean_exp(f - psi_prev.psi, m) / a;
  if (!admissible(start)) throw PositivityViolation("step_potential: previous potential is not admissible", 0.0);
  Field psi;
  try {
    psi = damped_newton(start, residual, solve, admissible, cfg, "step_potential", info);
  } catch (const NewtonDivergence& e) {
    if (info && info->iterations == 0)
      throw PositivityViolation(std::string("step_potential: every damped update left the Kähler cone; ") + e.what(),
                                0.0);
    throw;
  }
  return {psi, psi_prev.base};
}

Field step_residual(const Field& u_prev, const Field& u, double tau, const ConformalMetric& base) {
  const ConformalMetric mk = ConformalMetric::unnormalized(analyze(u) + base.u(), base.V());
  const Field eu = exp(u);
  return (1.0 / tau) * (eu - exp(u_prev)) + 0.5 * scalar_curvature(mk) * eu - eu;
}

Field euler_flow_step(const Field& u_prev, double tau, const ConformalMetric& base) {
  const Field eu = exp(u_prev);
  const Field rate = -0.5 * (scalar_curvature(base) - laplacian(u_prev, base)) + eu;
  const Field next = eu + tau * rate;
  if (!(min_value(next) > 0)) throw PositivityViolation("euler_flow_step: factor became non-positive", min_value(next));
  return analyze(log(next));
}

// ---------------------------------------------------------------------------
// Runs

StepInequality verify_step_inequality(const IterationState& prev, const IterationState& next, double tol) {
  const double tau = next.tau;
  const double rhs = prev.energies.Ding / tau + (1.0 - 1.0 / tau) * next.energies.Ding;
  const double lhs = next.energies.Mabuchi - next.energies.f_mean;
  StepInequality out;
  out.slack = rhs - lhs;
  out.ok = out.slack >= -tol;
  return out;
}

std::string to_string(Termination t) { return t == Termination::converged ? "converged" : "max_steps"; }

namespace {

struct Runner {
  const IterationConfig& cfg;
  ReferencePtr ref;
  KahlerPotential ke;  // the round metric as a potential over ref

  EnergyRecord energies(const IterationState& s) const {
    EnergyRecord r;
    r.k = s.k;
    r.tau = cfg.tau;
    r.AM = am(s.psi);
    r.Ding = ding(s.psi);
    if (cfg.fault_flip_ding_sign) r.Ding = -r.Ding;
    r.Mabuchi = mabuchi(s.psi);
    r.entropy = entropy(s.psi);
    r.f_mean = ref->f_mean;
    r.d1_proxy_to_KE = d1_proxy(psi_from_u(s.balanced, ref, cfg.solver), ke);
    const Field& ub = s.balanced.u();
    r.sup_u = sup_norm(ub);
    r.osc_u = max_value(ub) - min_value(ub);
    return r;
  }

  void gauge(IterationState& s, const MobiusMap& guess, bool rebalance) const {
    if (rebalance) {
      Balanced b = balance(s.metric, guess);
      s.gauge = b.map;
      s.balanced = std::move(b.metric);
    } else {
      s.gauge = guess;
      s.balanced = pullback_metric(guess, s.metric);
    }
  }

  Trajectory operator()(ConformalMetric m0, KahlerPotential p0, const StateObserver& observer) const {
    Trajectory traj;
    traj.min_step_slack = std::numeric_limits<double>::infinity();
    traj.min_sandwich_slack = std::numeric_limits<double>::infinity();
    traj.max_ding_increase = -std::numeric_limits<double>::infinity();

    const Field& w = ref->metric.u();
    const Field& f = ref->ricci_potential;
    const double tau = cfg.tau;

    IterationState s;
    s.k = 0;
    s.tau = tau;
    s.metric = std::move(m0);
    s.psi = p0;
    s.psi_prime = shifted(p0, -am(p0));
    gauge(s, MobiusMap::identity(), true);
    s.energies = energies(s);
    traj.min_sandwich_slack = s.energies.Mabuchi - s.energies.f_mean - s.energies.Ding;
    if (observer) observer(s);
    traj.states.push_back(s);

    for (int k = 1; k <= cfg.max_steps; ++k) {
      const IterationState& prev = traj.states.back();
      IterationState next;
      next.k = k;
      next.tau = tau;
      StepInfo info;

      const bool conformal = cfg.formulation != Formulation::potential;
      const bool potential = cfg.formulation != Formulation::conformal;
      if (conformal) {
        const Field u = step_tau(prev.metric.u() - w, cfg, ref->metric, &info);
        next.metric = ConformalMetric(u + w, kFourPi);
      }
      if (potential) {
        StepInfo pinfo;
        next.psi = step_potential(prev.psi_prime, cfg, &pinfo);
        if (!conformal) {
          next.metric = u_from_psi(next.psi);
          info = pinfo;
        } else {
          const Field form = ref->metric.factor() * density(next.psi);
          next.form_mismatch = sup_norm(next.metric.factor() - form);
        }
      } else {
        const KahlerPotential pp = psi_from_u(next.metric, ref, cfg.solver);
        double c;
        if (tau == 1.0) {
          c = log_mean_exp(f - pp.psi, ref->metric);
        } else {
          const double a = 1.0 - 1.0 / tau;
          c = log_mean_exp(f - (1.0 / tau) * prev.psi_prime.psi - a * pp.psi, ref->metric) / a;
        }
        next.psi = shifted(pp, c);
      }
      next.psi_prime = shifted(next.psi, -am(next.psi));
      next.newton_iterations = info.iterations;
      next.newton_residual = info.residual;

      gauge(next, prev.gauge, k % cfg.gauge_every == 0);
      next.increment = sup_norm(next.balanced.u() - prev.balanced.u());
      next.energies = energies(next);

      const double rise = next.energies.Ding - prev.energies.Ding;
      traj.max_ding_increase = std::max(traj.max_ding_increase, rise);
      if (rise > cfg.monotonicity_tol)
        throw MonotonicityViolation("Ding energy increased by " + std::to_string(rise) + " at step " +
                                        std::to_string(k),
                                    k, rise);
      traj.min_step_slack = std::min(traj.min_step_slack, verify_step_inequality(prev, next).slack);
      traj.min_sandwich_slack =
          std::min(traj.min_sandwich_slack, next.energies.Mabuchi - next.energies.f_mean - next.energies.Ding);
      traj.max_form_mismatch = std::max(traj.max_form_mismatch, next.form_mismatch);

      if (observer) observer(next);
      traj.states.push_back(std::move(next));
      if (traj.states.back().increment < cfg.stop_tol) {
        traj.termination = Termination::converged;
        break;
      }
    }

    const ConformalMetric& last = traj.states.back().metric;
    traj.final_curvature_dev = sup_norm(scalar_curvature(last) - 8.0 * std::numbers::pi / last.V());
    if (traj.states.size() == 1) traj.min_step_slack = 0.0, traj.max_ding_increase = 0.0;
    return traj;
  }
};

}  // namespace

Trajectory run(const ConformalMetric& initial, const IterationConfig& cfg, const StateObserver& observer) {
  validate(cfg);
  require_canonical_volume(initial.V(), "run");
  const ReferencePtr ref = round_reference(initial.grid_ptr());
  const KahlerPotential ke{Field::zero(initial.grid_ptr()), ref};
  const ConformalMetric m0(initial.u(), kFourPi);
  return Runner{cfg, ref, ke}(m0, psi_from_u(m0, ref, cfg.solver), observer);
}

Trajectory run(const KahlerPotential& initial, const IterationConfig& cfg, const StateObserver& observer) {
  validate(cfg);
  require_canonical_volume(initial.V(), "run");
  check_admissible(initial);
  const ReferencePtr& ref = initial.base;
  const KahlerPotential ke = psi_from_u(round_metric(kFourPi, ref->metric.grid_ptr()), ref, cfg.solver);
  return Runner{cfg, ref, ke}(u_from_psi(initial), initial, observer);
}

// ---------------------------------------------------------------------------
// Initial data

Field initial_field(const InitialData& data, const GridPtr& grid) {
  if (data.preset == "round") return Field::zero(grid);
  if (data.preset == "bumpy") {
    Rng rng(data.seed);
    return random_field(rng, grid, 2, std::min(6, grid->L_max()), std::abs(data.eps));
  }
  if (data.preset == "ellipsoid") {
    const Eigen::ArrayXd z = grid->positions().row(2).transpose().array();
    return analyze(Field::from_values(grid, (data.eps * 0.5 * (3.0 * z.square() - 1.0)).matrix()));
  }
  if (data.preset == "coeffs") {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(grid->n_coeffs());
    for (const auto& [l, m, v] : data.coefficients) {
      if (l < 0 || l > grid->L_max() || m < -l || m > l)
        throw InvalidArgument("initial coefficient (" + std::to_string(l) + ", " + std::to_string(m) +
                              ") is outside the band limit");
      c(lm_index(l, m)) += v;
    }
    return Field::from_coeffs(grid, std::move(c));
  }
  throw InvalidArgument("unknown initial-data preset '" + data.preset + "'");
}

}  // namespace ricci
