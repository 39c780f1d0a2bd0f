#pragma once

// The time-τ Ricci iteration on S² with μ = 1:
//   ω_k − ω_{k−1} = τ (−Ric ω_k + ω_k),   0 < τ <= 1,
// in the conformal picture (ω_k = e^{u_k} ω) and in the potential picture
//   1 + ½Δ_ω ψ_{k+1} = e^{f_ω − ψ_k/τ − (1−1/τ) ψ_{k+1}}.
//
// All steps run at total area 4π. Writing U = u + w for the log-factor of
// ω_k against the round metric, where ω = e^w ω_round, the conformal step is
//   (τ/2) Δ U − (1−τ) e^U + e^{U_prev} − τ = 0      (round Laplacian),
// which for τ = 1 is the Poisson problem Δ U = 2 − 2 e^{U_prev}.

#include "ricci/functionals.hpp"
#include "ricci/gauge.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace ricci {

enum class Formulation { conformal, potential, both };

struct IterationConfig {
  double tau = 1.0;
  int max_steps = 500;
  /// sup |ũ_{k+1} − ũ_k| on balanced iterates that ends a run.
  double stop_tol = 1e-9;
  double newton_tol = 1e-11;
  int newton_max = 30;
  Formulation formulation = Formulation::conformal;
  int gauge_every = 1;
  /// Allowed increase of the Ding energy between consecutive steps.
  double monotonicity_tol = 1e-9;
  /// Test hook: report −D instead of D (must trip the monotonicity check).
  bool fault_flip_ding_sign = false;
  SolverConfig solver;
};

/// Throws InvalidArgument unless τ ∈ (0, 1] and all tolerances are positive.
void validate(const IterationConfig& cfg);

struct IterationState {
  int k = 0;
  double tau = 1.0;
  ConformalMetric metric;  // ω_k
  /// ψ_k, normalized by (1/V)∫ e^{f − ψ'_{k−1}/τ − (1−1/τ)ψ_k} dA_ω = 1
  /// (for τ = 1: by (1/V)∫ e^{f − ψ_k} dA_ω = 1).
  KahlerPotential psi;
  KahlerPotential psi_prime;  // ψ_k − AM(ψ_k)
  EnergyRecord energies;
  MobiusMap gauge;            // h_k
  ConformalMetric balanced;   // h_k* ω_k
  /// sup |ũ_k − ũ_{k−1}| of the balanced log-factors (0 at k = 0).
  double increment = 0.0;
  /// sup |e^{u_k} − e^w (1 + ½Δψ_k)| when both formulations run.
  double form_mismatch = 0.0;
  int newton_iterations = 0;
  double newton_residual = 0.0;
};

// ---------------------------------------------------------------------------
// Single steps

struct StepInfo {
  int iterations = 0;
  double residual = 0.0;
};

/// τ = 1 in the conformal picture: Δ_ω u = R_ω − 2 e^{u_prev}, then the area
/// normalization ∫ e^u dA_ω = V. Requires V = 4π.
Field step_tau1(const Field& u_prev, const ConformalMetric& base, const SolverConfig& cfg = {});

/// One conformal step for τ ∈ (0, 1] (Newton with half-step damping for
/// τ < 1). Returns u relative to `base`.
Field step_tau(const Field& u_prev, const IterationConfig& cfg, const ConformalMetric& base,
               StepInfo* info = nullptr);

/// One potential step from ψ_prev. The output satisfies the step equation and
/// the normalization (1/V)∫ e^{f − ψ_prev/τ − (1−1/τ)ψ} dA_ω = 1; for τ = 1
/// ψ_prev is first shifted to (1/V)∫ e^{f − ψ_prev} dA_ω = 1 (the constant is
/// returned through `prev_shift`) and the output is normalized the same way.
KahlerPotential step_potential(const KahlerPotential& psi_prev, const IterationConfig& cfg,
                               StepInfo* info = nullptr, double* prev_shift = nullptr);

/// Pointwise residual of the step equation of a conformal step,
/// (e^{u_k} − e^{u_{k−1}})/τ + ½R_{ω_k} e^{u_k} − e^{u_k}, against `base`.
Field step_residual(const Field& u_prev, const Field& u, double tau, const ConformalMetric& base);

/// Explicit Euler step of the flow ∂ω/∂t = −Ric ω + ω, for comparison with
/// step_tau as τ → 0.
Field euler_flow_step(const Field& u_prev, double tau, const ConformalMetric& base);

// ---------------------------------------------------------------------------
// Runs

struct StepInequality {
  bool ok = true;
  /// (1/τ) D_k + (1 − 1/τ) D_{k+1} − (E_{k+1} − f_mean)
  double slack = 0.0;
};

StepInequality verify_step_inequality(const IterationState& prev, const IterationState& next,
                                      double tol = 1e-9);

enum class Termination { converged, max_steps };
std::string to_string(Termination t);

struct Trajectory {
  std::vector<IterationState> states;
  Termination termination = Termination::max_steps;
  double final_curvature_dev = 0.0;  // ‖R − 8π/V‖∞ of the last state
  double min_step_slack = 0.0;
  double min_sandwich_slack = 0.0;   // min over k of E_k − f_mean − D_k
  double max_ding_increase = 0.0;    // max over k of D_{k+1} − D_k
  double max_form_mismatch = 0.0;
};

/// Observer invoked after every accepted state (including k = 0).
using StateObserver = std::function<void(const IterationState&)>;

/// Runs the iteration from a metric at V = 4π (or a potential over the round
/// reference). Throws MonotonicityViolation when D increases by more than
/// cfg.monotonicity_tol; step failures propagate.
Trajectory run(const ConformalMetric& initial, const IterationConfig& cfg,
               const StateObserver& observer = {});
Trajectory run(const KahlerPotential& initial, const IterationConfig& cfg,
               const StateObserver& observer = {});

/// The round reference form at V = 4π on `grid` (Ricci potential 0).
ReferencePtr round_reference(const GridPtr& grid);

// ---------------------------------------------------------------------------
// Initial data

/// Closed-form initial conformal factors:
///   round                 u = 0
///   bumpy(eps, seed)      eps · a random field of degrees 2..6 with sup 1
///   ellipsoid(eps)        u = eps · (3 cos²θ − 1)/2
///   coeffs                explicit (l, m, value) triples
struct InitialData {
  std::string preset = "round";
  double eps = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::tuple<int, int, double>> coefficients;
};

/// The (unnormalized) log-factor of the preset on `grid`.
Field initial_field(const InitialData& data, const GridPtr& grid);

}  // namespace ricci
