#pragma once

// Laplace–Beltrami operator and elliptic solvers for conformal metrics.
//
// All solves are Galerkin projections weighted by dA_ω: a band-limited f is
// sought with ∫ Y_lm (L f − rhs) dA_ω = 0 for every l <= L_max. Because
// Δ_ω dA_ω = Δ_round dA_round in two dimensions, the Poisson problem
// becomes a diagonal spectral division of the projected, reweighted
// right-hand side, and the Helmholtz-like problem is a symmetric negative
// definite system solved by CG with a round-Laplacian preconditioner.

#include "ricci/metric.hpp"

namespace ricci {

/// Δ_ω f = (4π/V) e^{-u} Δ_round f.
Field laplacian(const Field& f, const ConformalMetric& metric);

/// Mean-zero (w.r.t. dA_ω) solution of Δ_ω f = rhs.
/// Throws SolvabilityViolation when |∫ rhs dA_ω| exceeds
/// tol_solvability · ‖rhs‖∞ · V.
Field solve_poisson(const Field& rhs, const ConformalMetric& metric,
                    const SolverConfig& cfg = {});

/// f − (∫ f dA_ω)/area.
Field mean_free(const Field& f, const ConformalMetric& metric);

/// Mean-zero solution of Δ_ω f = mean_free(rhs), with no compatibility
/// check; for callers that have established compatibility themselves (for
/// instance through an area condition) and only carry round-off in the mean.
Field solve_poisson_projected(const Field& rhs, const ConformalMetric& metric);

/// Solution of (Δ_ω − c) f = rhs for a pointwise positive c.
/// Throws InvalidArgument if min c <= 0 and NonConvergence if CG stalls.
Field solve_helmholtz_like(const Field& c_field, const Field& rhs,
                           const ConformalMetric& metric,
                           const SolverConfig& cfg = {});

}  // namespace ricci
