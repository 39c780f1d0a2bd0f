#pragma once

// Conformal metrics in the fixed Kähler class of S², their curvature and
// Ricci potential, and the dictionary between conformal factors and Kähler
// potentials.
//
// In two dimensions i∂∂̄φ = ½ Δ_ω φ · ω, so a potential ψ over a reference
// form ω has density ω_ψ / ω = 1 + ½ Δ_ω ψ. With this convention the round
// sphere of area 4π satisfies Ric ω = ω and has vanishing Ricci potential.

#include "ricci/elliptic.hpp"
#include "ricci/metric.hpp"

#include <memory>

namespace ricci {

/// u ≡ 0 at total area V. Scalar curvature is 8π/V.
ConformalMetric round_metric(double V, GridPtr grid);

/// R_ω from R_ω e^u = R_round(V) − Δ_round(V) u. Grid-only unless u = 0.
Field scalar_curvature(const ConformalMetric& m);

/// ∫ R_ω dA_ω − 8π.
double gauss_bonnet_defect(const ConformalMetric& m);

/// f_ω with Δ_ω f_ω = R_ω − 8π/V and (1/V) ∫ e^{f_ω} dA_ω = 1.
Field ricci_potential(const ConformalMetric& m, const SolverConfig& cfg = {});

/// A reference Kähler form together with its Ricci potential f_ω and the
/// constant (1/V)∫ f_ω dA_ω; every energy functional is taken against one.
struct ReferenceForm {
  ConformalMetric metric;
  Field ricci_potential;
  double f_mean = 0.0;
};
using ReferencePtr = std::shared_ptr<const ReferenceForm>;

ReferencePtr make_reference(const ConformalMetric& m, const SolverConfig& cfg = {});

/// φ ∈ H_ω: a band-limited potential over a reference form.
struct KahlerPotential {
  Field psi;
  ReferencePtr base;

  const ConformalMetric& base_metric() const { return base->metric; }
  double V() const { return base->metric.V(); }
};

/// ρ = ω_ψ / ω = 1 + ½ Δ_ω ψ (grid-only for a non-round base).
Field density(const KahlerPotential& p);

/// Throws PositivityViolation when min ρ <= floor.
void check_admissible(const KahlerPotential& p, double floor = 0.0);

/// The conformal metric of ω_ψ: e^u = e^{u_base} (1 + ½ Δ_ω ψ).
ConformalMetric u_from_psi(const KahlerPotential& p);

/// AM-normalized potential over `base` whose form is `m`:
/// ½ Δ_ω ψ = e^{u − u_base} − 1, then shifted so that AM(ψ) = 0.
KahlerPotential psi_from_u(const ConformalMetric& m, const ReferencePtr& base,
                           const SolverConfig& cfg = {});

/// ψ + c with the same base.
KahlerPotential shifted(const KahlerPotential& p, double c);

}  // namespace ricci
