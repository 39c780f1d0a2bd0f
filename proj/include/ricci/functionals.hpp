#pragma once

// Energy functionals on Kähler potentials of S² (complex dimension one):
// Aubin–Mabuchi, Ding, Mabuchi, relative entropy, the L¹ Finsler norm and
// the mixed distance proxy comparable to d₁.

#include "ricci/geometry.hpp"

#include <string>

namespace ricci {

class MobiusMap;

/// AM(ψ) = (1/2V) [∫ψ dA_ω + ∫ψ dA_{ω_ψ}].
double am(const KahlerPotential& p);

/// (1/V) ∫ e^{f_ω − ψ} dA_ω evaluated in log form: returns log of it.
double log_mean_exp(const Field& exponent, const ConformalMetric& m);

/// D(ψ) = −AM(ψ) − log (1/V) ∫ e^{f_ω − ψ} dA_ω.
double ding(const KahlerPotential& p);

/// E(ψ) = (1/V)∫ log(ρ e^{−f_ω}) ρ dA_ω − AM(ψ) + (1/V)∫ ψ ρ dA_ω + f_mean,
/// with ρ = 1 + ½Δ_ω ψ. Throws PositivityViolation if min ρ < 1e-8.
double mabuchi(const KahlerPotential& p);

/// Ent(e^{f_ω − ψ̃} ω, ω_ψ) with ψ̃ = ψ + const so that ∫ e^{f_ω − ψ̃} dA_ω = V.
double entropy(const KahlerPotential& p);

/// ‖ξ‖_ψ = (1/V) ∫ |ξ| ρ dA_ω.
double d1_norm(const Field& xi, const KahlerPotential& p);

/// I₁(a, b) = ∫ |a − b| dA_{ω_a} + ∫ |a − b| dA_{ω_b}.
double d1_proxy(const KahlerPotential& a, const KahlerPotential& b);

struct OrbitSearchOptions {
  int max_evaluations = 3000;
  double initial_step = 0.05;
  double f_tol = 1e-12;
  double x_tol = 1e-10;
  /// Relative decrease below the starting value that counts as progress.
  double stall_tol = 1e-12;
};

struct OrbitDistance {
  double value = 0.0;
  double start_value = 0.0;
  double raw_value = 0.0;  // d1_proxy(a, b) without any gauge
  Eigen::Matrix2cd minimizer;
  bool stalled = false;
  int evaluations = 0;
};

/// min over g ∈ PSL(2,ℂ) of d1_proxy(a, g.b): local simplex search over the
/// six real Möbius parameters, started from the balanced-and-aligned gauge.
/// Both potentials must be AM-normalized over a round base.
OrbitDistance d1g_proxy(const KahlerPotential& a, const KahlerPotential& b,
                        const OrbitSearchOptions& opts = {});

/// One row of the energy trace.
struct EnergyRecord {
  int k = 0;
  double tau = 1.0;
  double AM = 0.0;
  double Ding = 0.0;
  double Mabuchi = 0.0;
  double entropy = 0.0;
  double f_mean = 0.0;
  double d1_proxy_to_KE = 0.0;
  double sup_u = 0.0;
  double osc_u = 0.0;
};

/// Column names, comma separated, no trailing newline.
std::string energy_csv_header();
/// Values with 17 significant digits, comma separated, no trailing newline.
std::string energy_csv_row(const EnergyRecord& r);

}  // namespace ricci
