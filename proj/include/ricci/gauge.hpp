#pragma once

// The automorphism group PSL(2,ℂ) of the Riemann sphere acting on conformal
// metrics and Kähler potentials, and the balancing that fixes the gauge.
//
// Sphere points are handled in unit homogeneous coordinates
//   ζ(θ, φ) = (cos(θ/2) e^{iφ}, sin(θ/2)),   z = ζ₁/ζ₂ = cot(θ/2) e^{iφ},
// i.e. stereographic projection from the north pole, so z = 0 is the south
// pole. A map z ↦ (az + b)/(cz + d) acts by ζ ↦ Mζ, and its conformal factor
// against the round metric is |Mζ|^{-2}; no chart is singular.

#include "ricci/geometry.hpp"

#include <Eigen/Core>

#include <array>
#include <complex>

namespace ricci {

/// z ↦ (az + b)/(cz + d) with ad − bc = 1.
class MobiusMap {
 public:
  MobiusMap() : m_(Eigen::Matrix2cd::Identity()) {}
  /// Rescales to determinant one; throws on a singular matrix.
  explicit MobiusMap(const Eigen::Matrix2cd& m);
  MobiusMap(std::complex<double> a, std::complex<double> b, std::complex<double> c,
            std::complex<double> d);

  static MobiusMap identity() { return {}; }
  /// z ↦ s z (s > 0).
  static MobiusMap dilation(double s);
  /// Rigid rotation by `angle` about `axis` (right-handed on the unit sphere).
  static MobiusMap rotation(const Eigen::Vector3d& axis, double angle);
  /// Hermitian boost exp(½ q·σ); |q| is the rapidity.
  static MobiusMap boost(const Eigen::Vector3d& q);
  /// exp of a traceless matrix [[α, β], [γ, −α]].
  static MobiusMap exp_traceless(std::complex<double> alpha, std::complex<double> beta,
                                 std::complex<double> gamma);

  const Eigen::Matrix2cd& matrix() const { return m_; }
  std::complex<double> a() const { return m_(0, 0); }
  std::complex<double> b() const { return m_(0, 1); }
  std::complex<double> c() const { return m_(1, 0); }
  std::complex<double> d() const { return m_(1, 1); }

  MobiusMap inverse() const;
  /// (this ∘ other)(z) = this(other(z)).
  MobiusMap operator*(const MobiusMap& other) const;

  /// Image of a unit vector.
  Eigen::Vector3d apply(const Eigen::Vector3d& x) const;
  Eigen::Matrix3Xd apply(const Eigen::Matrix3Xd& xs) const;
  /// v_h = log of the pullback factor: h*ω_round = e^{v_h} ω_round.
  double log_conformal_factor(const Eigen::Vector3d& x) const;
  std::complex<double> apply(std::complex<double> z) const;

  /// True when the map is a rotation (unitary up to phase).
  bool is_rotation(double tol = 1e-10) const;

  /// Re/Im of a, b, c, d.
  std::array<double, 8> to_array() const;
  static MobiusMap from_array(const std::array<double, 8>& v);

 private:
  Eigen::Matrix2cd m_;
};

/// Sphere point → homogeneous coordinates with |ζ| = 1.
Eigen::Vector2cd homogeneous(const Eigen::Vector3d& x);
/// Homogeneous coordinates → unit vector.
Eigen::Vector3d sphere_point(const Eigen::Vector2cd& zeta);
/// Stereographic coordinate z of a unit vector (north pole ↦ ∞).
std::complex<double> stereographic(const Eigen::Vector3d& x);

struct ResampleReport {
  /// max |samples − synthesis(projection)| / max(1, max |samples|) of the
  /// composed field; large values mean the grid under-resolves the result.
  double tail = 0.0;
  bool under_resolved = false;
};

/// f ∘ h sampled on the grid and projected to the band limit.
Field compose(const Field& f, const MobiusMap& h, ResampleReport* report = nullptr);

/// h*(e^u ω_round) = e^{u∘h + v_h} ω_round.
ConformalMetric pullback_metric(const MobiusMap& h, const ConformalMetric& m,
                                ResampleReport* report = nullptr);

/// h.φ = h.0 + φ∘h, where h.0 is the AM-normalized potential of h*ω.
/// Requires AM(φ) = 0.
KahlerPotential pullback_potential(const MobiusMap& h, const KahlerPotential& p,
                                   ResampleReport* report = nullptr);

/// (1/V) ∫ x dA_ω.
Eigen::Vector3d center_of_mass(const ConformalMetric& m);

struct BalanceOptions {
  double tol = 1e-12;
  int max_iterations = 100;
};

struct Balanced {
  MobiusMap map;
  ConformalMetric metric;  // map* m
  int iterations = 0;
  double center_norm = 0.0;
};

/// Finds h = guess ∘ boost(q) with center_of_mass(h*m) = 0 by damped Newton
/// in q ∈ ℝ³. Throws BalanceDivergence after max_iterations.
Balanced balance(const ConformalMetric& m, const MobiusMap& guess = MobiusMap::identity(),
                 const BalanceOptions& opts = {});

struct Alignment {
  MobiusMap rotation;
  double residual = 0.0;  // ‖u_a − u_b∘R‖₂ over the unit sphere
};

struct AlignOptions {
  /// Angular resolution of the coarse search over SO(3).
  int coarse_axis_steps = 6;
  int coarse_angle_steps = 8;
  /// Band limit used for the coarse search (<= grid band limit).
  int coarse_L = 8;
  double tol = 1e-13;
};

/// Rotation R minimizing ‖u_a − u_b∘R‖₂: coarse search over SO(3) followed by
/// local simplex refinement.
Alignment align_rotation(const ConformalMetric& a, const ConformalMetric& b,
                         const AlignOptions& opts = {});

/// The objective of align_rotation for a given rotation.
double alignment_residual(const Field& ua, const Field& ub, const MobiusMap& R);

}  // namespace ricci
