#pragma once

#include "ricci/spectral.hpp"

#include <numbers>

namespace ricci {

inline constexpr double kFourPi = 4.0 * std::numbers::pi;

/// The metric e^u · ω_round(V), where ω_round(V) is the round metric of total
/// area V. u is band-limited. Construction re-imposes ∫ e^u dA_round(V) = V
/// by shifting the constant mode of u.
class ConformalMetric {
 public:
  ConformalMetric() = default;
  ConformalMetric(Field u, double V);

  /// Keeps u as given (no area normalization).
  static ConformalMetric unnormalized(Field u, double V);

  const Field& u() const { return u_; }
  double V() const { return V_; }
  /// V / 4π, the area scale relative to the unit sphere.
  double scale() const { return V_ / kFourPi; }
  const GridPtr& grid_ptr() const { return u_.grid_ptr(); }
  const SphereGrid& grid() const { return u_.grid(); }

  /// Pointwise conformal factor e^u.
  const Field& factor() const { return factor_; }

 private:
  Field u_;
  Field factor_;
  double V_ = kFourPi;
};

/// ∫ f dA_ω.
double integrate(const Field& f, const ConformalMetric& m);
/// ∫ dA_ω, evaluated by quadrature.
double area(const ConformalMetric& m);

}  // namespace ricci
