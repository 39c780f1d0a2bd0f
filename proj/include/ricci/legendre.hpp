#pragma once

// Gauss–Legendre quadrature and fully normalized associated Legendre
// functions, templated on the scalar type.

#include <Eigen/Core>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace ricci {

/// Index of (l, m), 0 <= m <= l, in a packed lower triangle.
constexpr int tri_index(int l, int m) { return l * (l + 1) / 2 + m; }
constexpr int tri_size(int L) { return (L + 1) * (L + 2) / 2; }

/// Nodes (descending, i.e. colatitude ascending) and weights of the n-point
/// Gauss–Legendre rule on [-1, 1].
template <typename Scalar>
std::pair<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>,
          Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>
gauss_legendre(int n) {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  if (n < 1) throw std::invalid_argument("gauss_legendre: n < 1");
  const Scalar pi = std::numbers::pi_v<Scalar>;
  const Scalar eps = Eigen::NumTraits<Scalar>::epsilon();
  Vec x(n), w(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    Scalar z = std::cos(pi * (Scalar(i) + Scalar(0.75)) / (Scalar(n) + Scalar(0.5)));
    Scalar dp = 0;
    for (int it = 0; it < 100; ++it) {
      Scalar p0 = 1, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const Scalar p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1);
      const Scalar dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) <= 2 * eps) break;
    }
    // re-evaluate the derivative at the converged node
    Scalar p0 = 1, p1 = z;
    for (int k = 2; k <= n; ++k) {
      const Scalar p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (z * p1 - p0) / (z * z - 1);
    x(i) = z;
    x(n - 1 - i) = -z;
    w(i) = w(n - 1 - i) = 2 / ((1 - z * z) * dp * dp);
  }
  if (n % 2 == 1) x(n / 2) = 0;
  return {x, w};
}

/// Fully normalized associated Legendre functions without the
/// Condon–Shortley phase, scaled so that
///   Y_lm(θ, φ) = P̄_lm(cos θ) · {1, √2 cos mφ, √2 sin |m|φ}
/// is orthonormal on the unit sphere. Output is packed by tri_index.
template <typename Scalar, typename Out>
void normalized_legendre(int L, Scalar x, Scalar sin_theta, Out& out) {
  const Scalar inv_sqrt_4pi = Scalar(1) / std::sqrt(4 * std::numbers::pi_v<Scalar>);
  Scalar pmm = inv_sqrt_4pi;
  for (int m = 0; m <= L; ++m) {
    if (m > 0) pmm *= std::sqrt(Scalar(2 * m + 1) / Scalar(2 * m)) * sin_theta;
    out[tri_index(m, m)] = pmm;
    if (m == L) break;
    Scalar p_lm2 = pmm;
    Scalar p_lm1 = std::sqrt(Scalar(2 * m + 3)) * x * pmm;
    out[tri_index(m + 1, m)] = p_lm1;
    for (int l = m + 2; l <= L; ++l) {
      const Scalar a = std::sqrt(Scalar(4 * l * l - 1) / Scalar(l * l - m * m));
      const Scalar b = std::sqrt(Scalar((l - 1) * (l - 1) - m * m) /
                                 Scalar(4 * (l - 1) * (l - 1) - 1));
      const Scalar p = a * (x * p_lm1 - b * p_lm2);
      out[tri_index(l, m)] = p;
      p_lm2 = p_lm1;
      p_lm1 = p;
    }
  }
}

}  // namespace ricci
