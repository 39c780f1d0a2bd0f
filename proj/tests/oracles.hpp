#pragma once

// Reference computations that share no code with the library: harmonics from
// std::sph_legendre, dense transforms, finite differences and collocation
// solves.

#include "ricci/spectral.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

namespace oracle {

// std::sph_legendre carries the Condon–Shortley phase; the library does not.
inline double real_ylm(int l, int m, double theta, double phi) {
  const int am = std::abs(m);
  const double p = (am % 2 ? -1.0 : 1.0) * std::sph_legendre(l, am, theta);
  if (m == 0) return p;
  if (m > 0) return std::sqrt(2.0) * p * std::cos(am * phi);
  return std::sqrt(2.0) * p * std::sin(am * phi);
}

inline double theta_of(const Eigen::Vector3d& x) { return std::acos(std::clamp(x(2) / x.norm(), -1.0, 1.0)); }
inline double phi_of(const Eigen::Vector3d& x) { return std::atan2(x(1), x(0)); }

/// Rows: grid points; columns: flat (l, m) index.
inline Eigen::MatrixXd ylm_matrix(int L, const Eigen::Matrix3Xd& pts) {
  Eigen::MatrixXd Y(pts.cols(), (L + 1) * (L + 1));
  for (Eigen::Index i = 0; i < pts.cols(); ++i) {
    const double th = theta_of(pts.col(i)), ph = phi_of(pts.col(i));
    for (int l = 0; l <= L; ++l)
      for (int m = -l; m <= l; ++m) Y(i, l * l + l + m) = real_ylm(l, m, th, ph);
  }
  return Y;
}

inline double eval(int L, const Eigen::VectorXd& c, double theta, double phi) {
  double s = 0.0;
  for (int l = 0; l <= L; ++l)
    for (int m = -l; m <= l; ++m) s += c(l * l + l + m) * real_ylm(l, m, theta, phi);
  return s;
}

/// Round-sphere Laplacian by central differences in (θ, φ).
template <class F>
double fd_round_laplacian(const F& f, double theta, double phi, double h = 1e-4) {
  const double s = std::sin(theta);
  const double ftt = (f(theta + h, phi) - 2 * f(theta, phi) + f(theta - h, phi)) / (h * h);
  const double ft = (f(theta + h, phi) - f(theta - h, phi)) / (2 * h);
  const double fpp = (f(theta, phi + h) - 2 * f(theta, phi) + f(theta, phi - h)) / (h * h);
  return ftt + std::cos(theta) / s * ft + fpp / (s * s);
}

/// Equal-area-ish scattered points away from the poles.
inline Eigen::Matrix3Xd probe_points(int n) {
  Eigen::Matrix3Xd p(3, n);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = 0.95 * (1.0 - 2.0 * (i + 0.5) / n);
    const double r = std::sqrt(1.0 - z * z);
    p.col(i) << r * std::cos(golden * i), r * std::sin(golden * i), z;
  }
  return p;
}

/// Least-squares collocation of L_op c = rhs at `pts`, where the operator is
/// given as a dense matrix acting on coefficients.
inline Eigen::VectorXd collocation_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& rhs) {
  return A.colPivHouseholderQr().solve(rhs);
}

}  // namespace oracle
