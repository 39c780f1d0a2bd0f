#pragma once

// Quadrature grids, real spherical-harmonic transforms and elliptic solvers on
// the unit sphere.
//
// Real harmonics are fully normalized (orthonormal on the unit sphere) and
// carry no Condon–Shortley phase:
//   Y_l0  = P̄_l0(cos θ)
//   Y_lm  = √2 P̄_lm(cos θ) cos(mφ),   m > 0
//   Y_l-m = √2 P̄_lm(cos θ) sin(mφ),   m > 0
// Coefficients are stored flat with index l² + l + m.
//
// The Laplacian is div grad, so ΔY_lm = -l(l+1) Y_lm on the unit sphere.

#include "ricci/errors.hpp"

#include <Eigen/Core>

#include <memory>
#include <span>
#include <vector>

namespace ricci {

constexpr int lm_index(int l, int m) { return l * l + l + m; }
constexpr int num_coeffs(int L) { return (L + 1) * (L + 1); }

/// Tolerances shared by all solvers.
struct SolverConfig {
  /// Relative tolerance on the compatibility integral of a Poisson problem,
  /// scaled by ‖rhs‖∞·V.
  double tol_solvability = 1e-10;
  /// Relative residual target of the preconditioned CG iteration.
  double cg_rel_tol = 1e-14;
  /// Absolute floor for the same residual (coefficient 2-norm).
  double cg_abs_tol = 1e-15;
  int max_inner = 200;
};

enum class GridSizing {
  /// n_lat = L+1, n_lon = 2L+1: exact for products of two band-limited fields.
  minimal,
  /// n_lat = ⌈(3L+1)/2⌉, n_lon = 3L+1: projecting the product of two
  /// band-limited fields back to degree L is also exact.
  dealiased,
};

/// Gauss–Legendre × uniform-longitude grid with precomputed transform plans.
/// Immutable; share it through GridPtr.
class SphereGrid {
 public:
  SphereGrid(int L_max, int n_lat, int n_lon);

  int L_max() const { return L_; }
  int n_lat() const { return n_lat_; }
  int n_lon() const { return n_lon_; }
  int size() const { return n_lat_ * n_lon_; }
  int n_coeffs() const { return num_coeffs(L_); }

  /// cos θ at each latitude ring (descending, north to south).
  const Eigen::VectorXd& cos_theta() const { return x_; }
  const Eigen::VectorXd& sin_theta() const { return sin_theta_; }
  const Eigen::VectorXd& theta() const { return theta_; }
  const Eigen::VectorXd& lat_weights() const { return lat_w_; }
  const Eigen::VectorXd& phi() const { return phi_; }
  double dphi() const { return dphi_; }

  /// Quadrature weight of each grid point for ∫ · dA on the unit sphere;
  /// point (ring j, longitude k) has flat index j·n_lon + k.
  const Eigen::VectorXd& weights() const { return area_w_; }
  /// Unit position vectors of the grid points, one column per point.
  const Eigen::Matrix3Xd& positions() const { return positions_; }

  /// Normalized Legendre values for order m: row l-m, column ring j.
  const Eigen::MatrixXd& legendre(int m) const { return plm_[m]; }
  /// cos(mφ_k) (column m) and sin(mφ_k).
  const Eigen::MatrixXd& cos_table() const { return cos_; }
  const Eigen::MatrixXd& sin_table() const { return sin_; }

 private:
  int L_, n_lat_, n_lon_;
  Eigen::VectorXd x_, sin_theta_, theta_, lat_w_, phi_, area_w_;
  double dphi_;
  Eigen::Matrix3Xd positions_;
  std::vector<Eigen::MatrixXd> plm_;
  Eigen::MatrixXd cos_, sin_;
};

using GridPtr = std::shared_ptr<const SphereGrid>;

/// Builds the grid for band limit L_max (L_max >= 4).
GridPtr make_grid(int L_max, GridSizing sizing = GridSizing::minimal);

/// Quadrature projection of grid samples onto harmonics of degree <= L_max.
Eigen::VectorXd analysis(const SphereGrid& grid, const Eigen::VectorXd& values);
/// Grid samples of a coefficient vector.
Eigen::VectorXd synthesis(const SphereGrid& grid, const Eigen::VectorXd& coeffs);

/// Values of a band-limited expansion at arbitrary points of the unit sphere
/// (columns of `points`, not necessarily normalized).
Eigen::VectorXd evaluate_at(int L_max, const Eigen::VectorXd& coeffs,
                            const Eigen::Matrix3Xd& points);

/// A real scalar function on the sphere. Always carries its grid samples;
/// when it is band-limited it also carries its harmonic coefficients and the
/// samples are exactly their synthesis. Immutable value type.
class Field {
 public:
  Field() = default;

  static Field from_values(GridPtr grid, Eigen::VectorXd values);
  static Field from_coeffs(GridPtr grid, Eigen::VectorXd coeffs);
  static Field constant(GridPtr grid, double value);
  static Field zero(GridPtr grid) { return constant(std::move(grid), 0.0); }
  /// amplitude · Y_lm
  static Field harmonic(GridPtr grid, int l, int m, double amplitude = 1.0);

  const SphereGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  bool empty() const { return !grid_; }

  const Eigen::VectorXd& values() const { return values_; }
  bool band_limited() const { return band_limited_; }
  /// Harmonic coefficients; throws if the field is grid-only.
  const Eigen::VectorXd& coeffs() const;
  double coeff(int l, int m) const { return coeffs()(lm_index(l, m)); }

 private:
  Field(GridPtr grid, Eigen::VectorXd values, Eigen::VectorXd coeffs, bool bl)
      : grid_(std::move(grid)),
        values_(std::move(values)),
        coeffs_(std::move(coeffs)),
        band_limited_(bl) {}

  GridPtr grid_;
  Eigen::VectorXd values_;
  Eigen::VectorXd coeffs_;
  bool band_limited_ = false;
};

/// Band-limited projection of f (identity on band-limited fields).
Field analyze(const Field& f);
/// Band-limited field with the given coefficients.
Field synthesize(const GridPtr& grid, const Eigen::VectorXd& coeffs);

Field operator+(const Field& a, const Field& b);
Field operator-(const Field& a, const Field& b);
Field operator-(const Field& a);
Field operator*(double s, const Field& a);
inline Field operator*(const Field& a, double s) { return s * a; }
Field operator+(const Field& a, double s);
inline Field operator+(double s, const Field& a) { return a + s; }
inline Field operator-(const Field& a, double s) { return a + (-s); }
inline Field operator-(double s, const Field& a) { return s + (-a); }
/// Pointwise product (grid-only result).
Field operator*(const Field& a, const Field& b);

Field exp(const Field& f);
Field log(const Field& f);
Field abs(const Field& f);

/// ∫ f dA over the unit sphere.
double integrate(const Field& f);
double max_value(const Field& f);
double min_value(const Field& f);
double sup_norm(const Field& f);

/// Spectral Laplacian on the unit round sphere (projects grid-only input).
Field round_laplacian(const Field& f);

}  // namespace ricci
