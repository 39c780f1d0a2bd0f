#include "ricci/spectral.hpp"

#include "ricci/elliptic.hpp"
#include "ricci/legendre.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>

namespace ricci {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void require_same_grid(const Field& a, const Field& b) {
  if (a.empty() || b.empty()) throw InvalidArgument("field has no grid");
  if (a.grid_ptr() != b.grid_ptr() &&
      (a.grid().L_max() != b.grid().L_max() || a.grid().n_lat() != b.grid().n_lat() ||
       a.grid().n_lon() != b.grid().n_lon()))
    throw InvalidArgument("fields live on different grids");
}

}  // namespace

SphereGrid::SphereGrid(int L_max, int n_lat, int n_lon)
    : L_(L_max), n_lat_(n_lat), n_lon_(n_lon) {
  if (L_max < 4) throw InvalidArgument("SphereGrid: L_max must be >= 4");
  if (n_lat < L_max + 1) throw InvalidArgument("SphereGrid: n_lat < L_max + 1");
  if (n_lon < 2 * L_max + 1) throw InvalidArgument("SphereGrid: n_lon < 2 L_max + 1");

  auto [x, w] = gauss_legendre<double>(n_lat);
  x_ = x;
  lat_w_ = w;
  sin_theta_.resize(n_lat);
  theta_.resize(n_lat);
  for (int j = 0; j < n_lat; ++j) {
    sin_theta_(j) = std::sqrt(std::max(0.0, (1.0 - x_(j)) * (1.0 + x_(j))));
    theta_(j) = std::atan2(sin_theta_(j), x_(j));
  }
  dphi_ = 2.0 * std::numbers::pi / n_lon;
  phi_.resize(n_lon);
  for (int k = 0; k < n_lon; ++k) phi_(k) = k * dphi_;

  area_w_.resize(size());
  positions_.resize(3, size());
  for (int j = 0; j < n_lat; ++j)
    for (int k = 0; k < n_lon; ++k) {
      const int i = j * n_lon + k;
      area_w_(i) = lat_w_(j) * dphi_;
      positions_(0, i) = sin_theta_(j) * std::cos(phi_(k));
      positions_(1, i) = sin_theta_(j) * std::sin(phi_(k));
      positions_(2, i) = x_(j);
    }

  plm_.resize(L_ + 1);
  for (int m = 0; m <= L_; ++m) plm_[m].resize(L_ - m + 1, n_lat);
  Eigen::VectorXd buf(tri_size(L_));
  for (int j = 0; j < n_lat; ++j) {
    normalized_legendre(L_, x_(j), sin_theta_(j), buf);
    for (int m = 0; m <= L_; ++m)
      for (int l = m; l <= L_; ++l) plm_[m](l - m, j) = buf(tri_index(l, m));
  }

  cos_.resize(n_lon, L_ + 1);
  sin_.resize(n_lon, L_ + 1);
  for (int k = 0; k < n_lon; ++k)
    for (int m = 0; m <= L_; ++m) {
      cos_(k, m) = std::cos(m * phi_(k));
      sin_(k, m) = std::sin(m * phi_(k));
    }
}

GridPtr make_grid(int L_max, GridSizing sizing) {
  if (L_max < 4) throw InvalidArgument("make_grid: L_max must be >= 4, got " + std::to_string(L_max));
  if (sizing == GridSizing::minimal)
    return std::make_shared<const SphereGrid>(L_max, L_max + 1, 2 * L_max + 1);
  return std::make_shared<const SphereGrid>(L_max, (3 * L_max + 2) / 2, 3 * L_max + 1);
}

Eigen::VectorXd analysis(const SphereGrid& grid, const Eigen::VectorXd& values) {
  const int L = grid.L_max();
  Eigen::Map<const RowMajor> F(values.data(), grid.n_lat(), grid.n_lon());
  Eigen::MatrixXd A = F * grid.cos_table();
  Eigen::MatrixXd B = F * grid.sin_table();
  const Eigen::VectorXd w = grid.lat_weights() * grid.dphi();
  Eigen::VectorXd c = Eigen::VectorXd::Zero(num_coeffs(L));
  for (int m = 0; m <= L; ++m) {
    const double fac = m == 0 ? 1.0 : std::numbers::sqrt2;
    const Eigen::VectorXd ca = fac * (grid.legendre(m) * A.col(m).cwiseProduct(w));
    for (int l = m; l <= L; ++l) c(lm_index(l, m)) = ca(l - m);
    if (m > 0) {
      const Eigen::VectorXd cb = fac * (grid.legendre(m) * B.col(m).cwiseProduct(w));
      for (int l = m; l <= L; ++l) c(lm_index(l, -m)) = cb(l - m);
    }
  }
  return c;
}

Eigen::VectorXd synthesis(const SphereGrid& grid, const Eigen::VectorXd& coeffs) {
  const int L = grid.L_max();
  if (coeffs.size() != num_coeffs(L)) throw InvalidArgument("synthesis: coefficient count mismatch");
  Eigen::MatrixXd A(grid.n_lat(), L + 1), B(grid.n_lat(), L + 1);
  Eigen::VectorXd cm(L + 1);
  for (int m = 0; m <= L; ++m) {
    const double fac = m == 0 ? 1.0 : std::numbers::sqrt2;
    const int len = L - m + 1;
    for (int l = m; l <= L; ++l) cm(l - m) = coeffs(lm_index(l, m));
    A.col(m) = fac * (grid.legendre(m).transpose() * cm.head(len));
    if (m > 0) {
      for (int l = m; l <= L; ++l) cm(l - m) = coeffs(lm_index(l, -m));
      B.col(m) = fac * (grid.legendre(m).transpose() * cm.head(len));
    } else {
      B.col(m).setZero();
    }
  }
  RowMajor F = A * grid.cos_table().transpose() + B * grid.sin_table().transpose();
  return Eigen::Map<const Eigen::VectorXd>(F.data(), F.size());
}

Eigen::VectorXd evaluate_at(int L, const Eigen::VectorXd& coeffs, const Eigen::Matrix3Xd& points) {
  if (coeffs.size() != num_coeffs(L)) throw InvalidArgument("evaluate_at: coefficient count mismatch");
  Eigen::VectorXd out(points.cols());
  Eigen::VectorXd plm(tri_size(L));
  std::vector<double> cm(L + 1), sm(L + 1);
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    const Eigen::Vector3d p = points.col(i);
    const double rho = std::hypot(p(0), p(1));
    const double r = std::hypot(rho, p(2));
    const double x = p(2) / r, s = rho / r;
    normalized_legendre(L, x, s, plm);
    // e^{imφ} by repeated multiplication
    const std::complex<double> e1 = rho > 0 ? std::complex<double>(p(0) / rho, p(1) / rho)
                                            : std::complex<double>(1.0, 0.0);
    std::complex<double> em(1.0, 0.0);
    for (int m = 0; m <= L; ++m) {
      cm[m] = em.real();
      sm[m] = em.imag();
      em *= e1;
    }
    double sum = 0.0;
    for (int l = 0; l <= L; ++l) {
      sum += coeffs(lm_index(l, 0)) * plm(tri_index(l, 0));
      for (int m = 1; m <= l; ++m)
        sum += std::numbers::sqrt2 * plm(tri_index(l, m)) *
               (coeffs(lm_index(l, m)) * cm[m] + coeffs(lm_index(l, -m)) * sm[m]);
    }
    out(i) = sum;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Field

Field Field::from_values(GridPtr grid, Eigen::VectorXd values) {
  if (!grid) throw InvalidArgument("Field: null grid");
  if (values.size() != grid->size()) throw InvalidArgument("Field: value count mismatch");
  return Field(std::move(grid), std::move(values), Eigen::VectorXd(), false);
}

Field Field::from_coeffs(GridPtr grid, Eigen::VectorXd coeffs) {
  if (!grid) throw InvalidArgument("Field: null grid");
  if (coeffs.size() != grid->n_coeffs()) throw InvalidArgument("Field: coefficient count mismatch");
  Eigen::VectorXd values = synthesis(*grid, coeffs);
  return Field(std::move(grid), std::move(values), std::move(coeffs), true);
}

Field Field::constant(GridPtr grid, double value) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(grid->n_coeffs());
  c(0) = value * std::sqrt(4.0 * std::numbers::pi);
  Eigen::VectorXd v = Eigen::VectorXd::Constant(grid->size(), value);
  return Field(std::move(grid), std::move(v), std::move(c), true);
}

Field Field::harmonic(GridPtr grid, int l, int m, double amplitude) {
  if (l < 0 || l > grid->L_max() || std::abs(m) > l) throw InvalidArgument("Field::harmonic: bad (l, m)");
  Eigen::VectorXd c = Eigen::VectorXd::Zero(grid->n_coeffs());
  c(lm_index(l, m)) = amplitude;
  return from_coeffs(std::move(grid), std::move(c));
}

const Eigen::VectorXd& Field::coeffs() const {
  if (!band_limited_) throw InvalidArgument("Field: coefficients requested from a grid-only field");
  return coeffs_;
}

Field analyze(const Field& f) {
  if (f.band_limited()) return f;
  return Field::from_coeffs(f.grid_ptr(), analysis(f.grid(), f.values()));
}

Field synthesize(const GridPtr& grid, const Eigen::VectorXd& coeffs) {
  return Field::from_coeffs(grid, coeffs);
}

Field operator+(const Field& a, const Field& b) {
  require_same_grid(a, b);
  if (a.band_limited() && b.band_limited())
    return Field::from_coeffs(a.grid_ptr(), a.coeffs() + b.coeffs());
  return Field::from_values(a.grid_ptr(), a.values() + b.values());
}

Field operator-(const Field& a, const Field& b) { return a + (-b); }

Field operator-(const Field& a) { return -1.0 * a; }

Field operator*(double s, const Field& a) {
  if (a.band_limited()) return Field::from_coeffs(a.grid_ptr(), s * a.coeffs());
  return Field::from_values(a.grid_ptr(), s * a.values());
}

Field operator+(const Field& a, double s) {
  if (a.band_limited()) {
    Eigen::VectorXd c = a.coeffs();
    c(0) += s * std::sqrt(4.0 * std::numbers::pi);
    return Field::from_coeffs(a.grid_ptr(), std::move(c));
  }
  return Field::from_values(a.grid_ptr(), a.values().array() + s);
}

Field operator*(const Field& a, const Field& b) {
  require_same_grid(a, b);
  return Field::from_values(a.grid_ptr(), a.values().cwiseProduct(b.values()));
}

Field exp(const Field& f) { return Field::from_values(f.grid_ptr(), f.values().array().exp()); }
Field log(const Field& f) { return Field::from_values(f.grid_ptr(), f.values().array().log()); }
Field abs(const Field& f) { return Field::from_values(f.grid_ptr(), f.values().cwiseAbs()); }

double integrate(const Field& f) { return f.grid().weights().dot(f.values()); }
double max_value(const Field& f) { return f.values().maxCoeff(); }
double min_value(const Field& f) { return f.values().minCoeff(); }
double sup_norm(const Field& f) { return f.values().cwiseAbs().maxCoeff(); }

Field round_laplacian(const Field& f) {
  const Field g = analyze(f);
  Eigen::VectorXd c = g.coeffs();
  const int L = g.grid().L_max();
  for (int l = 0; l <= L; ++l)
    for (int m = -l; m <= l; ++m) c(lm_index(l, m)) *= -double(l) * (l + 1);
  return Field::from_coeffs(g.grid_ptr(), std::move(c));
}

// ---------------------------------------------------------------------------
// ConformalMetric

ConformalMetric::ConformalMetric(Field u, double V) {
  if (!(V > 0)) throw InvalidArgument("ConformalMetric: V must be positive");
  const Field ub = analyze(u);
  const double a = integrate(exp(ub));  // in units of the unit sphere
  *this = unnormalized(ub - std::log(a / kFourPi), V);
}

ConformalMetric ConformalMetric::unnormalized(Field u, double V) {
  if (!(V > 0)) throw InvalidArgument("ConformalMetric: V must be positive");
  ConformalMetric m;
  m.u_ = analyze(u);
  m.factor_ = exp(m.u_);
  m.V_ = V;
  return m;
}

double integrate(const Field& f, const ConformalMetric& m) {
  return m.scale() * m.grid().weights().dot(m.factor().values().cwiseProduct(f.values()));
}

double area(const ConformalMetric& m) { return m.scale() * integrate(m.factor()); }

// ---------------------------------------------------------------------------
// Elliptic operators

Field laplacian(const Field& f, const ConformalMetric& metric) {
  const Field lap = round_laplacian(f);
  const double s = 1.0 / metric.scale();
  if (sup_norm(metric.u()) == 0.0) return s * lap;
  return Field::from_values(lap.grid_ptr(),
                            s * lap.values().cwiseQuotient(metric.factor().values()));
}

namespace {

// Coefficients of the dA_ω-weighted projection: ∫ Y_lm g dA_ω.
Eigen::VectorXd weighted_projection(const Field& g, const ConformalMetric& metric) {
  const Eigen::VectorXd wv = metric.scale() * metric.factor().values().cwiseProduct(g.values());
  return analysis(metric.grid(), wv);
}

}  // namespace

Field solve_poisson(const Field& rhs, const ConformalMetric& metric, const SolverConfig& cfg) {
  require_same_grid(rhs, metric.u());
  const GridPtr& grid = metric.grid_ptr();
  const int L = grid->L_max();
  Eigen::VectorXd b = weighted_projection(rhs, metric);
  const double compat = b(0) * std::sqrt(4.0 * std::numbers::pi);  // ∫ rhs dA_ω
  const double bound = cfg.tol_solvability * std::max(sup_norm(rhs), 1e-300) * metric.V();
  if (std::abs(compat) > bound)
    throw SolvabilityViolation("solve_poisson: ∫ rhs dA_ω = " + std::to_string(compat) +
                                   " is not zero",
                               compat);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(num_coeffs(L));
  for (int l = 1; l <= L; ++l)
    for (int m = -l; m <= l; ++m) c(lm_index(l, m)) = -b(lm_index(l, m)) / (double(l) * (l + 1));
  Field f = Field::from_coeffs(grid, std::move(c));
  return f - integrate(f, metric) / area(metric);
}

Field mean_free(const Field& f, const ConformalMetric& metric) {
  return f - integrate(f, metric) / area(metric);
}

Field solve_poisson_projected(const Field& rhs, const ConformalMetric& metric) {
  SolverConfig unchecked;
  unchecked.tol_solvability = std::numeric_limits<double>::infinity();
  return solve_poisson(mean_free(rhs, metric), metric, unchecked);
}

Field solve_helmholtz_like(const Field& c_field, const Field& rhs, const ConformalMetric& metric,
                           const SolverConfig& cfg) {
  require_same_grid(rhs, metric.u());
  require_same_grid(c_field, metric.u());
  if (!(min_value(c_field) > 0)) throw InvalidArgument("solve_helmholtz_like: c must be positive");
  const SphereGrid& grid = metric.grid();
  const int L = grid.L_max();
  const int n = num_coeffs(L);

  // System in coefficient space: (K + M) x = -b with K = diag(l(l+1)),
  // M x = P(s e^u c · synth(x)); symmetric positive definite.
  const Eigen::VectorXd kappa = metric.scale() * metric.factor().values().cwiseProduct(c_field.values());
  const Eigen::VectorXd b = -weighted_projection(rhs, metric);
  Eigen::VectorXd eig(n);
  for (int l = 0; l <= L; ++l)
    for (int m = -l; m <= l; ++m) eig(lm_index(l, m)) = double(l) * (l + 1);
  const double kbar = grid.weights().dot(kappa) / kFourPi;
  const Eigen::VectorXd precond = (eig.array() + kbar).inverse();

  auto apply = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    const Eigen::VectorXd xv = synthesis(grid, x);
    return eig.cwiseProduct(x) + analysis(grid, kappa.cwiseProduct(xv));
  };

  Eigen::VectorXd x = precond.cwiseProduct(b);
  Eigen::VectorXd r = b - apply(x);
  Eigen::VectorXd z = precond.cwiseProduct(r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  const double target = std::max(cfg.cg_rel_tol * b.norm(), cfg.cg_abs_tol);
  int it = 0;
  for (; it < cfg.max_inner && r.norm() > target; ++it) {
    const Eigen::VectorXd Ap = apply(p);
    const double alpha = rz / p.dot(Ap);
    x += alpha * p;
    r -= alpha * Ap;
    z = precond.cwiseProduct(r);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  if (r.norm() > target) {
    // the recursive residual can drift below the true one; check before failing
    const Eigen::VectorXd true_r = b - apply(x);
    if (true_r.norm() > 10 * target)
      throw NonConvergence("solve_helmholtz_like: CG did not converge in " +
                               std::to_string(cfg.max_inner) + " steps",
                           true_r.norm());
  }
  return Field::from_coeffs(metric.grid_ptr(), std::move(x));
}

}  // namespace ricci
