#include "oracles.hpp"

#include "ricci/elliptic.hpp"
#include "ricci/legendre.hpp"
#include "ricci/metric.hpp"

#include <doctest.h>

#include <random>

using namespace ricci;

namespace {

Eigen::VectorXd random_coeffs(std::mt19937_64& rng, int L) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::VectorXd c(num_coeffs(L));
  for (int i = 0; i < c.size(); ++i) c(i) = n(rng);
  return c;
}

double integrate_product(const GridPtr& g, int l1, int m1, int l2, int m2) {
  return integrate(Field::harmonic(g, l1, m1) * Field::harmonic(g, l2, m2));
}

}  // namespace

TEST_CASE("grid sizes and rejection of tiny band limits") {
  CHECK_THROWS_AS(make_grid(3), InvalidArgument);
  auto g = make_grid(4);
  CHECK(g->n_lat() == 5);
  CHECK(g->n_lon() == 9);
  CHECK(g->lat_weights().sum() * 2 * std::numbers::pi == doctest::Approx(kFourPi).epsilon(1e-14));
  CHECK(std::abs(g->weights().sum() - kFourPi) < 1e-12);

  auto d = make_grid(10, GridSizing::dealiased);
  CHECK(d->n_lat() == 16);
  CHECK(d->n_lon() == 31);
}

TEST_CASE("Gauss-Legendre nodes agree with the long double rule") {
  for (int n : {1, 2, 5, 17, 64}) {
    auto [x, w] = gauss_legendre<double>(n);
    auto [xl, wl] = gauss_legendre<long double>(n);
    for (int i = 0; i < n; ++i) {
      CHECK(std::abs(x(i) - double(xl(i))) < 1e-15);
      CHECK(std::abs(w(i) - double(wl(i))) < 1e-15);
    }
    // x^(2n-1) + x^(2n-2) integrates exactly
    double s = 0;
    for (int i = 0; i < n; ++i) s += w(i) * std::pow(x(i), 2 * n - 2);
    CHECK(s == doctest::Approx(2.0 / (2 * n - 1)).epsilon(1e-13));
  }
}

TEST_CASE("normalized Legendre values match std::sph_legendre") {
  const int L = 40;
  Eigen::VectorXd p(tri_size(L));
  for (double theta : {0.01, 0.4, 1.3, 2.9}) {
    normalized_legendre(L, std::cos(theta), std::sin(theta), p);
    for (int l = 0; l <= L; ++l)
      for (int m = 0; m <= l; ++m) {
        const double ref = (m % 2 ? -1.0 : 1.0) * std::sph_legendre(l, m, theta);
        CHECK(std::abs(p(tri_index(l, m)) - ref) < 1e-12);
      }
  }
}

TEST_CASE("quadrature orthonormality") {
  auto g64 = make_grid(64);
  CHECK(std::abs(integrate_product(g64, 3, 2, 3, 2) - 1.0) < 1e-12);
  auto g8 = make_grid(8);
  CHECK(std::abs(integrate_product(g8, 5, 1, 4, 1)) < 1e-12);

  // every pair with l + l' <= 2L on a small grid
  auto g = make_grid(6);
  double worst = 0.0;
  for (int l1 = 0; l1 <= 6; ++l1)
    for (int m1 = -l1; m1 <= l1; ++m1)
      for (int l2 = 0; l2 <= 6; ++l2)
        for (int m2 = -l2; m2 <= l2; ++m2) {
          const double expect = (l1 == l2 && m1 == m2) ? 1.0 : 0.0;
          worst = std::max(worst, std::abs(integrate_product(g, l1, m1, l2, m2) - expect));
        }
  CHECK(worst < 1e-12);
}

TEST_CASE("analysis of sampled harmonics and constants") {
  auto g = make_grid(12);
  const Eigen::Matrix3Xd& x = g->positions();
  Eigen::VectorXd y20(g->size());
  for (int i = 0; i < g->size(); ++i)
    y20(i) = oracle::real_ylm(2, 0, oracle::theta_of(x.col(i)), oracle::phi_of(x.col(i)));
  const Field f = analyze(Field::from_values(g, y20));
  Eigen::VectorXd expect = Eigen::VectorXd::Zero(g->n_coeffs());
  expect(lm_index(2, 0)) = 1.0;
  CHECK((f.coeffs() - expect).cwiseAbs().maxCoeff() < 1e-12);

  const Field one = analyze(Field::from_values(g, Eigen::VectorXd::Ones(g->size())));
  CHECK(std::abs(one.coeff(0, 0) - std::sqrt(kFourPi)) < 1e-12);
  CHECK(one.coeffs().tail(g->n_coeffs() - 1).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("transforms agree with the dense matrix transform") {
  std::mt19937_64 rng(11);
  for (int L : {4, 9, 16}) {
    auto g = make_grid(L);
    const Eigen::MatrixXd Y = oracle::ylm_matrix(L, g->positions());
    const Eigen::VectorXd c = random_coeffs(rng, L);
    const Eigen::VectorXd v = Y * c;
    CHECK((synthesis(*g, c) - v).cwiseAbs().maxCoeff() < 1e-12 * v.cwiseAbs().maxCoeff());
    const Eigen::VectorXd dense_analysis = Y.transpose() * g->weights().asDiagonal() * v;
    CHECK((analysis(*g, v) - dense_analysis).cwiseAbs().maxCoeff() < 1e-12 * c.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("round trip at L = 32") {
  std::mt19937_64 rng(3);
  for (GridSizing s : {GridSizing::minimal, GridSizing::dealiased}) {
    auto g = make_grid(32, s);
    const Eigen::VectorXd c = random_coeffs(rng, 32);
    const Eigen::VectorXd v = synthesis(*g, c);
    const Eigen::VectorXd back = synthesis(*g, analysis(*g, v));
    CHECK((back - v).cwiseAbs().maxCoeff() < 1e-12 * v.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("mean equals the (0,0) coefficient times Y00") {
  std::mt19937_64 rng(5);
  auto g = make_grid(10);
  const Field f = Field::from_coeffs(g, random_coeffs(rng, 10));
  CHECK(std::abs(integrate(f) / kFourPi - f.coeff(0, 0) / std::sqrt(kFourPi)) < 1e-12);
}

TEST_CASE("evaluate_at matches the dense series at scattered points") {
  std::mt19937_64 rng(7);
  const int L = 14;
  const Eigen::VectorXd c = random_coeffs(rng, L);
  Eigen::Matrix3Xd pts = oracle::probe_points(40);
  pts.col(0) << 0, 0, 1;
  pts.col(1) << 0, 0, -1;
  pts.col(2) *= 2.5;  // not normalized
  const Eigen::VectorXd v = evaluate_at(L, c, pts);
  for (int i = 0; i < pts.cols(); ++i) {
    const Eigen::Vector3d p = pts.col(i).normalized();
    CHECK(std::abs(v(i) - oracle::eval(L, c, oracle::theta_of(p), oracle::phi_of(p))) < 1e-11);
  }
}

TEST_CASE("laplacian on eigenfunctions and against finite differences") {
  auto g = make_grid(16, GridSizing::dealiased);
  const ConformalMetric unit = ConformalMetric::unnormalized(Field::zero(g), kFourPi);
  const Field y31 = Field::harmonic(g, 3, 1);
  CHECK(sup_norm(laplacian(y31, unit) + 12.0 * y31) < 1e-12);
  CHECK(sup_norm(laplacian(Field::constant(g, 3.0), unit)) < 1e-12);

  const ConformalMetric half = ConformalMetric::unnormalized(Field::zero(g), 2 * std::numbers::pi);
  CHECK(sup_norm(laplacian(y31, half) + 24.0 * y31) < 1e-11);

  // Δ_ω f = e^{-u} Δ_round f for u = 0.3 Y10
  const ConformalMetric m = ConformalMetric::unnormalized(Field::harmonic(g, 1, 0, 0.3), kFourPi);
  const Field lap = laplacian(Field::harmonic(g, 2, 0), m);
  auto f = [](double th, double ph) { return oracle::real_ylm(2, 0, th, ph); };
  auto u = [](double th, double ph) { return 0.3 * oracle::real_ylm(1, 0, th, ph); };
  const Eigen::Matrix3Xd& x = g->positions();
  double worst = 0;
  for (int i = 0; i < g->size(); i += 7) {
    const double th = oracle::theta_of(x.col(i)), ph = oracle::phi_of(x.col(i));
    const double expect = std::exp(-u(th, ph)) * oracle::fd_round_laplacian(f, th, ph);
    worst = std::max(worst, std::abs(lap.values()(i) - expect));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("Poisson solve") {
  auto g = make_grid(12, GridSizing::dealiased);
  const ConformalMetric unit = ConformalMetric::unnormalized(Field::zero(g), kFourPi);
  const Field f = solve_poisson(Field::harmonic(g, 2, 0), unit);
  CHECK(sup_norm(f + Field::harmonic(g, 2, 0, 1.0 / 6.0)) < 1e-14);
  CHECK(sup_norm(solve_poisson(Field::zero(g), unit)) == 0.0);
  CHECK_THROWS_AS(solve_poisson(Field::constant(g, 1.0), unit), SolvabilityViolation);

  // non-round metric: Galerkin orthogonality and a collocation oracle
  const int L = 20;
  auto gl = make_grid(L, GridSizing::dealiased);
  const ConformalMetric m = ConformalMetric::unnormalized(Field::harmonic(gl, 2, 1, 0.2), kFourPi);
  const Field rhs = Field::harmonic(gl, 1, 0) + Field::harmonic(gl, 3, 2);
  const Field sol = solve_poisson(rhs, m);
  const Eigen::VectorXd weighted = analyze(m.factor() * (laplacian(sol, m) - rhs)).coeffs();
  CHECK(weighted.tail(weighted.size() - 1).cwiseAbs().maxCoeff() < 1e-13);
  CHECK(sup_norm(laplacian(sol, m) - rhs) < 1e-10);
  CHECK(std::abs(integrate(sol, m)) < 1e-12);

  const Eigen::Matrix3Xd pts = oracle::probe_points(900);
  const Eigen::MatrixXd Y = oracle::ylm_matrix(L, pts);
  Eigen::MatrixXd A(pts.cols(), num_coeffs(L) - 1);
  Eigen::VectorXd b(pts.cols());
  for (int i = 0; i < pts.cols(); ++i) {
    const double th = oracle::theta_of(pts.col(i)), ph = oracle::phi_of(pts.col(i));
    const double e = std::exp(0.2 * oracle::real_ylm(2, 1, th, ph));
    for (int l = 1; l <= L; ++l)
      for (int mm = -l; mm <= l; ++mm) A(i, lm_index(l, mm) - 1) = -l * (l + 1.0) * Y(i, lm_index(l, mm)) / e;
    b(i) = oracle::real_ylm(1, 0, th, ph) + oracle::real_ylm(3, 2, th, ph);
  }
  Eigen::VectorXd full(num_coeffs(L));
  full << 0.0, oracle::collocation_solve(A, b);
  Field dense = Field::from_coeffs(gl, full);
  dense = dense - integrate(dense, m) / area(m);
  CHECK(sup_norm(dense - sol) < 1e-10);
}

TEST_CASE("Helmholtz-like solve") {
  auto g = make_grid(12, GridSizing::dealiased);
  const ConformalMetric unit = ConformalMetric::unnormalized(Field::zero(g), kFourPi);
  const Field a = solve_helmholtz_like(Field::constant(g, 6.0), Field::harmonic(g, 2, 0), unit);
  CHECK(sup_norm(a + Field::harmonic(g, 2, 0, 1.0 / 12.0)) < 1e-12);
  const Field b = solve_helmholtz_like(Field::constant(g, 1.0), Field::constant(g, 2.5), unit);
  CHECK(sup_norm(b + 2.5) < 1e-12);
  CHECK_THROWS_AS(solve_helmholtz_like(Field::constant(g, 0.0), Field::constant(g, 1.0), unit), InvalidArgument);

  const int L = 20;
  auto gl = make_grid(L, GridSizing::dealiased);
  const Field y11 = Field::harmonic(gl, 1, 1);
  const Field c = 1.0 + 0.5 * y11 * y11;
  const ConformalMetric m = ConformalMetric::unnormalized(Field::harmonic(gl, 2, -1, 0.2), kFourPi);
  const Field rhs = Field::harmonic(gl, 3, 0) + 0.3;
  const Field sol = solve_helmholtz_like(c, rhs, m);
  const Eigen::VectorXd weighted = analyze(m.factor() * (laplacian(sol, m) - c * sol - rhs)).coeffs();
  CHECK(weighted.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(sup_norm(laplacian(sol, m) - c * sol - rhs) < 1e-10);

  const Eigen::Matrix3Xd pts = oracle::probe_points(900);
  const Eigen::MatrixXd Y = oracle::ylm_matrix(L, pts);
  Eigen::MatrixXd A(pts.cols(), num_coeffs(L));
  Eigen::VectorXd bb(pts.cols());
  for (int i = 0; i < pts.cols(); ++i) {
    const double th = oracle::theta_of(pts.col(i)), ph = oracle::phi_of(pts.col(i));
    const double e = std::exp(0.2 * oracle::real_ylm(2, -1, th, ph));
    const double y = oracle::real_ylm(1, 1, th, ph);
    const double ci = 1.0 + 0.5 * y * y;
    for (int l = 0; l <= L; ++l)
      for (int mm = -l; mm <= l; ++mm)
        A(i, lm_index(l, mm)) = (-l * (l + 1.0) / e - ci) * Y(i, lm_index(l, mm));
    bb(i) = oracle::real_ylm(3, 0, th, ph) + 0.3;
  }
  const Field dense = Field::from_coeffs(gl, oracle::collocation_solve(A, bb));
  CHECK(sup_norm(dense - sol) < 1e-10);
}

TEST_CASE("self-adjointness and negativity of the metric Laplacian") {
  std::mt19937_64 rng(9);
  auto g = make_grid(16, GridSizing::dealiased);
  Eigen::VectorXd cu = 0.05 * random_coeffs(rng, 16);
  for (int l = 5; l <= 16; ++l)
    for (int m = -l; m <= l; ++m) cu(lm_index(l, m)) = 0;
  const ConformalMetric metric(Field::from_coeffs(g, cu), kFourPi);
  for (int trial = 0; trial < 5; ++trial) {
    const Field f = Field::from_coeffs(g, random_coeffs(rng, 16));
    const Field h = Field::from_coeffs(g, random_coeffs(rng, 16));
    const double a = integrate(f * laplacian(h, metric), metric);
    const double b = integrate(h * laplacian(f, metric), metric);
    CHECK(std::abs(a - b) < 1e-10 * std::abs(a));
    const Field f0 = f - integrate(f, metric) / area(metric);
    CHECK(integrate(f0 * laplacian(f0, metric), metric) <= 0.0);
  }
}

TEST_CASE("Poisson error decays spectrally for a smooth non-band-limited solution") {
  // exact solution e^{x} on the unit sphere with a round metric
  auto err_at = [](int L) {
    auto g = make_grid(L, GridSizing::dealiased);
    const ConformalMetric unit = ConformalMetric::unnormalized(Field::zero(g), kFourPi);
    const Eigen::ArrayXd x = g->positions().row(0).transpose().array();
    // Δ e^{x} = (1 - x^2) e^x - 2 x e^x on the unit sphere
    const Eigen::ArrayXd ex = x.exp();
    const Field rhs = Field::from_values(g, ((1 - x * x) * ex - 2 * x * ex).matrix());
    const Field exact = Field::from_values(g, ex.matrix());
    const Field sol = solve_poisson(mean_free(rhs, unit), unit);
    const Field diff = sol - exact;
    return sup_norm(diff - integrate(diff) / kFourPi);
  };
  const double e4 = err_at(4), e8 = err_at(8), e16 = err_at(16);
  CHECK(e8 < e4 / 100);
  CHECK(e16 < 1e-12);
  CHECK(std::log(e4 / e8) < std::log(e8 / std::max(e16, 1e-300)));
}
