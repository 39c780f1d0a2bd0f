#include "oracles.hpp"

#include "ricci/functionals.hpp"
#include "ricci/gauge.hpp"
#include "ricci/iteration.hpp"
#include "ricci/random_fields.hpp"

#include <doctest.h>

using namespace ricci;

namespace {

// Test-side quadratures of the defining integrals, written against grid
// weights directly.
struct Quad {
  const KahlerPotential& p;
  Eigen::ArrayXd dA() const {
    const ConformalMetric& m = p.base_metric();
    return m.grid().weights().array() * m.scale() * m.factor().values().array();
  }
  Eigen::ArrayXd rho() const { return density(p).values().array(); }
  Eigen::ArrayXd psi() const { return p.psi.values().array(); }
  Eigen::ArrayXd f() const { return p.base->ricci_potential.values().array(); }
  double V() const { return p.V(); }

  double am() const { return ((psi() * dA()).sum() + (psi() * rho() * dA()).sum()) / (2 * V()); }
  double ding() const { return -am() - std::log(((f() - psi()).exp() * dA()).sum() / V()); }
  double mabuchi() const {
    const Eigen::ArrayXd r = rho();
    return ((r.log() - f()) * r * dA()).sum() / V() - am() + (psi() * r * dA()).sum() / V() +
           (f() * dA()).sum() / V();
  }
};

ReferencePtr random_base(Rng& rng, const GridPtr& g) {
  return make_reference(ConformalMetric(random_field(rng, g, 1, 4, 0.4), kFourPi));
}

}  // namespace

TEST_CASE("energies vanish at the round metric") {
  auto g = make_grid(16, GridSizing::dealiased);
  const ReferencePtr round = round_reference(g);
  const KahlerPotential zero{Field::zero(g), round};
  CHECK(am(zero) == 0.0);
  CHECK(std::abs(ding(zero)) < 1e-15);
  CHECK(std::abs(mabuchi(zero)) < 1e-15);
  CHECK(std::abs(entropy(zero)) < 1e-15);
  CHECK(std::abs(ding({Field::constant(g, 5.0), round})) < 1e-13);
  CHECK(std::abs(am({Field::constant(g, 2.5), round}) - 2.5) < 1e-13);
}

TEST_CASE("functionals agree with direct quadrature") {
  auto g = make_grid(16, GridSizing::dealiased);
  Rng rng(21);
  for (int t = 0; t < 20; ++t) {
    const ReferencePtr base = t % 2 ? random_base(rng, g) : round_reference(g);
    const KahlerPotential p = random_potential(rng, base, 8, 1.0);
    const Quad q{p};
    CHECK(std::abs(am(p) - q.am()) < 1e-12);
    CHECK(std::abs(ding(p) - q.ding()) < 1e-12);
    CHECK(std::abs(mabuchi(p) - q.mabuchi()) < 1e-12);
    CHECK(std::abs(base->f_mean - (q.f() * q.dA()).sum() / q.V()) < 1e-13);
  }
}

TEST_CASE("translation by constants") {
  auto g = make_grid(16, GridSizing::dealiased);
  Rng rng(22);
  for (int t = 0; t < 20; ++t) {
    const ReferencePtr base = t % 2 ? random_base(rng, g) : round_reference(g);
    const KahlerPotential p = random_potential(rng, base, 8, 1.0);
    const double c = std::uniform_real_distribution<double>(-10, 10)(rng);
    const KahlerPotential q = shifted(p, c);
    CHECK(std::abs(am(q) - am(p) - c) < 1e-12);
    CHECK(std::abs(ding(q) - ding(p)) < 1e-10);
    CHECK(std::abs(mabuchi(q) - mabuchi(p)) < 1e-10);
    CHECK(std::abs(entropy(q) - entropy(p)) < 1e-10);
  }
}

TEST_CASE("Aubin-Mabuchi two-sided estimate") {
  auto g = make_grid(16, GridSizing::dealiased);
  Rng rng(23);
  for (int t = 0; t < 200; ++t) {
    const ReferencePtr base = t % 2 ? random_base(rng, g) : round_reference(g);
    const KahlerPotential u = random_potential(rng, base, 8, 1.0);
    const KahlerPotential v = random_potential(rng, base, 8, 1.0);
    const Field d = u.psi - v.psi;
    const double lower = integrate(d * density(u), base->metric) / base->metric.V();
    const double upper = integrate(d * density(v), base->metric) / base->metric.V();
    const double mid = am(u) - am(v);
    CHECK(lower <= mid + 1e-12);
    CHECK(mid <= upper + 1e-12);
  }
}

TEST_CASE("Ding is resolved at L = 32") {
  auto value = [](int L) {
    auto g = make_grid(L, GridSizing::dealiased);
    return ding({Field::harmonic(g, 2, 0, 0.2), round_reference(g)});
  };
  const double a = value(32), b = value(64);
  CHECK(std::abs(a - b) < 1e-11);
  CHECK(a > 0.0);  // the round metric minimizes D
}

TEST_CASE("entropy") {
  auto g = make_grid(16, GridSizing::dealiased);
  const ReferencePtr round = round_reference(g);
  CHECK(std::abs(entropy({Field::zero(g), round})) < 1e-15);
  // 0.3·Y_33 leaves the cone with ρ = 1 + ½Δψ, so take half of it
  CHECK_THROWS_AS(entropy({Field::harmonic(g, 3, 3, 0.3), round}), PositivityViolation);
  CHECK(entropy({Field::harmonic(g, 3, 3, 0.15), round}) > 1e-4);

  // E − f_mean − D is the relative entropy: two independent evaluation paths
  Rng rng(24);
  for (int t = 0; t < 50; ++t) {
    const ReferencePtr base = t % 2 ? random_base(rng, g) : round;
    const KahlerPotential p = random_potential(rng, base, 8, 1.0);
    const double ent = entropy(p);
    CHECK(ent >= 0.0);
    CHECK(std::abs(mabuchi(p) - base->f_mean - ding(p) - ent) < 1e-10);
  }

  const KahlerPotential bad{Field::harmonic(g, 2, 0, 2.0), round};
  CHECK_THROWS_AS(mabuchi(bad), PositivityViolation);
  CHECK_THROWS_AS(entropy(bad), PositivityViolation);
}

TEST_CASE("Ding-Mabuchi sandwich over 1000 random potentials") {
  auto g = make_grid(16, GridSizing::dealiased);
  Rng rng(25);
  const ReferencePtr round = round_reference(g);
  double worst = 1e300;
  for (int t = 0; t < 1000; ++t) {
    const ReferencePtr base = t % 2 ? random_base(rng, g) : round;
    const KahlerPotential p = random_potential(rng, base, 10, 2.0, 0.05);
    worst = std::min(worst, mabuchi(p) - base->f_mean - ding(p));
  }
  CHECK(worst >= -1e-9);
}

TEST_CASE("Hoelder inequality from Jensen") {
  auto g = make_grid(16, GridSizing::dealiased);
  Rng rng(26);
  std::uniform_real_distribution<double> tau_dist(0.01, 1.0);
  for (int t = 0; t < 200; ++t) {
    const ReferencePtr base = t % 2 ? random_base(rng, g) : round_reference(g);
    const ConformalMetric& m = base->metric;
    const Field& f = base->ricci_potential;
    const Field gg = random_field(rng, g, 0, 8, 2.0);
    const Field hh = random_field(rng, g, 0, 8, 2.0);
    const double tau = t == 0 ? 1.0 : tau_dist(rng);
    auto mean_exp = [&](const Field& e) { return integrate(exp(e), m) / m.V(); };
    const double lhs = std::pow(mean_exp(f - gg), 1 / tau) * std::pow(mean_exp(f - hh), 1 - 1 / tau);
    const double rhs = mean_exp(f - (1 / tau) * gg - (1 - 1 / tau) * hh);
    CHECK(lhs <= rhs * (1 + 1e-10));
  }
}

TEST_CASE("Finsler norm") {
  auto g = make_grid(64, GridSizing::dealiased);
  const ReferencePtr round = round_reference(g);
  const KahlerPotential zero{Field::zero(g), round};
  CHECK(d1_norm(Field::constant(g, 1.0), zero) == doctest::Approx(1.0).epsilon(1e-14));
  // (1/4π) ∫ |Y_10| dA = (1/4π) √(3/4π) · 2π ∫_0^1 x dx · 2
  const double expect = std::sqrt(3 / kFourPi) / 2;
  const Field y10 = Field::harmonic(g, 1, 0);
  CHECK(d1_norm(y10, zero) == doctest::Approx(expect).epsilon(1e-4));
  Rng rng(27);
  const KahlerPotential p = random_potential(rng, round, 6, 1.0);
  const Field xi = random_field(rng, g, 0, 6, 1.0);
  CHECK(std::abs(d1_norm(2.0 * xi, p) - 2 * d1_norm(xi, p)) < 1e-14);
  CHECK(d1_norm(xi, p) >= 0.0);
}

TEST_CASE("d1 comparison functional") {
  auto g = make_grid(16, GridSizing::dealiased);
  const ReferencePtr round = round_reference(g);
  const KahlerPotential zero{Field::zero(g), round};
  CHECK(d1_proxy(zero, zero) == 0.0);
  CHECK(d1_proxy(zero, {Field::constant(g, 0.7), round}) == doctest::Approx(2 * 0.7 * kFourPi).epsilon(1e-13));
  Rng rng(28);
  for (int t = 0; t < 20; ++t) {
    const KahlerPotential a = random_potential(rng, round, 8, 1.0);
    const KahlerPotential b = random_potential(rng, round, 8, 1.0);
    CHECK(std::abs(d1_proxy(a, b) - d1_proxy(b, a)) < 1e-12);
    CHECK(d1_proxy(a, b) > 0.0);
  }
  const ReferencePtr other = round_reference(g);
  CHECK_THROWS_AS(d1_proxy(zero, {Field::zero(g), other}), InvalidArgument);
}

TEST_CASE("energies are invariant under the automorphism group") {
  auto g = make_grid(32, GridSizing::dealiased);
  const ReferencePtr round = round_reference(g);
  Rng rng(29);
  for (int t = 0; t < 10; ++t) {
    KahlerPotential p = random_potential(rng, round, 4, 0.5, 0.4);
    p = shifted(p, -am(p));
    const MobiusMap h = random_mobius(rng, 0.3);
    ResampleReport rep;
    const KahlerPotential q = pullback_potential(h, p, &rep);
    REQUIRE(!rep.under_resolved);
    CHECK(std::abs(mabuchi(q) - mabuchi(p)) < 1e-8);
    CHECK(std::abs(ding(q) - ding(p)) < 1e-8);
  }
}

TEST_CASE("orbit distance") {
  auto g = make_grid(16, GridSizing::dealiased);
  const ReferencePtr round = round_reference(g);
  Rng rng(30);

  KahlerPotential a = random_potential(rng, round, 3, 0.3, 0.5);
  a = shifted(a, -am(a));

  const OrbitDistance self = d1g_proxy(a, a);
  CHECK(self.value < 1e-12);
  CHECK((self.minimizer - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() < 1e-6);

  const MobiusMap R = MobiusMap::rotation(Eigen::Vector3d(1, 2, 0.5).normalized(), 1.1);
  const KahlerPotential ra = pullback_potential(R, a);
  const OrbitDistance rot = d1g_proxy(a, ra);
  CHECK(rot.raw_value > 1e-2);
  CHECK(rot.value < 1e-6);
  CHECK(rot.value <= rot.raw_value);

  const MobiusMap h = MobiusMap::boost(Eigen::Vector3d(0.2, -0.1, 0.15)) *
                      MobiusMap::rotation(Eigen::Vector3d(0, 0, 1), 0.4);
  const KahlerPotential ha = pullback_potential(h, a);
  const OrbitDistance known = d1g_proxy(a, ha);
  CHECK(known.raw_value > 1e-2);
  CHECK(known.value < 1e-6);
}
