#include "ricci/gauge.hpp"

#include "ricci/functionals.hpp"
#include "ricci/nelder_mead.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace ricci {

using cd = std::complex<double>;

MobiusMap::MobiusMap(const Eigen::Matrix2cd& m) {
  const cd det = m.determinant();
  if (std::abs(det) < 1e-300) throw InvalidArgument("MobiusMap: singular matrix");
  // already normalized representatives are kept bit for bit
  const double scale = m.cwiseAbs2().sum();
  m_ = std::abs(det - 1.0) <= 4e-16 * scale ? m : Eigen::Matrix2cd(m / std::sqrt(det));
}

MobiusMap::MobiusMap(cd a, cd b, cd c, cd d) {
  Eigen::Matrix2cd m;
  m << a, b, c, d;
  *this = MobiusMap(m);
}

MobiusMap MobiusMap::dilation(double s) {
  if (!(s > 0)) throw InvalidArgument("MobiusMap::dilation: s must be positive");
  return MobiusMap(cd(std::sqrt(s)), 0.0, 0.0, cd(1.0 / std::sqrt(s)));
}

MobiusMap MobiusMap::exp_traceless(cd alpha, cd beta, cd gamma) {
  Eigen::Matrix2cd X;
  X << alpha, beta, gamma, -alpha;
  const cd s = std::sqrt(alpha * alpha + beta * gamma);
  cd ch, sh_over_s;
  if (std::abs(s) < 1e-6) {
    const cd s2 = s * s;
    ch = 1.0 + s2 / 2.0 + s2 * s2 / 24.0;
    sh_over_s = 1.0 + s2 / 6.0 + s2 * s2 / 120.0;
  } else {
    ch = std::cosh(s);
    sh_over_s = std::sinh(s) / s;
  }
  return MobiusMap(Eigen::Matrix2cd(ch * Eigen::Matrix2cd::Identity() + sh_over_s * X));
}

MobiusMap MobiusMap::rotation(const Eigen::Vector3d& axis, double angle) {
  const double n = axis.norm();
  if (n == 0.0 || angle == 0.0) return identity();
  // The Hopf map used here is x = ζ†σ_x ζ, y = −ζ†σ_y ζ, z = ζ†σ_z ζ, so a
  // rotation by +angle about r is exp(i angle/2 (r_x σ_x − r_y σ_y + r_z σ_z)).
  const Eigen::Vector3d r = axis / n * angle;
  const cd i(0.0, 1.0);
  return exp_traceless(0.5 * i * r(2), 0.5 * i * cd(r(0), r(1)), 0.5 * i * cd(r(0), -r(1)));
}

MobiusMap MobiusMap::boost(const Eigen::Vector3d& q) {
  return exp_traceless(0.5 * q(2), 0.5 * cd(q(0), -q(1)), 0.5 * cd(q(0), q(1)));
}

MobiusMap MobiusMap::inverse() const {
  Eigen::Matrix2cd inv;
  inv << d(), -b(), -c(), a();
  MobiusMap out;
  out.m_ = inv;
  return out;
}

MobiusMap MobiusMap::operator*(const MobiusMap& other) const { return MobiusMap(Eigen::Matrix2cd(m_ * other.m_)); }

Eigen::Vector2cd homogeneous(const Eigen::Vector3d& x) {
  const Eigen::Vector3d p = x.normalized();
  Eigen::Vector2cd zeta;
  if (p(2) >= 0) {
    const double z1 = std::sqrt(0.5 * (1.0 + p(2)));
    zeta << cd(z1), cd(p(0), -p(1)) / (2.0 * z1);
  } else {
    const double z2 = std::sqrt(0.5 * (1.0 - p(2)));
    zeta << cd(p(0), p(1)) / (2.0 * z2), cd(z2);
  }
  return zeta;
}

Eigen::Vector3d sphere_point(const Eigen::Vector2cd& w) {
  const double a = std::norm(w(0)), b = std::norm(w(1));
  const double n = a + b;
  const cd xy = 2.0 * w(0) * std::conj(w(1)) / n;
  return {xy.real(), xy.imag(), (a - b) / n};
}

std::complex<double> stereographic(const Eigen::Vector3d& x) {
  const Eigen::Vector2cd z = homogeneous(x);
  if (std::abs(z(1)) == 0.0) return {std::numeric_limits<double>::infinity(), 0.0};
  return z(0) / z(1);
}

Eigen::Vector3d MobiusMap::apply(const Eigen::Vector3d& x) const { return sphere_point(m_ * homogeneous(x)); }

Eigen::Matrix3Xd MobiusMap::apply(const Eigen::Matrix3Xd& xs) const {
  Eigen::Matrix3Xd out(3, xs.cols());
  for (Eigen::Index i = 0; i < xs.cols(); ++i) out.col(i) = apply(Eigen::Vector3d(xs.col(i)));
  return out;
}

double MobiusMap::log_conformal_factor(const Eigen::Vector3d& x) const {
  return -2.0 * std::log((m_ * homogeneous(x)).squaredNorm());
}

std::complex<double> MobiusMap::apply(cd z) const {
  if (std::isinf(z.real()) || std::isinf(z.imag())) return a() / c();
  return (a() * z + b()) / (c() * z + d());
}

bool MobiusMap::is_rotation(double tol) const {
  return (m_ * m_.adjoint() - Eigen::Matrix2cd::Identity()).norm() < tol;
}

std::array<double, 8> MobiusMap::to_array() const {
  return {a().real(), a().imag(), b().real(), b().imag(), c().real(), c().imag(), d().real(), d().imag()};
}

MobiusMap MobiusMap::from_array(const std::array<double, 8>& v) {
  return MobiusMap(cd(v[0], v[1]), cd(v[2], v[3]), cd(v[4], v[5]), cd(v[6], v[7]));
}

// ---------------------------------------------------------------------------

namespace {

constexpr double kTailWarning = 1e-8;

double tail_of(const Eigen::VectorXd& samples, const Field& projected) {
  const double scale = std::max(1.0, samples.cwiseAbs().maxCoeff());
  return (samples - projected.values()).cwiseAbs().maxCoeff() / scale;
}

void fill_report(ResampleReport* report, const Eigen::VectorXd& samples, const Field& projected) {
  if (!report) return;
  report->tail = tail_of(samples, projected);
  report->under_resolved = report->tail > kTailWarning;
}

}  // namespace

Field compose(const Field& f, const MobiusMap& h, ResampleReport* report) {
  const Field fb = analyze(f);
  const SphereGrid& grid = fb.grid();
  Eigen::VectorXd samples = evaluate_at(grid.L_max(), fb.coeffs(), h.apply(grid.positions()));
  Field out = analyze(Field::from_values(fb.grid_ptr(), samples));
  fill_report(report, samples, out);
  return out;
}

ConformalMetric pullback_metric(const MobiusMap& h, const ConformalMetric& m, ResampleReport* report) {
  const SphereGrid& grid = m.grid();
  const Eigen::Matrix3Xd& x = grid.positions();
  Eigen::VectorXd samples = evaluate_at(grid.L_max(), m.u().coeffs(), h.apply(x));
  for (Eigen::Index i = 0; i < x.cols(); ++i) samples(i) += h.log_conformal_factor(x.col(i));
  Field u = analyze(Field::from_values(m.grid_ptr(), samples));
  fill_report(report, samples, u);
  return ConformalMetric(u, m.V());
}

KahlerPotential pullback_potential(const MobiusMap& h, const KahlerPotential& p, ResampleReport* report) {
  const double am0 = am(p);
  if (std::abs(am0) > 1e-8 * std::max(1.0, sup_norm(p.psi)))
    throw InvalidArgument("pullback_potential: potential is not AM-normalized (AM = " + std::to_string(am0) + ")");
  ResampleReport r1, r2;
  const KahlerPotential h0 = psi_from_u(pullback_metric(h, p.base_metric(), &r1), p.base);
  const Field composed = compose(p.psi, h, &r2);
  if (report) {
    report->tail = std::max(r1.tail, r2.tail);
    report->under_resolved = r1.under_resolved || r2.under_resolved;
  }
  return {h0.psi + composed, p.base};
}

Eigen::Vector3d center_of_mass(const ConformalMetric& m) {
  const SphereGrid& g = m.grid();
  const Eigen::VectorXd w = g.weights().cwiseProduct(m.factor().values());
  return g.positions() * w / w.sum();
}

// ---------------------------------------------------------------------------
// Balancing

namespace {

// Center of mass of (guess ∘ boost(q))* m, evaluated by transporting the
// position function instead of resampling the metric:
//   (1/V) ∫ x d(h*μ) = (1/V) ∫ h^{-1}(y) dμ(y).
struct TransportedCenter {
  Eigen::Matrix3Xd pre;  // guess^{-1}(grid points)
  Eigen::VectorXd w;     // normalized weights of μ

  TransportedCenter(const ConformalMetric& m, const MobiusMap& guess) {
    const SphereGrid& g = m.grid();
    pre = guess.inverse().apply(g.positions());
    w = g.weights().cwiseProduct(m.factor().values());
    w /= w.sum();
  }

  Eigen::Vector3d operator()(const Eigen::Vector3d& q) const {
    const MobiusMap inv = MobiusMap::boost(-q);
    Eigen::Vector3d c = Eigen::Vector3d::Zero();
    for (Eigen::Index i = 0; i < pre.cols(); ++i) c += w(i) * inv.apply(Eigen::Vector3d(pre.col(i)));
    return c;
  }

  Eigen::Matrix3d jacobian(const Eigen::Vector3d& q) const {
    constexpr double h = 1e-6;
    Eigen::Matrix3d J;
    for (int k = 0; k < 3; ++k) {
      Eigen::Vector3d e = Eigen::Vector3d::Zero();
      e(k) = h;
      J.col(k) = ((*this)(q + e) - (*this)(q - e)) / (2 * h);
    }
    return J;
  }
};

}  // namespace

Balanced balance(const ConformalMetric& m, const MobiusMap& guess, const BalanceOptions& opts) {
  const bool is_identity_guess = (guess.matrix() - Eigen::Matrix2cd::Identity()).norm() == 0.0;
  if (is_identity_guess) {
    const double c0 = center_of_mass(m).norm();
    if (c0 < opts.tol) return {MobiusMap::identity(), m, 0, c0};
  }

  const TransportedCenter center(m, guess);
  Eigen::Vector3d q = Eigen::Vector3d::Zero();
  Eigen::Vector3d c = center(q);
  int it = 0;
  for (; it < opts.max_iterations && c.norm() > opts.tol; ++it) {
    const Eigen::Vector3d step = -center.jacobian(q).fullPivLu().solve(c);
    double t = 1.0;
    Eigen::Vector3d qn = q + step, cn = center(qn);
    for (int halve = 0; halve < 40 && !(cn.norm() < c.norm()); ++halve) {
      t *= 0.5;
      qn = q + t * step;
      cn = center(qn);
    }
    if (!(cn.norm() < c.norm())) break;
    q = qn;
    c = cn;
  }
  if (!(c.norm() <= std::max(opts.tol, 1e-10)))
    throw BalanceDivergence("balance: Newton did not converge (|center| = " + std::to_string(c.norm()) + ")",
                            c.norm());

  // The transported center is a quadrature of a non-polynomial integrand;
  // polish against the center of the resampled metric.
  MobiusMap h = guess * MobiusMap::boost(q);
  ConformalMetric pulled = pullback_metric(h, m);
  Eigen::Vector3d cr = center_of_mass(pulled);
  for (int polish = 0; polish < 5 && cr.norm() > opts.tol; ++polish) {
    const Eigen::Vector3d qn = q - center.jacobian(q).fullPivLu().solve(cr);
    const MobiusMap hn = guess * MobiusMap::boost(qn);
    ConformalMetric pn = pullback_metric(hn, m);
    const Eigen::Vector3d crn = center_of_mass(pn);
    if (!(crn.norm() < cr.norm())) break;
    q = qn, h = hn, pulled = std::move(pn), cr = crn;
    ++it;
  }
  return {h, std::move(pulled), it, cr.norm()};
}

// ---------------------------------------------------------------------------
// Rotational alignment

namespace {

MobiusMap rotation_from_vector(const Eigen::Vector3d& r) {
  const double a = r.norm();
  return a == 0.0 ? MobiusMap::identity() : MobiusMap::rotation(r / a, a);
}

double residual_on(const SphereGrid& grid, const Eigen::VectorXd& ua_values, const Eigen::VectorXd& ub_coeffs,
                   const MobiusMap& R) {
  const Eigen::VectorXd ubr = evaluate_at(grid.L_max(), ub_coeffs, R.apply(grid.positions()));
  return std::sqrt(grid.weights().dot((ua_values - ubr).array().square().matrix()));
}

Eigen::VectorXd truncate(const Eigen::VectorXd& c, int L_from, int L_to) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(num_coeffs(L_to));
  for (int l = 0; l <= std::min(L_from, L_to); ++l)
    for (int m = -l; m <= l; ++m) out(lm_index(l, m)) = c(lm_index(l, m));
  return out;
}

}  // namespace

double alignment_residual(const Field& ua, const Field& ub, const MobiusMap& R) {
  const Field a = analyze(ua), b = analyze(ub);
  return residual_on(a.grid(), a.values(), b.coeffs(), R);
}

Alignment align_rotation(const ConformalMetric& a, const ConformalMetric& b, const AlignOptions& opts) {
  const SphereGrid& grid = a.grid();
  const int L = grid.L_max();
  const int Lc = std::max(4, std::min(opts.coarse_L, L));
  const GridPtr coarse = make_grid(Lc);
  const Eigen::VectorXd ua_c = synthesis(*coarse, truncate(a.u().coeffs(), L, Lc));
  const Eigen::VectorXd ub_c = truncate(b.u().coeffs(), L, Lc);

  // Coarse candidates: identity plus rotations by k·π/n_angle about
  // Fibonacci-distributed axes on the upper hemisphere.
  std::vector<std::pair<double, MobiusMap>> candidates;
  candidates.emplace_back(residual_on(*coarse, ua_c, ub_c, MobiusMap::identity()), MobiusMap::identity());
  const int n_axes = opts.coarse_axis_steps * opts.coarse_axis_steps;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n_axes; ++i) {
    const double z = 1.0 - (i + 0.5) / n_axes;  // z in (0, 1)
    const double r = std::sqrt(1.0 - z * z);
    const Eigen::Vector3d axis(r * std::cos(golden * i), r * std::sin(golden * i), z);
    for (int k = 1; k <= opts.coarse_angle_steps; ++k) {
      for (double sign : {1.0, -1.0}) {
        const double angle = sign * std::numbers::pi * k / opts.coarse_angle_steps;
        if (sign < 0 && k == opts.coarse_angle_steps) continue;
        const MobiusMap R = MobiusMap::rotation(axis, angle);
        candidates.emplace_back(residual_on(*coarse, ua_c, ub_c, R), R);
      }
    }
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });

  const Eigen::VectorXd& ua = a.u().values();
  const Eigen::VectorXd& ub = b.u().coeffs();
  Alignment best{candidates.front().second, residual_on(grid, ua, ub, candidates.front().second)};
  const double good_enough = 1e-10 * std::max(1.0, ua.cwiseAbs().maxCoeff());
  if (best.residual <= good_enough) return best;
  const int n_refine = std::min<int>(3, static_cast<int>(candidates.size()));
  for (int c = 0; c < n_refine; ++c) {
    const MobiusMap R0 = candidates[c].second;
    auto objective = [&](const Eigen::VectorXd& r) {
      return residual_on(grid, ua, ub, R0 * rotation_from_vector(Eigen::Vector3d(r))) ;
    };
    const SimplexResult res =
        nelder_mead([&](const Eigen::VectorXd& r) { const double v = objective(r); return v * v; },
                    Eigen::VectorXd::Zero(3), 0.1, 600, opts.tol, 1e-10);
    const MobiusMap R = R0 * rotation_from_vector(Eigen::Vector3d(res.x));
    const double value = residual_on(grid, ua, ub, R);
    if (value < best.residual) best = {R, value};
    if (best.residual <= good_enough) break;
  }
  return best;
}

}  // namespace ricci
