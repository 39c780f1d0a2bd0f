#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <functional>
#include <numeric>
#include <vector>

namespace ricci {

struct SimplexResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int evaluations = 0;
};

/// Derivative-free simplex minimization (Nelder–Mead, standard coefficients)
/// with restarts around the incumbent until a restart no longer improves.
inline SimplexResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                                 Eigen::VectorXd x0, double step, int max_evals,
                                 double f_tol, double x_tol) {
  const int n = static_cast<int>(x0.size());
  SimplexResult best{x0, f(x0), 1};
  int evals = 1;

  for (int restart = 0; restart < 8 && evals < max_evals; ++restart) {
    std::vector<Eigen::VectorXd> pts(n + 1, best.x);
    std::vector<double> vals(n + 1, best.value);
    for (int i = 0; i < n; ++i) {
      pts[i + 1](i) += step;
      vals[i + 1] = f(pts[i + 1]);
      ++evals;
    }
    std::vector<int> order(n + 1);
    while (evals < max_evals) {
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](int a, int b) { return vals[a] < vals[b]; });
      const int lo = order[0], hi = order[n], nh = order[n - 1];
      double diam = 0.0;
      for (int i = 0; i <= n; ++i) diam = std::max(diam, (pts[i] - pts[lo]).cwiseAbs().maxCoeff());
      if (vals[hi] - vals[lo] <= f_tol * (std::abs(vals[lo]) + f_tol) && diam <= x_tol) break;
      if (diam <= x_tol * 1e-3) break;

      Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
      for (int i = 0; i <= n; ++i)
        if (i != hi) centroid += pts[i];
      centroid /= n;

      const Eigen::VectorXd xr = centroid + (centroid - pts[hi]);
      const double fr = f(xr);
      ++evals;
      if (fr < vals[lo]) {
        const Eigen::VectorXd xe = centroid + 2.0 * (centroid - pts[hi]);
        const double fe = f(xe);
        ++evals;
        if (fe < fr) pts[hi] = xe, vals[hi] = fe;
        else pts[hi] = xr, vals[hi] = fr;
      } else if (fr < vals[nh]) {
        pts[hi] = xr, vals[hi] = fr;
      } else {
        const bool outside = fr < vals[hi];
        const Eigen::VectorXd xc = outside ? Eigen::VectorXd(centroid + 0.5 * (xr - centroid))
                                           : Eigen::VectorXd(centroid + 0.5 * (pts[hi] - centroid));
        const double fc = f(xc);
        ++evals;
        if (fc < (outside ? fr : vals[hi])) {
          pts[hi] = xc, vals[hi] = fc;
        } else {
          for (int i = 0; i <= n; ++i) {
            if (i == lo) continue;
            pts[i] = pts[lo] + 0.5 * (pts[i] - pts[lo]);
            vals[i] = f(pts[i]);
            ++evals;
          }
        }
      }
    }
    const int lo = static_cast<int>(std::min_element(vals.begin(), vals.end()) - vals.begin());
    const bool improved = vals[lo] < best.value - f_tol * (std::abs(best.value) + f_tol);
    if (vals[lo] < best.value) best.x = pts[lo], best.value = vals[lo];
    if (!improved && restart > 0) break;
    step = std::max(step * 0.1, 10 * x_tol);
  }
  best.evaluations = evals;
  return best;
}

}  // namespace ricci
