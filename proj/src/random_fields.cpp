#include "ricci/random_fields.hpp"

#include <algorithm>

namespace ricci {

Field random_field(Rng& rng, const GridPtr& grid, int l_lo, int l_hi, double sup) {
  const int L = grid->L_max();
  if (l_lo < 0 || l_hi > L || l_lo > l_hi) throw InvalidArgument("random_field: bad degree range");
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(num_coeffs(L));
  for (int l = l_lo; l <= l_hi; ++l)
    for (int m = -l; m <= l; ++m) c(lm_index(l, m)) = normal(rng) / (1.0 + l);
  Field f = Field::from_coeffs(grid, c);
  const double s = sup_norm(f);
  if (s == 0.0) return f;
  return (sup / s) * f;
}

KahlerPotential random_potential(Rng& rng, const ReferencePtr& base, int l_hi, double max_sup,
                                 double min_density) {
  std::uniform_real_distribution<double> amp(0.05, 1.0);
  const Field shape = random_field(rng, base->metric.grid_ptr(), 0, l_hi, 1.0);
  double a = amp(rng) * max_sup;
  const double lo = min_value(0.5 * laplacian(shape, base->metric));
  if (lo < 0) a = std::min(a, (1.0 - min_density) / -lo);
  return {a * shape, base};
}

MobiusMap random_mobius(Rng& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  const std::complex<double> alpha(u(rng), u(rng)), beta(u(rng), u(rng)), gamma(u(rng), u(rng));
  return MobiusMap::exp_traceless(alpha, beta, gamma);
}

}  // namespace ricci
