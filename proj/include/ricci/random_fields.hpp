#pragma once

// Seeded random inputs for property suites: band-limited fields, admissible
// potentials and Möbius maps.

#include "ricci/gauge.hpp"

#include <random>

namespace ricci {

using Rng = std::mt19937_64;

/// Gaussian coefficients on degrees l_lo..l_hi (variance decaying like
/// 1/(1+l)²), rescaled so that sup |f| = sup_norm on the grid.
Field random_field(Rng& rng, const GridPtr& grid, int l_lo, int l_hi, double sup_norm);

/// Potential of degree <= l_hi over `base` whose density 1 + ½Δψ has minimum
/// at least `min_density` (< 1). The amplitude is drawn uniformly and capped.
KahlerPotential random_potential(Rng& rng, const ReferencePtr& base, int l_hi, double max_sup,
                                 double min_density = 0.2);

/// exp of a random traceless matrix with entries of size <= scale.
MobiusMap random_mobius(Rng& rng, double scale);

}  // namespace ricci
