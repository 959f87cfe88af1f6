#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "wotkit/measures.hpp"

namespace wotkit {

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit Mersenne
/// twister draw. Unlike std::uniform_real_distribution this is identical
/// across standard libraries.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}
inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

/// Equal-weight grid at the quantiles (k - 1/2) / n of N(mean, sd^2).
DiscreteMeasure normal_quantile_grid(std::size_t n, double mean = 0.0, double sd = 1.0);

/// Equal-weight grid at the quantiles (k - 1/2) / n of
/// (N(-1, 1) + N(1, 1)) / 2.
DiscreteMeasure bimodal_quantile_grid(std::size_t n);

/// Random pair (mu, nu) with mu <=cvx nu built from a strictly positive
/// martingale coupling: nu gets random points and weights, mu the row
/// barycenters of a random positive matrix with column sums nu.
std::pair<DiscreteMeasure, DiscreteMeasure> random_martingale_pair(std::size_t nx, std::size_t ny,
                                                                   std::mt19937_64& rng);

/// Random 1D pair with equal means (nu is recentered on mu's mean). Convex
/// order may or may not hold.
std::pair<DiscreteMeasure, DiscreteMeasure> random_equal_mean_pair(std::size_t nx, std::size_t ny,
                                                                   std::mt19937_64& rng);

/// Random 1D measure with `n` points in [lo, hi] and random positive weights.
DiscreteMeasure random_measure_1d(std::size_t n, double lo, double hi, std::mt19937_64& rng);

/// Random coupling of (mu, nu): convex mixture of north-west corner
/// couplings taken in random row and column orders. Marginals are exact up to
/// round-off.
Coupling random_coupling(const DiscreteMeasure& mu, const DiscreteMeasure& nu, std::mt19937_64& rng);

}  // namespace wotkit
