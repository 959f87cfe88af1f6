#pragma once

#include <optional>
#include <vector>

#include "wotkit/matrix.hpp"
#include "wotkit/measures.hpp"

namespace wotkit {

struct OrderReport {
    bool convex_order = false;
    /// mean(nu) - mean(mu)
    double mean_gap = 0.0;
    /// Strike where the call-price margin is smallest.
    double worst_test_point = 0.0;
    /// min over strikes k of E_nu (y - k)+ - E_mu (x - k)+.
    double margin = 0.0;
};

/// mu <=cvx nu for 1D discrete measures: equal means and dominated call
/// prices at every support point of either measure.
OrderReport convex_order_1d(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

struct NondegeneracyReport {
    bool ok = false;
    /// Smallest distance from a mu-support point to the boundary of the convex
    /// hull of supp(nu); negative when some point lies outside the hull.
    double distance = 0.0;
};

/// supp(mu) inside the interior of conv(supp(nu)). Supports d = 1 and d = 2.
NondegeneracyReport nondegeneracy_check(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

struct IrreducibilityReport {
    bool feasible = false;
    std::optional<Coupling> witness;
};

/// Looks for a martingale coupling with pi_ij >= floor mu_i nu_j everywhere
/// (1D, via the LP oracle). Throws SizeLimit above the oracle cap.
IrreducibilityReport irreducibility_probe(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                          double floor);

struct MedianResult {
    std::vector<double> a;
    double l1_value = 0.0;
};

/// Coordinatewise weighted median of the rows of `alpha` (n x N), which
/// minimizes sum_i w_i |alpha_i - a|_1. Ties resolve to the lowest minimizer.
MedianResult median(const Matrix& alpha, const std::vector<double>& weights);

}  // namespace wotkit
