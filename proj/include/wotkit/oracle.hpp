#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "wotkit/matrix.hpp"
#include "wotkit/measures.hpp"

namespace wotkit {

/// Largest number of LP variables the dense simplex accepts.
inline constexpr std::size_t kOracleVariableCap = 400;

/// min c.x  subject to  A x = b,  x >= lower.
struct LpProblem {
    std::vector<double> objective;
    Matrix equality;
    std::vector<double> rhs;
    std::vector<double> lower;  // empty means all zero
};

struct LpSolution {
    std::vector<double> x;
    double value = 0.0;
    /// Multipliers of the equality rows (y with c - A^T y >= 0 at optimum).
    std::vector<double> duals;
    /// max_j max(0, -(c_j - A_j^T y)): zero for an exactly optimal basis.
    double dual_residual = 0.0;
    /// |primal objective - dual objective| at the returned basis.
    double duality_gap = 0.0;
    std::size_t pivots = 0;
};

/// Dense two-phase tableau simplex with Bland's rule. Throws Infeasible when
/// phase one leaves a residual above 1e-9 and SizeLimit above the variable cap.
LpSolution solve_lp(const LpProblem& lp);

struct MomentLpResult {
    double value = 0.0;
    Coupling plan;
    double dual_residual = 0.0;
    double duality_gap = 0.0;
};

/// Exact minimizer of sum c_ij pi_ij over couplings of (mu, nu) whose
/// conditional g-moments vanish, optionally with pi_ij >= floor mu_i nu_j.
MomentLpResult solve_moment_lp(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                               const Matrix& cost, const Tensor3& g, double floor = 0.0);

/// Martingale special case: g(x, y) = y - x.
MomentLpResult solve_martingale_lp(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                   const Matrix& cost);

/// Plain entropic OT by alternating log-domain potential updates. Kept
/// independent of the SISTA solver so the two can be cross-checked. Throws
/// NotConverged when the row residual stays above tol after max_iters sweeps.
Coupling reference_sinkhorn(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                            const Matrix& cost, double epsilon, double tol,
                            std::size_t max_iters = 200000);

struct Extrapolation {
    double v0_estimate = 0.0;
    double slope = 0.0;
    double r_squared = 1.0;
};

/// Least-squares fit of value(eps) = v0 + slope * eps ln(1/eps).
/// Needs at least 3 distinct eps values spanning a decade or more
/// (IllConditioned otherwise).
Extrapolation unregularized_value_extrapolation(const std::vector<std::pair<double, double>>& values);

}  // namespace wotkit
