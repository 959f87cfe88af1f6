#pragma once

#include <span>
#include <vector>

#include "wotkit/error.hpp"
#include "wotkit/matrix.hpp"
#include "wotkit/measures.hpp"
#include "wotkit/model.hpp"

namespace wotkit {

class Overflow : public Error {
public:
    using Error::Error;
};

/// Dual variables: potentials phi (rows), psi (columns), soft-moment
/// multipliers lambda (n_x x M) and hard-moment multipliers alpha (n_x x N).
struct DualState {
    std::vector<double> phi;
    std::vector<double> psi;
    Matrix lambda;
    Matrix alpha;

    static DualState zeros(const ProblemSpec& spec);

    /// Shift (phi, psi) -> (phi - a, psi + a) with a = sum_i mu_i phi_i, so
    /// that the mu-mean of phi is zero. Leaves the shadow cost unchanged.
    void gauge_fix(const DiscreteMeasure& mu);

    bool operator==(const DualState&) const = default;
};

/// (Lambda xi)_ij = cost_ij + lambda_i . f_ij + alpha_i . g_ij - phi_i - psi_j.
Matrix shadow_cost(const DualState& state, const ProblemSpec& spec);

/// -eps ln(sum_k w_k exp(-v_k / eps)), evaluated after subtracting the
/// smallest value carrying positive weight.
double softmin(std::span<const double> values, std::span<const double> weights, double epsilon);

/// pi_ij = mu_i nu_j exp(-(Lambda xi)_ij / eps). No normalization is applied.
/// Throws Overflow if an entry is not representable.
Coupling gibbs_plan(const DualState& state, const ProblemSpec& spec);

/// sum mu phi + sum nu psi - sum mu theta*(lambda) - eps sum mu nu exp(-Lambda xi / eps) + eps.
/// In penalized mode the term -sum mu (theta_tilde / zeta)*(alpha) is added,
/// where (theta_tilde / zeta)*(p) = theta_tilde*(zeta p) / zeta.
double dual_value(const DualState& state, const ProblemSpec& spec);

/// Gradient of dual_value with respect to every dual variable, in the layout
/// of DualState.
DualState dual_gradient(const DualState& state, const ProblemSpec& spec);

}  // namespace wotkit
