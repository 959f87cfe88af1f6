#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "wotkit/dual.hpp"
#include "wotkit/measures.hpp"
#include "wotkit/model.hpp"

namespace wotkit {

struct SolverConfig {
    /// Explicit step size; unset means auto_step_size(spec).
    std::optional<double> tau;
    std::size_t max_outer_iters = 100000;
    double tol_marginal = 1e-9;
    double tol_gap = 1e-8;
    double tol_moment = 1e-6;
    /// sup_i |grad theta*(lambda_i) - F_i| (and the alpha analogue in
    /// penalized mode), F_i being the Gibbs conditional f-moment.
    double tol_stationarity = 1e-8;
    std::size_t inner_sinkhorn_iters = 1;
    bool gauge_fix = true;
    /// Halvings of tau allowed after a dual decrease before giving up.
    int max_step_halvings = 30;
    /// Solve a ladder eps_0 > eps_0/2 > ... > eps first, warm-starting each
    /// rung from the previous one. eps_0 is the cost range over 4; rungs stop
    /// at the marginal tolerance `scaling_tol`.
    bool epsilon_scaling = false;
    /// With tau unset: start from kMaxAutoStep instead of auto_step_size and,
    /// whenever the dual value drops or turns non-finite, return to the last
    /// accepted state and halve tau.
    bool adaptive_step = false;
    /// Every `newton_every` outer iterations (0: never) while the marginal
    /// residual is above tolerance, take a line-searched Newton step in
    /// (phi, psi) with (lambda, alpha) fixed. Speeds up the slow Sinkhorn
    /// regime of nearly deterministic plans.
    std::size_t newton_every = 0;
    /// After each multiplier step, maximize the dual exactly along uniform
    /// shifts of lambda (resp. alpha) when the tensor is separable,
    /// f_ij = u_j - v_i, and the penalty quadratic. Such shifts are absorbed
    /// by the potentials, so the penalty alone sets their curvature.
    bool multiplier_shift = false;
    double scaling_tol = 1e-4;

    void validate() const;
};

enum class SolveStatus { converged, not_converged, diverged };

std::string to_string(SolveStatus s);

struct TraceEntry {
    double dual_value = 0.0;
    double duality_gap = 0.0;
    double marginal_residual = 0.0;
    double moment_residual = 0.0;
    double stationarity = 0.0;
};

struct SolveReport {
    SolveStatus status = SolveStatus::not_converged;
    DualState final_state;
    Coupling plan;
    std::size_t iterations = 0;
    /// Outer iterations spent on the eps-scaling ladder (not in `iterations`).
    std::size_t warmup_iterations = 0;
    double marginal_residual = 0.0;
    /// sup_i |conditional g-moment of the plan at row i|.
    double moment_residual = 0.0;
    double stationarity = 0.0;
    /// primal_value(plan).total - dual_value(final_state).
    double duality_gap = 0.0;
    double dual_value = 0.0;
    PrimalValue primal_breakdown;
    double tau = 0.0;
    /// Number of outer iterations whose dual value fell below the previous one.
    std::size_t step_too_large_events = 0;
    /// max |alpha_ik|, tracked across eps sweeps as a boundedness diagnostic.
    double alpha_sup_norm = 0.0;
    std::vector<std::string> warnings;
    std::vector<TraceEntry> trace;

    bool converged() const { return status == SolveStatus::converged; }
};

/// One Sinkhorn sweep: phi_i <- softmin_nu(C_i. - psi), then
/// psi_j <- softmin_mu(C_.j - phi), with C = cost + lambda.f + alpha.g.
DualState sinkhorn_block(const DualState& state, const ProblemSpec& spec);

/// Only the phi half of the sweep (rows of the Gibbs plan then sum to mu).
DualState sinkhorn_row_update(const DualState& state, const ProblemSpec& spec);
/// Only the psi half of the sweep (columns then sum to nu).
DualState sinkhorn_col_update(const DualState& state, const ProblemSpec& spec);

/// Row-preconditioned proximal-gradient ascent step on (lambda, alpha) with
/// rho = exp(-Lambda xi / eps):
///   lambda_i <- lambda_i - tau [grad theta*(lambda_i) - sum_j nu_j f_ij rho_ij]
///   alpha_i  <- alpha_i + tau sum_j nu_j g_ij rho_ij                 (hard)
///   alpha_i  <- prox of tau (theta_tilde/zeta)* at the same point    (penalized)
DualState ista_block(const DualState& state, const ProblemSpec& spec, double tau);

/// eps / (|f|_inf^2 + |g|_inf^2 + L eps), capped at `kMaxAutoStep`, where L is
/// the Lipschitz constant of grad theta* and |.|_inf the largest Euclidean
/// norm of a tensor fiber.
inline constexpr double kMaxAutoStep = 1.0;
double auto_step_size(const ProblemSpec& spec);

/// Alternate sinkhorn_block and ista_block until the marginal, gap,
/// stationarity and (hard mode) moment residuals are all below tolerance.
SolveReport solve(const ProblemSpec& spec, const SolverConfig& config = {},
                  const std::optional<DualState>& warm_start = std::nullopt);

}  // namespace wotkit
