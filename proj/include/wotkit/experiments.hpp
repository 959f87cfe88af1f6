#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wotkit/model.hpp"
#include "wotkit/oracle.hpp"
#include "wotkit/sista.hpp"

namespace wotkit {

enum class Experiment {
    brenier_strassen,
    left_curtain,
    solve,
    rate_study_eps,
    rate_study_zeta,
    check_order,
    sliced_test,
};

std::string to_string(Experiment e);
/// Accepts both snake_case and kebab-case names.
Experiment parse_experiment(const std::string& name);

struct ExperimentConfig {
    Experiment experiment = Experiment::brenier_strassen;
    std::size_t n_points = 200;
    /// Unset means the experiment's default (1e-2, or 1e-3 for the zeta study).
    std::optional<double> epsilon;
    std::optional<double> zeta;
    std::vector<double> t_grid = {0.0, 0.25, 0.5, 0.75, 1.0};
    std::uint64_t seed = 0;
    std::string output_dir = "out";

    std::vector<double> eps_grid = {0.1, 0.05, 0.02, 0.01, 0.005};
    std::vector<double> zeta_grid = {1e-1, 1e-2, 1e-3};
    /// Size of the random convex-ordered instance used by the rate studies.
    std::size_t rate_rows = 5;
    std::size_t rate_cols = 7;
    std::string spec_path;  // solve
    std::string mu_path;    // check_order
    std::string nu_path;    // check_order
    std::size_t sliced_trials = 100;
    /// Same defaults as SolverConfig except that eps-scaling, the adaptive
    /// step, multiplier shifts and Newton corrections every 10 iterations
    /// are on.
    SolverConfig solver = [] {
        SolverConfig s;
        s.epsilon_scaling = true;
        s.adaptive_step = true;
        s.newton_every = 10;
        s.multiplier_shift = true;
        return s;
    }();

    double epsilon_or_default() const;
    /// Throws InvalidArgument.
    void validate() const;
    /// Reads the keys written by to_json; missing keys keep their defaults.
    static ExperimentConfig from_json(const nlohmann::json& doc);
    nlohmann::json to_json() const;
};

/// Outcome of an experiment run. `summary` is also written to
/// `<output_dir>/summary.json` when an output directory is set.
struct ExperimentResult {
    bool all_converged = true;
    nlohmann::json summary;
};

/// Marginals of the interpolation experiments: the standard normal and the
/// two-bump mixture, both as quantile grids.
std::pair<DiscreteMeasure, DiscreteMeasure> interpolation_marginals(std::size_t n);

/// t |x - y|^2 + (1 - t) |x - bary(pi_x)|^2 (soft penalty; no penalty at t = 1).
ProblemSpec brenier_strassen_problem(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double t,
                                     double epsilon);
/// t |x - y|^2 + (1 - t)(1 + tanh(-x)) sqrt(1 + y^2) with the martingale
/// penalty (1/t - 1)|x - bary(pi_x)|^2, i.e. zeta = t / (1 - t). t = 0 uses
/// the hard martingale constraint, t = 1 plain entropic OT.
ProblemSpec left_curtain_problem(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double t,
                                 double epsilon);

/// max_i |sum_j pi_ij y_j / mu_i - x_i| over rows with mu_i > 0 (1D).
double barycenter_residual(const Coupling& pi);
/// int |T_pi(x) - T_mono(x)| dmu(x), with T_pi the barycentric map of pi and
/// T_mono the barycentric map of the comonotone coupling (1D).
double map_distance_to_monotone(const Coupling& pi);

/// Random convex-ordered instance used by the rate studies (cost |x - y|).
ProblemSpec rate_study_instance(std::size_t rows, std::size_t cols, std::uint64_t seed, double epsilon);

ExperimentResult run_brenier_strassen(const ExperimentConfig& config);
ExperimentResult run_left_curtain(const ExperimentConfig& config);
ExperimentResult run_solve(const ExperimentConfig& config);
ExperimentResult run_rate_study_eps(const ExperimentConfig& config);
ExperimentResult run_rate_study_zeta(const ExperimentConfig& config);
ExperimentResult run_check_order(const ExperimentConfig& config);
ExperimentResult run_sliced_test(const ExperimentConfig& config);

ExperimentResult run_experiment(const ExperimentConfig& config);

}  // namespace wotkit
