#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "wotkit/error.hpp"
#include "wotkit/experiments.hpp"

namespace {

constexpr int kExitNotConverged = 2;
constexpr int kExitInvalidConfig = 3;

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t used = 0;
        const double v = std::stod(item, &used);
        if (used != item.size()) throw wotkit::InvalidArgument("not a number: '" + item + "'");
        out.push_back(v);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Entropic weak optimal transport experiments"};
    app.set_version_flag("--version", "wotkit 0.1.0");

    std::string command, experiment, config_path, t_grid, eps_grid, zeta_grid;
    std::string out_dir, spec_path, mu_path, nu_path;
    std::size_t n_points = 0;
    double epsilon = 0.0, zeta = 0.0;
    std::uint64_t seed = 0;
    std::size_t max_iters = 0;

    app.add_option("command", command, "Experiment name (same as --experiment)");
    app.add_option("--experiment,-e", experiment,
                   "brenier_strassen | left_curtain | solve | rate_study_eps | rate_study_zeta | "
                   "check_order | sliced_test");
    app.add_option("--config,-c", config_path, "JSON config file; flags override its values");
    auto* o_n = app.add_option("--n-points", n_points, "Points per marginal");
    auto* o_eps = app.add_option("--epsilon", epsilon, "Entropic regularization");
    auto* o_zeta = app.add_option("--zeta", zeta, "Penalty parameter for the hard moments");
    app.add_option("--t-grid", t_grid, "Comma-separated interpolation parameters");
    app.add_option("--eps-grid", eps_grid, "Comma-separated epsilon grid (rate_study_eps)");
    app.add_option("--zeta-grid", zeta_grid, "Comma-separated zeta grid (rate_study_zeta)");
    auto* o_seed = app.add_option("--seed", seed, "Random seed");
    auto* o_out = app.add_option("--out,-o", out_dir, "Output directory (empty string: write nothing)");
    app.add_option("--spec", spec_path, "Problem JSON (solve)");
    app.add_option("--mu", mu_path, "Source measure CSV (check_order)");
    app.add_option("--nu", nu_path, "Target measure CSV (check_order)");
    auto* o_iters = app.add_option("--max-iters", max_iters, "Outer iteration cap");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInvalidConfig;
    }

    wotkit::ExperimentConfig config;
    try {
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw wotkit::InvalidArgument("cannot open " + config_path);
            nlohmann::json doc;
            try {
                in >> doc;
            } catch (const nlohmann::json::exception& e) {
                throw wotkit::InvalidArgument(config_path + ": " + e.what());
            }
            config = wotkit::ExperimentConfig::from_json(doc);
        }
        if (!command.empty() && !experiment.empty() && command != experiment) {
            throw wotkit::InvalidArgument("positional command and --experiment disagree");
        }
        if (!experiment.empty()) config.experiment = wotkit::parse_experiment(experiment);
        else if (!command.empty()) config.experiment = wotkit::parse_experiment(command);
        if (*o_n) config.n_points = n_points;
        if (*o_eps) config.epsilon = epsilon;
        if (*o_zeta) config.zeta = zeta;
        if (!t_grid.empty()) config.t_grid = parse_list(t_grid);
        if (!eps_grid.empty()) config.eps_grid = parse_list(eps_grid);
        if (!zeta_grid.empty()) config.zeta_grid = parse_list(zeta_grid);
        if (*o_seed) config.seed = seed;
        if (*o_out) config.output_dir = out_dir;
        if (!spec_path.empty()) config.spec_path = spec_path;
        if (!mu_path.empty()) config.mu_path = mu_path;
        if (!nu_path.empty()) config.nu_path = nu_path;
        if (*o_iters) config.solver.max_outer_iters = max_iters;
        config.validate();
    } catch (const std::exception& e) {
        std::cerr << "invalid config: " << e.what() << "\n";
        return kExitInvalidConfig;
    }

    try {
        const auto result = wotkit::run_experiment(config);
        std::cout << result.summary.dump(2) << "\n";
        if (!result.all_converged) {
            std::cerr << "warning: at least one solve did not converge\n";
            return kExitNotConverged;
        }
    } catch (const wotkit::NotConverged& e) {
        std::cerr << "not converged: " << e.what() << "\n";
        return kExitNotConverged;
    } catch (const wotkit::InvalidArgument& e) {
        std::cerr << "invalid config: " << e.what() << "\n";
        return kExitInvalidConfig;
    } catch (const wotkit::ParseError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kExitInvalidConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
