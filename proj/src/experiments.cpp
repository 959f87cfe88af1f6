#include "wotkit/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <atomic>
#include <exception>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <thread>

#include "wotkit/error.hpp"
#include "wotkit/instances.hpp"
#include "wotkit/io.hpp"
#include "wotkit/order.hpp"
#include "wotkit/sliced.hpp"

namespace wotkit {

using nlohmann::json;

namespace {

std::string format_tag(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void write_coupling(const std::filesystem::path& path, const Coupling& pi) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    write_coupling_csv(out, pi);
}

void write_measure(const std::filesystem::path& path, const DiscreteMeasure& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    write_measure_csv(out, m);
}

std::filesystem::path prepare_dir(const ExperimentConfig& config) {
    if (config.output_dir.empty()) return {};
    std::filesystem::path dir(config.output_dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::size_t thread_cap() {
    std::size_t cap = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("WOTKIT_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) cap = static_cast<std::size_t>(v);
    }
    return cap;
}

// Runs job(k) for k in [0, count) on at most WOTKIT_THREADS threads. Each job
// writes only its own slot, so results do not depend on scheduling.
void run_cells(std::size_t count, const std::function<void(std::size_t)>& job) {
    const std::size_t workers = std::min(thread_cap(), count);
    if (workers <= 1) {
        for (std::size_t k = 0; k < count; ++k) job(k);
        return;
    }
    std::vector<std::exception_ptr> errors(count);
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t k = next++; k < count; k = next++) {
                try {
                    job(k);
                } catch (...) {
                    errors[k] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

struct Cell {
    double t = 0.0;
    ProblemSpec spec;
    SolveReport report;
};

json cell_json(const Cell& c) {
    json j = report_json(c.report, c.spec);
    j["t"] = c.t;
    if (c.spec.mu.dim() == 1 && c.spec.nu.dim() == 1) {
        j["barycenter_residual"] = barycenter_residual(c.report.plan);
        j["map_distance_to_monotone"] = map_distance_to_monotone(c.report.plan);
    }
    return j;
}

ExperimentResult run_interpolation(const ExperimentConfig& config, const char* name,
                                   ProblemSpec (*build)(const DiscreteMeasure&, const DiscreteMeasure&,
                                                        double, double)) {
    const double eps = config.epsilon_or_default();
    const auto [mu, nu] = interpolation_marginals(config.n_points);
    std::vector<Cell> cells(config.t_grid.size());
    for (std::size_t k = 0; k < cells.size(); ++k) {
        cells[k].t = config.t_grid[k];
        cells[k].spec = build(mu, nu, config.t_grid[k], eps);
    }
    run_cells(cells.size(), [&](std::size_t k) { cells[k].report = solve(cells[k].spec, config.solver); });

    ExperimentResult res;
    res.summary["experiment"] = name;
    res.summary["config"] = config.to_json();
    res.summary["cells"] = json::array();
    const auto dir = prepare_dir(config);
    if (!dir.empty()) {
        write_measure(dir / "mu.csv", mu);
        write_measure(dir / "nu.csv", nu);
    }
    for (const auto& c : cells) {
        const json j = cell_json(c);
        res.summary["cells"].push_back(j);
        res.all_converged = res.all_converged && c.report.converged();
        if (!dir.empty()) {
            const std::string tag = format_tag(c.t);
            write_coupling(dir / ("coupling_t" + tag + ".csv"), c.report.plan);
            write_json(dir / ("report_t" + tag + ".json"), j);
        }
    }
    res.summary["all_converged"] = res.all_converged;
    if (!dir.empty()) write_json(dir / "summary.json", res.summary);
    return res;
}

}  // namespace

std::string to_string(Experiment e) {
    switch (e) {
        case Experiment::brenier_strassen: return "brenier_strassen";
        case Experiment::left_curtain: return "left_curtain";
        case Experiment::solve: return "solve";
        case Experiment::rate_study_eps: return "rate_study_eps";
        case Experiment::rate_study_zeta: return "rate_study_zeta";
        case Experiment::check_order: return "check_order";
        case Experiment::sliced_test: return "sliced_test";
    }
    return "unknown";
}

Experiment parse_experiment(const std::string& name) {
    std::string n = name;
    std::replace(n.begin(), n.end(), '-', '_');
    for (auto e : {Experiment::brenier_strassen, Experiment::left_curtain, Experiment::solve,
                   Experiment::rate_study_eps, Experiment::rate_study_zeta, Experiment::check_order,
                   Experiment::sliced_test}) {
        if (to_string(e) == n) return e;
    }
    throw InvalidArgument("unknown experiment '" + name + "'");
}

double ExperimentConfig::epsilon_or_default() const {
    if (epsilon) return *epsilon;
    return experiment == Experiment::rate_study_zeta ? 1e-3 : 1e-2;
}

void ExperimentConfig::validate() const {
    if (n_points < 2) throw InvalidArgument("n_points must be at least 2");
    if (!(epsilon_or_default() > 0.0)) throw InvalidArgument("epsilon must be positive");
    if (zeta && !(*zeta > 0.0)) throw InvalidArgument("zeta must be positive");
    for (double t : t_grid) {
        if (!(t >= 0.0 && t <= 1.0)) throw InvalidArgument("t_grid values must lie in [0, 1]");
    }
    if (t_grid.empty() &&
        (experiment == Experiment::brenier_strassen || experiment == Experiment::left_curtain)) {
        throw InvalidArgument("t_grid must not be empty");
    }
    for (double e : eps_grid) {
        if (!(e > 0.0 && e < 1.0)) throw InvalidArgument("eps_grid values must lie in (0, 1)");
    }
    for (double z : zeta_grid) {
        if (!(z > 0.0)) throw InvalidArgument("zeta_grid values must be positive");
    }
    if (experiment == Experiment::solve && spec_path.empty()) throw InvalidArgument("solve needs a problem file");
    if (experiment == Experiment::check_order && (mu_path.empty() || nu_path.empty())) {
        throw InvalidArgument("check_order needs both measure files");
    }
    if (rate_rows * rate_cols > kOracleVariableCap || rate_rows < 1 || rate_cols < 2) {
        throw InvalidArgument("rate study instance outside the oracle cap");
    }
    solver.validate();
}

ExperimentConfig ExperimentConfig::from_json(const json& doc) {
    ExperimentConfig c;
    try {
        if (doc.contains("experiment")) c.experiment = parse_experiment(doc.at("experiment").get<std::string>());
        c.n_points = doc.value("n_points", c.n_points);
        if (doc.contains("epsilon") && !doc.at("epsilon").is_null()) c.epsilon = doc.at("epsilon").get<double>();
        if (doc.contains("zeta") && !doc.at("zeta").is_null()) c.zeta = doc.at("zeta").get<double>();
        c.t_grid = doc.value("t_grid", c.t_grid);
        c.seed = doc.value("seed", c.seed);
        c.output_dir = doc.value("output_dir", c.output_dir);
        c.eps_grid = doc.value("eps_grid", c.eps_grid);
        c.zeta_grid = doc.value("zeta_grid", c.zeta_grid);
        c.rate_rows = doc.value("rate_rows", c.rate_rows);
        c.rate_cols = doc.value("rate_cols", c.rate_cols);
        c.spec_path = doc.value("spec", c.spec_path);
        c.mu_path = doc.value("mu", c.mu_path);
        c.nu_path = doc.value("nu", c.nu_path);
        c.sliced_trials = doc.value("sliced_trials", c.sliced_trials);
        if (doc.contains("solver")) {
            const auto& s = doc.at("solver");
            if (s.contains("tau") && !s.at("tau").is_null()) c.solver.tau = s.at("tau").get<double>();
            c.solver.max_outer_iters = s.value("max_outer_iters", c.solver.max_outer_iters);
            c.solver.tol_marginal = s.value("tol_marginal", c.solver.tol_marginal);
            c.solver.tol_gap = s.value("tol_gap", c.solver.tol_gap);
            c.solver.tol_moment = s.value("tol_moment", c.solver.tol_moment);
            c.solver.tol_stationarity = s.value("tol_stationarity", c.solver.tol_stationarity);
            c.solver.inner_sinkhorn_iters = s.value("inner_sinkhorn_iters", c.solver.inner_sinkhorn_iters);
            c.solver.gauge_fix = s.value("gauge_fix", c.solver.gauge_fix);
            c.solver.epsilon_scaling = s.value("epsilon_scaling", c.solver.epsilon_scaling);
            c.solver.scaling_tol = s.value("scaling_tol", c.solver.scaling_tol);
            c.solver.adaptive_step = s.value("adaptive_step", c.solver.adaptive_step);
            c.solver.newton_every = s.value("newton_every", c.solver.newton_every);
            c.solver.multiplier_shift = s.value("multiplier_shift", c.solver.multiplier_shift);
        }
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("experiment config: ") + e.what());
    }
    return c;
}

json ExperimentConfig::to_json() const {
    json j;
    j["experiment"] = wotkit::to_string(experiment);
    j["n_points"] = n_points;
    j["epsilon"] = epsilon_or_default();
    j["zeta"] = zeta ? json(*zeta) : json(nullptr);
    j["t_grid"] = t_grid;
    j["seed"] = seed;
    j["eps_grid"] = eps_grid;
    j["zeta_grid"] = zeta_grid;
    j["rate_rows"] = rate_rows;
    j["rate_cols"] = rate_cols;
    j["solver"] = {{"tau", solver.tau ? json(*solver.tau) : json(nullptr)},
                   {"max_outer_iters", solver.max_outer_iters},
                   {"tol_marginal", solver.tol_marginal},
                   {"tol_gap", solver.tol_gap},
                   {"tol_moment", solver.tol_moment},
                   {"tol_stationarity", solver.tol_stationarity},
                   {"inner_sinkhorn_iters", solver.inner_sinkhorn_iters},
                   {"gauge_fix", solver.gauge_fix},
                   {"epsilon_scaling", solver.epsilon_scaling},
                   {"scaling_tol", solver.scaling_tol},
                   {"adaptive_step", solver.adaptive_step},
                   {"newton_every", solver.newton_every},
                   {"multiplier_shift", solver.multiplier_shift}};
    return j;
}

std::pair<DiscreteMeasure, DiscreteMeasure> interpolation_marginals(std::size_t n) {
    return {normal_quantile_grid(n), bimodal_quantile_grid(n)};
}

ProblemSpec brenier_strassen_problem(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double t,
                                     double epsilon) {
    if (!(t >= 0.0 && t <= 1.0)) throw InvalidArgument("t must lie in [0, 1]");
    ProblemSpec spec;
    spec.mu = mu;
    spec.nu = nu;
    spec.cost = squared_distance_cost(mu, nu);
    for (double& c : spec.cost.data()) c *= t;
    spec.g = empty_tensor(mu, nu);
    if (t < 1.0) {
        spec.f = barycentric_tensor(mu, nu);
        spec.theta = Penalty::quadratic(1.0 - t);
    } else {
        spec.f = empty_tensor(mu, nu);
    }
    spec.epsilon = epsilon;
    return spec;
}

ProblemSpec left_curtain_problem(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double t,
                                 double epsilon) {
    if (!(t >= 0.0 && t <= 1.0)) throw InvalidArgument("t must lie in [0, 1]");
    if (mu.dim() != 1 || nu.dim() != 1) throw DimensionError("left-curtain problem is one-dimensional");
    ProblemSpec spec;
    spec.mu = mu;
    spec.nu = nu;
    spec.cost = cost_from(mu, nu, [t](std::span<const double> x, std::span<const double> y) {
        const double d = x[0] - y[0];
        return t * d * d + (1.0 - t) * (1.0 + std::tanh(-x[0])) * std::sqrt(1.0 + y[0] * y[0]);
    });
    spec.f = empty_tensor(mu, nu);
    if (t < 1.0) {
        spec.g = martingale_tensor(mu, nu);
        if (t > 0.0) {
            spec.theta_tilde = Penalty::quadratic(1.0);
            spec.zeta = t / (1.0 - t);
        }
    } else {
        spec.g = empty_tensor(mu, nu);
    }
    spec.epsilon = epsilon;
    return spec;
}

double barycenter_residual(const Coupling& pi) {
    const auto& mu = pi.row_measure();
    const auto& nu = pi.col_measure();
    if (mu.dim() != 1 || nu.dim() != 1) throw DimensionError("barycenter residual is one-dimensional");
    double worst = 0.0;
    for (std::size_t i = 0; i < pi.rows(); ++i) {
        if (!(mu.weight(i) > 0.0)) continue;
        double m = 0.0;
        auto r = pi.matrix().row(i);
        for (std::size_t j = 0; j < r.size(); ++j) m += r[j] * nu.x(j);
        worst = std::max(worst, std::abs(m / mu.weight(i) - mu.x(i)));
    }
    return worst;
}

double map_distance_to_monotone(const Coupling& pi) {
    const auto& mu = pi.row_measure();
    const auto& nu = pi.col_measure();
    if (mu.dim() != 1 || nu.dim() != 1) throw DimensionError("monotone map is one-dimensional");
    std::vector<std::size_t> rows(mu.size()), cols(nu.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    std::iota(cols.begin(), cols.end(), std::size_t{0});
    std::sort(rows.begin(), rows.end(), [&](auto a, auto b) { return mu.x(a) < mu.x(b); });
    std::sort(cols.begin(), cols.end(), [&](auto a, auto b) { return nu.x(a) < nu.x(b); });

    // Barycentric map of the comonotone coupling.
    std::vector<double> mono(mu.size(), 0.0);
    std::size_t a = 0, b = 0;
    double ra = mu.weight(rows[0]), rb = nu.weight(cols[0]);
    while (a < rows.size() && b < cols.size()) {
        const double step = std::min(ra, rb);
        mono[rows[a]] += step * nu.x(cols[b]);
        ra -= step;
        rb -= step;
        if (ra <= rb) {
            if (++a < rows.size()) ra += mu.weight(rows[a]);
        } else {
            if (++b < cols.size()) rb += nu.weight(cols[b]);
        }
    }
    double dist = 0.0;
    for (std::size_t i = 0; i < pi.rows(); ++i) {
        const double w = mu.weight(i);
        if (!(w > 0.0)) continue;
        double m = 0.0;
        auto r = pi.matrix().row(i);
        for (std::size_t j = 0; j < r.size(); ++j) m += r[j] * nu.x(j);
        dist += std::abs(m - mono[i]);  // w * |m/w - mono/w|
    }
    return dist;
}

ProblemSpec rate_study_instance(std::size_t rows, std::size_t cols, std::uint64_t seed, double epsilon) {
    std::mt19937_64 rng(seed);
    auto [mu, nu] = random_martingale_pair(rows, cols, rng);
    ProblemSpec spec;
    spec.cost = cost_from(mu, nu, [](std::span<const double> x, std::span<const double> y) {
        return std::abs(x[0] - y[0]);
    });
    spec.f = empty_tensor(mu, nu);
    spec.g = martingale_tensor(mu, nu);
    spec.mu = std::move(mu);
    spec.nu = std::move(nu);
    spec.epsilon = epsilon;
    return spec;
}

ExperimentResult run_brenier_strassen(const ExperimentConfig& config) {
    return run_interpolation(config, "brenier_strassen", &brenier_strassen_problem);
}

ExperimentResult run_left_curtain(const ExperimentConfig& config) {
    return run_interpolation(config, "left_curtain", &left_curtain_problem);
}

ExperimentResult run_solve(const ExperimentConfig& config) {
    ProblemSpec spec = load_problem_json(config.spec_path);
    if (config.epsilon) spec.epsilon = *config.epsilon;
    if (config.zeta) {
        spec.zeta = config.zeta;
        if (!spec.theta_tilde) spec.theta_tilde = Penalty::quadratic(1.0);
    }
    spec.validate();
    const SolveReport rep = solve(spec, config.solver);

    ExperimentResult res;
    res.all_converged = rep.converged();
    res.summary = report_json(rep, spec);
    res.summary["experiment"] = "solve";
    const auto dir = prepare_dir(config);
    if (!dir.empty()) {
        write_coupling(dir / "coupling.csv", rep.plan);
        write_json(dir / "report.json", res.summary);
        write_json(dir / "summary.json", res.summary);
    }
    return res;
}

ExperimentResult run_rate_study_eps(const ExperimentConfig& config) {
    std::vector<double> grid = config.eps_grid;
    std::sort(grid.begin(), grid.end(), std::greater<>());
    ProblemSpec spec = rate_study_instance(config.rate_rows, config.rate_cols, config.seed, grid.front());
    const auto lp = solve_martingale_lp(spec.mu, spec.nu, spec.cost);

    ExperimentResult res;
    json rows = json::array();
    std::vector<std::pair<double, double>> samples;
    std::vector<double> gaps;
    std::optional<DualState> warm;
    for (double eps : grid) {
        spec.epsilon = eps;
        const SolveReport rep = solve(spec, config.solver, warm);
        warm = rep.final_state;
        const double value = rep.primal_breakdown.total;
        samples.emplace_back(eps, value);
        gaps.push_back(value - lp.value);
        res.all_converged = res.all_converged && rep.converged();
        rows.push_back({{"epsilon", eps},
                        {"value", value},
                        {"gap_to_lp", value - lp.value},
                        {"iterations", rep.iterations},
                        {"status", to_string(rep.status)},
                        {"duality_gap", rep.duality_gap},
                        {"moment_residual", rep.moment_residual},
                        {"alpha_sup_norm", rep.alpha_sup_norm}});
    }
    const Extrapolation fit = unregularized_value_extrapolation(samples);
    bool positive = true, decreasing = true;
    for (std::size_t k = 0; k < gaps.size(); ++k) {
        positive = positive && gaps[k] > 0.0;
        if (k > 0) decreasing = decreasing && gaps[k] < gaps[k - 1];
    }
    double scale = 1.0;
    for (double c : spec.cost.data()) scale = std::max(scale, std::abs(c));

    res.summary = {{"experiment", "rate_study_eps"},
                   {"config", config.to_json()},
                   {"lp_value", lp.value},
                   {"lp_dual_residual", lp.dual_residual},
                   {"value_scale", scale},
                   {"rows", rows},
                   {"fit", {{"v0_estimate", fit.v0_estimate}, {"slope", fit.slope}, {"r_squared", fit.r_squared}}},
                   {"intercept_error", std::abs(fit.v0_estimate - lp.value)},
                   {"gaps_positive", positive},
                   {"gaps_decreasing", decreasing},
                   {"all_converged", res.all_converged}};
    const auto dir = prepare_dir(config);
    if (!dir.empty()) {
        std::string table = "epsilon,value,gap_to_lp\n";
        char buf[128];
        for (const auto& r : rows) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", r["epsilon"].get<double>(),
                          r["value"].get<double>(), r["gap_to_lp"].get<double>());
            table += buf;
        }
        write_text(dir / "rate_eps.csv", table);
        write_json(dir / "summary.json", res.summary);
    }
    return res;
}

ExperimentResult run_rate_study_zeta(const ExperimentConfig& config) {
    const double eps = config.epsilon_or_default();
    ProblemSpec hard = rate_study_instance(config.rate_rows, config.rate_cols, config.seed, eps);
    const SolveReport hard_rep = solve(hard, config.solver);
    const double hard_value = hard_rep.primal_breakdown.total;

    ExperimentResult res;
    res.all_converged = hard_rep.converged();
    std::vector<double> grid = config.zeta_grid;
    std::sort(grid.begin(), grid.end(), std::greater<>());
    json rows = json::array();
    std::vector<double> gaps, ratios;
    for (double z : grid) {
        ProblemSpec pen = hard;
        pen.zeta = z;
        pen.theta_tilde = Penalty::quadratic(1.0);
        const SolveReport rep = solve(pen, config.solver);
        res.all_converged = res.all_converged && rep.converged();
        const double gap = hard_value - rep.primal_breakdown.total;
        gaps.push_back(gap);
        ratios.push_back(gap / z);
        rows.push_back({{"zeta", z},
                        {"value", rep.primal_breakdown.total},
                        {"gap", gap},
                        {"gap_over_zeta", gap / z},
                        {"compatibility", eps * std::abs(std::log(z))},
                        {"iterations", rep.iterations},
                        {"status", to_string(rep.status)},
                        {"moment_residual", rep.moment_residual}});
    }
    const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
    bool decreasing = true;
    for (std::size_t k = 1; k < gaps.size(); ++k) decreasing = decreasing && gaps[k] < gaps[k - 1];

    // Large zeta: the penalty vanishes and the unconstrained value is recovered.
    ProblemSpec loose = hard;
    loose.zeta = 1e8;
    loose.theta_tilde = Penalty::quadratic(1.0);
    ProblemSpec unconstrained = hard;
    unconstrained.g = empty_tensor(hard.mu, hard.nu);
    const SolveReport loose_rep = solve(loose, config.solver);
    const SolveReport free_rep = solve(unconstrained, config.solver);

    res.summary = {{"experiment", "rate_study_zeta"},
                   {"config", config.to_json()},
                   {"epsilon", eps},
                   {"hard_value", hard_value},
                   {"rows", rows},
                   {"ratio_spread", *lo > 0.0 ? *hi / *lo : std::numeric_limits<double>::infinity()},
                   {"gaps_decreasing", decreasing},
                   {"large_zeta_value", loose_rep.primal_breakdown.total},
                   {"unconstrained_value", free_rep.primal_breakdown.total},
                   {"all_converged", res.all_converged}};
    const auto dir = prepare_dir(config);
    if (!dir.empty()) write_json(dir / "summary.json", res.summary);
    return res;
}

ExperimentResult run_check_order(const ExperimentConfig& config) {
    const auto mu = load_measure_csv(config.mu_path);
    const auto nu = load_measure_csv(config.nu_path);
    ExperimentResult res;
    res.summary = to_json(convex_order_1d(mu, nu));
    const auto dir = prepare_dir(config);
    if (!dir.empty()) write_json(dir / "order.json", res.summary);
    return res;
}

ExperimentResult run_sliced_test(const ExperimentConfig& config) {
    std::mt19937_64 rng(config.seed);
    const std::vector<double> deltas = {0.5, 0.2, 0.1};
    double worst_marginal = 0.0, worst_entropy_excess = -std::numeric_limits<double>::infinity();
    double worst_winf_ratio = 0.0;
    for (std::size_t trial = 0; trial < config.sliced_trials; ++trial) {
        const std::size_t nx = 2 + rng() % 9, ny = 2 + rng() % 14;
        const auto mu = random_measure_1d(nx, -1.0, 1.0, rng);
        const auto nu = random_measure_1d(ny, -1.5, 1.5, rng);
        const Coupling pi = random_coupling(mu, nu, rng);
        for (double delta : deltas) {
            const Coupling sl = sliced_approximation(pi, delta);
            worst_marginal = std::max(worst_marginal, sl.marginal_residual());
            const double bound = sliced_entropy_bound(delta, 1, nu.diameter_inf());
            worst_entropy_excess = std::max(worst_entropy_excess, relative_entropy(sl).get() - bound);
            for (std::size_t i = 0; i < nx; ++i) {
                const auto a = disintegrate(pi, i);
                const auto b = disintegrate(sl, i);
                const double w = w_infinity_distance_1d(nu.coords(), a.weights(), b.weights());
                worst_winf_ratio = std::max(worst_winf_ratio, w / delta);
            }
        }
    }
    ExperimentResult res;
    res.summary = {{"experiment", "sliced_test"},
                   {"trials", config.sliced_trials},
                   {"deltas", deltas},
                   {"max_marginal_error", worst_marginal},
                   {"max_entropy_minus_bound", worst_entropy_excess},
                   {"max_winf_over_delta", worst_winf_ratio},
                   {"all_guarantees_hold",
                    worst_marginal <= 1e-12 && worst_entropy_excess <= 0.0 && worst_winf_ratio <= 1.0}};
    const auto dir = prepare_dir(config);
    if (!dir.empty()) write_json(dir / "summary.json", res.summary);
    return res;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    config.validate();
    switch (config.experiment) {
        case Experiment::brenier_strassen: return run_brenier_strassen(config);
        case Experiment::left_curtain: return run_left_curtain(config);
        case Experiment::solve: return run_solve(config);
        case Experiment::rate_study_eps: return run_rate_study_eps(config);
        case Experiment::rate_study_zeta: return run_rate_study_zeta(config);
        case Experiment::check_order: return run_check_order(config);
        case Experiment::sliced_test: return run_sliced_test(config);
    }
    throw InvalidArgument("unknown experiment");
}

}  // namespace wotkit
