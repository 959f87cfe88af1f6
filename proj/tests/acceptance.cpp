#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <random>
#include <set>
#include <string>

#include "support.hpp"
#include "wotkit/dual.hpp"
#include "wotkit/error.hpp"
#include "wotkit/experiments.hpp"
#include "wotkit/oracle.hpp"
#include "wotkit/order.hpp"
#include "wotkit/sista.hpp"
#include "wotkit/sliced.hpp"

using namespace wotkit;
using namespace wotkit::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

ProblemSpec plain_spec(const DiscreteMeasure& mu, const DiscreteMeasure& nu, Matrix cost, double eps) {
    ProblemSpec s;
    s.mu = mu;
    s.nu = nu;
    s.cost = std::move(cost);
    s.f = empty_tensor(mu, nu);
    s.g = empty_tensor(mu, nu);
    s.epsilon = eps;
    return s;
}

double max_rel(const std::vector<double>& got, const std::vector<double>& want) {
    double e = 0;
    for (std::size_t k = 0; k < got.size(); ++k) e = std::max(e, std::abs(got[k] - want[k]) / want[k]);
    return e;
}

// Sinkhorn half-steps normalize rows, then columns, exactly.
Outcome half_step_normalization() {
    std::mt19937_64 rng(101);
    auto [mu, nu] = interpolation_marginals(200);
    std::vector<ProblemSpec> specs = {brenier_strassen_problem(mu, nu, 0.5, 1e-2),
                                      left_curtain_problem(mu, nu, 0.0, 1e-2),
                                      left_curtain_problem(mu, nu, 0.5, 1e-2)};
    double worst = 0, slowest = 0;
    for (const auto& spec : specs) {
        auto s = random_state(rng, spec, 0.5);
        const auto t0 = Clock::now();
        auto rows = sinkhorn_row_update(s, spec);
        auto both = sinkhorn_col_update(rows, spec);
        slowest = std::max(slowest, seconds_since(t0));
        worst = std::max(worst, max_rel(gibbs_plan(rows, spec).row_sums(), spec.mu.weights()));
        worst = std::max(worst, max_rel(gibbs_plan(both, spec).col_sums(), spec.nu.weights()));
    }
    return {worst <= 1e-13 && slowest < 1.0,
            "max relative error " + fmt("%.2e", worst) + ", slowest sweep " + fmt("%.3f", slowest) + " s"};
}

// Solver without moments agrees with the independent Sinkhorn implementation.
Outcome reference_equivalence() {
    std::mt19937_64 rng(102);
    const auto t0 = Clock::now();
    double worst = 0;
    bool all_converged = true;
    for (int k = 0; k < 20; ++k) {
        const double eps = k % 2 == 0 ? 0.05 : 0.1;
        auto mu = random_measure_1d(30, -1, 1, rng);
        auto nu = random_measure_1d(30, -1, 1, rng);
        Matrix cost(30, 30);
        for (double& c : cost.data()) c = uniform01(rng);
        auto spec = plain_spec(mu, nu, cost, eps);
        SolverConfig cfg;
        cfg.tol_marginal = 1e-12;
        auto rep = solve(spec, cfg);
        all_converged = all_converged && rep.converged();
        auto ref = reference_sinkhorn(mu, nu, cost, eps, 1e-13);
        worst = std::max(worst, max_abs_diff(rep.plan.matrix(), ref.matrix()));
    }
    const double t = seconds_since(t0);
    return {all_converged && worst <= 1e-8 && t < 30,
            "max entrywise difference " + fmt("%.2e", worst) + ", " + fmt("%.2f", t) + " s"};
}

// Primal minus dual at convergence over every mode of the tiny zoo.
Outcome strong_duality() {
    double worst = 0;
    std::size_t count = 0, failed = 0;
    for (const auto& entry : tiny_zoo(103)) {
        auto rep = solve(entry.spec, fast_config());
        if (!rep.converged()) {
            ++failed;
            continue;
        }
        auto plan = gibbs_plan(rep.final_state, entry.spec);
        const double gap = primal_value(plan, entry.spec).total - dual_value(rep.final_state, entry.spec);
        worst = std::max(worst, std::abs(gap));
        ++count;
    }
    return {failed == 0 && worst <= 1e-7,
            std::to_string(count) + " instances, max |gap| " + fmt("%.2e", worst) +
                (failed ? ", " + std::to_string(failed) + " not converged" : "")};
}

// lambda_i = grad theta(conditional f-moment) at convergence.
Outcome optimality_condition() {
    std::mt19937_64 rng(104);
    double worst = 0;
    bool ok = true;
    for (int k = 0; k < 10; ++k) {
        const Mode m = k % 2 == 0 ? Mode::soft : Mode::soft_and_penalized;
        auto spec = random_spec(rng, m, 3 + k % 4, 4 + k % 3, k < 5 ? 0.05 : 0.2);
        auto rep = solve(spec, fast_config());
        ok = ok && rep.converged();
        auto plan = gibbs_plan(rep.final_state, spec);
        for (std::size_t i = 0; i < spec.rows(); ++i) {
            const double grad = 2 * spec.theta->scale() * conditional_moment(plan, spec.f, i)[0];
            worst = std::max(worst, std::abs(rep.final_state.lambda(i, 0) - grad));
        }
    }
    return {ok && worst <= 1e-5, "max |lambda - grad theta(F)| " + fmt("%.2e", worst)};
}

// Hard martingale mode against the LP oracle, at eps = 1e-3 and extrapolated.
Outcome martingale_vs_lp() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(105);
    const double eps_small = 1e-3;
    const std::vector<double> grid = {0.1, 0.05, 0.02, 0.01, 0.005};
    double worst_value = 0, worst_fit = 0;
    bool ok = true;
    std::string notes;
    for (int k = 0; k < 10; ++k) {
        const std::size_t nx = 3 + rng() % 6;
        const std::size_t ny = std::min<std::size_t>(4 + rng() % 8, 100 / nx);
        const auto base = rate_study_instance(nx, ny, 1000 + k, eps_small);
        double scale = 1;
        for (double c : base.cost.data()) scale = std::max(scale, std::abs(c));
        const double lp = solve_martingale_lp(base.mu, base.nu, base.cost).value;

        auto rep = solve(base, fast_config());
        ok = ok && rep.converged();
        const double value_err = std::abs(rep.primal_breakdown.total - lp) / scale;
        worst_value = std::max(worst_value, value_err);

        std::vector<std::pair<double, double>> pts;
        std::optional<DualState> warm;
        for (double e : grid) {
            auto spec = base;
            spec.epsilon = e;
            auto r = solve(spec, fast_config(), warm);
            ok = ok && r.converged();
            warm = r.final_state;
            pts.emplace_back(e, r.primal_breakdown.total);
        }
        const auto fit = unregularized_value_extrapolation(pts);
        worst_fit = std::max(worst_fit, std::abs(fit.v0_estimate - lp) / scale);
    }
    const double bound = 3 * eps_small * std::log(1 / eps_small);
    const double t = seconds_since(t0);
    return {ok && worst_value <= bound && worst_fit <= 2e-2 && t < 120,
            "max |value(1e-3) - LP| / scale " + fmt("%.2e", worst_value) + " (bound " + fmt("%.2e", bound) +
                "), max intercept error " + fmt("%.2e", worst_fit) + ", " + fmt("%.1f", t) + " s"};
}

// Gaps to the LP value along the eps grid.
Outcome eps_rate() {
    ExperimentConfig c;
    c.experiment = Experiment::rate_study_eps;
    c.output_dir = "";
    auto r = run_rate_study_eps(c);
    const auto& s = r.summary;
    const bool pos = s["gaps_positive"].get<bool>(), dec = s["gaps_decreasing"].get<bool>();
    const double r2 = s["fit"]["r_squared"].get<double>();
    return {r.all_converged && pos && dec,
            std::string("gaps positive ") + (pos ? "yes" : "no") + ", decreasing " + (dec ? "yes" : "no") +
                ", R^2 " + fmt("%.4f", r2) + (r2 >= 0.95 ? " (>= 0.95)" : " (below 0.95, logged only)")};
}

// gap(zeta) / zeta stays within a factor 10 across the zeta grid.
Outcome zeta_rate() {
    ExperimentConfig c;
    c.experiment = Experiment::rate_study_zeta;
    c.output_dir = "";
    auto r = run_rate_study_zeta(c);
    const double spread = r.summary["ratio_spread"].get<double>();
    return {r.all_converged && spread <= 10.0, "max/min of gap/zeta " + fmt("%.4f", spread)};
}

// Marginals, entropy bound and per-row W_inf of the sliced approximation.
Outcome sliced_guarantees() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(108);
    double marg = 0, slack = -1e300, winf = 0;
    for (int trial = 0; trial < 100; ++trial) {
        auto mu = random_measure_1d(1 + rng() % 10, -1, 1, rng);
        auto nu = random_measure_1d(1 + rng() % 20, -2, 2, rng);
        auto pi = random_coupling(mu, nu, rng);
        std::vector<double> ys(nu.size());
        for (std::size_t j = 0; j < nu.size(); ++j) ys[j] = nu.x(j);
        for (double d : {0.5, 0.2, 0.1}) {
            auto s = sliced_approximation(pi, d);
            auto r = s.row_sums();
            auto c = s.col_sums();
            for (std::size_t i = 0; i < r.size(); ++i) marg = std::max(marg, std::abs(r[i] - mu.weight(i)));
            for (std::size_t j = 0; j < c.size(); ++j) marg = std::max(marg, std::abs(c[j] - nu.weight(j)));
            slack = std::max(slack, relative_entropy(s).get() - sliced_entropy_bound(d, 1, nu.diameter_inf()));
            for (std::size_t i = 0; i < mu.size(); ++i) {
                std::vector<double> p(nu.size()), q(nu.size());
                for (std::size_t j = 0; j < nu.size(); ++j) {
                    p[j] = pi(i, j) / mu.weight(i);
                    q[j] = s(i, j) / mu.weight(i);
                }
                winf = std::max(winf, w_infinity_distance_1d(ys, p, q) / d);
            }
        }
    }
    const double t = seconds_since(t0);
    return {marg <= 1e-12 && slack <= 0 && winf <= 1 + 1e-12 && t < 10,
            "marginal error " + fmt("%.1e", marg) + ", max entropy - bound " + fmt("%.3f", slack) +
                ", max W_inf / delta " + fmt("%.3f", winf) + ", " + fmt("%.2f", t) + " s"};
}

// Convex order decided by call prices agrees with martingale LP feasibility.
Outcome strassen() {
    std::mt19937_64 rng(109);
    int agree = 0, ordered = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t nx = 1 + rng() % 8, ny = 1 + rng() % 8;
        auto [mu, nu] = trial % 2 == 0 ? random_martingale_pair(nx, std::max<std::size_t>(ny, 2), rng)
                                       : random_equal_mean_pair(nx, ny, rng);
        const bool cvx = convex_order_1d(mu, nu).convex_order;
        bool feasible = true;
        try {
            solve_martingale_lp(mu, nu, Matrix(mu.size(), nu.size(), 0.0));
        } catch (const Infeasible&) {
            feasible = false;
        }
        agree += cvx == feasible;
        ordered += cvx;
    }
    return {agree == 200, std::to_string(agree) + "/200 agree (" + std::to_string(ordered) + " convex-ordered)"};
}

fs::path artifact_root() {
    const char* env = std::getenv("WOTKIT_ACCEPTANCE_DIR");
    return env ? fs::path(env) : fs::current_path() / "acceptance_out";
}

// Brenier-Strassen grid at n = 200, then the n = 1000 run.
Outcome interpolation_reproduction() {
    ExperimentConfig c;
    c.experiment = Experiment::brenier_strassen;
    c.n_points = 200;
    c.output_dir = (artifact_root() / "brenier_strassen_200").string();
    auto t0 = Clock::now();
    auto r = run_experiment(c);
    const double t200 = seconds_since(t0);
    double bary0 = -1, map1 = -1;
    for (const auto& cell : r.summary["cells"]) {
        if (cell["t"].get<double>() == 0.0) bary0 = cell["barycenter_residual"].get<double>();
        if (cell["t"].get<double>() == 1.0) map1 = cell["map_distance_to_monotone"].get<double>();
    }
    const bool ok200 = r.all_converged && bary0 >= 0 && bary0 <= 0.05 && map1 >= 0 && map1 <= 0.05 && t200 < 300;

    c.n_points = 1000;
    c.output_dir = (artifact_root() / "brenier_strassen_1000").string();
    t0 = Clock::now();
    auto big = run_experiment(c);
    const double t1000 = seconds_since(t0);
    const fs::path d(c.output_dir);
    bool artifacts = fs::exists(d / "summary.json") && fs::exists(d / "mu.csv") && fs::exists(d / "nu.csv");
    for (const auto& cell : big.summary["cells"]) {
        char tag[32];
        std::snprintf(tag, sizeof tag, "%g", cell["t"].get<double>());
        artifacts = artifacts && fs::exists(d / ("coupling_t" + std::string(tag) + ".csv")) &&
                    fs::exists(d / ("report_t" + std::string(tag) + ".json"));
    }
    return {ok200 && artifacts,
            "n=200: t=0 barycenter residual " + fmt("%.4f", bary0) + ", t=1 map W1 " + fmt("%.4f", map1) + ", " +
                fmt("%.1f", t200) + " s" + (r.all_converged ? "" : ", not all converged") + "; n=1000: " +
                (artifacts ? "artifacts written" : "artifacts missing") + ", " +
                (big.all_converged ? "converged" : "not all converged") + ", " + fmt("%.1f", t1000) + " s"};
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        std::ifstream in(e.path(), std::ios::binary);
        out[fs::relative(e.path(), dir).string()] = {std::istreambuf_iterator<char>(in), {}};
    }
    return out;
}

// Every CLI experiment twice, with different thread counts, byte for byte.
Outcome determinism() {
    const fs::path dir = artifact_root() / "determinism";
    const fs::path out = dir / "run";
    const std::vector<std::string> commands = {
        "brenier_strassen --n-points 60",
        "left_curtain --n-points 40",
        "rate_study_eps",
        "rate_study_zeta",
        "sliced_test",
        "check_order --mu " + (dir / "mu.csv").string() + " --nu " + (dir / "nu.csv").string(),
        "solve --spec " + (dir / "problem.json").string(),
    };
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream(dir / "mu.csv") << "x,w\n-0.5,1\n0.5,1\n";
    std::ofstream(dir / "nu.csv") << "y,w\n-1,1\n0,1\n1,1\n";
    std::ofstream(dir / "problem.json")
        << R"({"mu": {"csv": "mu.csv"}, "nu": {"csv": "nu.csv"}, "cost": "abs", "g": "martingale", "epsilon": 0.05})";

    int identical = 0;
    std::string first_diff;
    for (const auto& cmd : commands) {
        std::map<std::string, std::string> runs[2];
        for (int k = 0; k < 2; ++k) {
            fs::remove_all(out);
            const std::string line = std::string("WOTKIT_THREADS=") + (k == 0 ? "1" : "4") + " \"" + WOTKIT_CLI_PATH +
                                     "\" " + cmd + " --out \"" + out.string() + "\" > \"" + (dir / "stdout.txt").string() +
                                     "\" 2>&1";
            const int rc = std::system(line.c_str());
            runs[k] = fs::exists(out) ? snapshot(out) : std::map<std::string, std::string>{};
            std::ifstream so(dir / "stdout.txt", std::ios::binary);
            runs[k]["<stdout>"] = {std::istreambuf_iterator<char>(so), {}};
            runs[k]["<exit>"] = std::to_string(rc);
        }
        if (runs[0] == runs[1] && runs[0].size() > 2) {
            ++identical;
        } else if (first_diff.empty()) {
            first_diff = cmd;
        }
    }
    return {identical == static_cast<int>(commands.size()),
            std::to_string(identical) + "/" + std::to_string(commands.size()) + " experiments byte-identical" +
                (first_diff.empty() ? "" : " (first difference: " + first_diff + ")")};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"half-step normalization", half_step_normalization},
        {"equivalence with reference Sinkhorn", reference_equivalence},
        {"strong duality certificate", strong_duality},
        {"optimality condition for lambda", optimality_condition},
        {"martingale mode vs LP oracle", martingale_vs_lp},
        {"epsilon rate", eps_rate},
        {"zeta rate", zeta_rate},
        {"sliced approximation", sliced_guarantees},
        {"Strassen equivalence", strassen},
        {"interpolation reproduction", interpolation_reproduction},
        {"determinism", determinism},
    };
    std::set<int> selected;
    for (int k = 1; k < argc; ++k) selected.insert(std::atoi(argv[k]));

    fs::create_directories(artifact_root());
    std::ofstream log(artifact_root() / "results.txt");
    int failures = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const int id = static_cast<int>(k) + 1;
        if (!selected.empty() && !selected.count(id)) continue;
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        char head[96];
        std::snprintf(head, sizeof head, "[%s] %2d ", o.pass ? "PASS" : "FAIL", id);
        const std::string line = head + criteria[k].first + ": " + o.detail;
        std::printf("%s\n", line.c_str());
        std::fflush(stdout);
        log << line << "\n" << std::flush;
    }
    return failures == 0 ? 0 : 1;
}
