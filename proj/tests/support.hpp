#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "wotkit/instances.hpp"
#include "wotkit/model.hpp"
#include "wotkit/sista.hpp"

namespace wotkit::testing {

enum class Mode { plain, soft, hard, penalized, soft_and_penalized };

inline const char* name(Mode m) {
    switch (m) {
        case Mode::plain: return "plain";
        case Mode::soft: return "soft";
        case Mode::hard: return "hard";
        case Mode::penalized: return "penalized";
        case Mode::soft_and_penalized: return "soft+penalized";
    }
    return "?";
}

// Small random problem. Hard modes use a strictly positive martingale pair so
// the constraint is qualified; the other modes use arbitrary 1D measures.
inline ProblemSpec random_spec(std::mt19937_64& rng, Mode mode, std::size_t nx, std::size_t ny,
                               double eps) {
    ProblemSpec spec;
    if (mode == Mode::hard || mode == Mode::penalized || mode == Mode::soft_and_penalized) {
        auto [mu, nu] = random_martingale_pair(nx, ny, rng);
        spec.mu = std::move(mu);
        spec.nu = std::move(nu);
    } else {
        spec.mu = random_measure_1d(nx, -1.0, 1.0, rng);
        spec.nu = random_measure_1d(ny, -1.5, 1.5, rng);
    }
    spec.cost = cost_from(spec.mu, spec.nu, [](std::span<const double> x, std::span<const double> y) {
        return std::abs(x[0] - y[0]) + 0.5 * (x[0] - y[0]) * (x[0] - y[0]) * y[0];
    });
    spec.f = empty_tensor(spec.mu, spec.nu);
    spec.g = empty_tensor(spec.mu, spec.nu);
    if (mode == Mode::soft || mode == Mode::soft_and_penalized) {
        spec.f = barycentric_tensor(spec.mu, spec.nu);
        spec.theta = Penalty::quadratic(0.5 + uniform01(rng));
    }
    if (mode == Mode::hard || mode == Mode::penalized || mode == Mode::soft_and_penalized) {
        spec.g = martingale_tensor(spec.mu, spec.nu);
    }
    if (mode == Mode::penalized || mode == Mode::soft_and_penalized) {
        spec.theta_tilde = Penalty::quadratic(1.0);
        spec.zeta = 0.05 + 0.5 * uniform01(rng);
    }
    spec.epsilon = eps;
    return spec;
}

// Random dual state with moderate entries.
inline DualState random_state(std::mt19937_64& rng, const ProblemSpec& spec, double scale = 0.5) {
    DualState s = DualState::zeros(spec);
    for (double& v : s.phi) v = uniform(rng, -scale, scale);
    for (double& v : s.psi) v = uniform(rng, -scale, scale);
    for (double& v : s.lambda.data()) v = uniform(rng, -scale, scale);
    for (double& v : s.alpha.data()) v = uniform(rng, -scale, scale);
    return s;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.data().size(); ++k) m = std::max(m, std::abs(a.data()[k] - b.data()[k]));
    return m;
}

}  // namespace wotkit::testing

namespace wotkit::testing {

// Solver settings of the experiment runner: eps-scaling, adaptive step,
// Newton corrections and multiplier shifts.
inline SolverConfig fast_config() {
    SolverConfig c;
    c.epsilon_scaling = true;
    c.adaptive_step = true;
    c.newton_every = 10;
    c.multiplier_shift = true;
    return c;
}

struct ZooEntry {
    std::string label;
    ProblemSpec spec;
};

// Tiny instances in every mode: sizes up to 5x6 and eps in {0.05, 0.2}.
inline std::vector<ZooEntry> tiny_zoo(std::uint64_t seed = 7) {
    std::mt19937_64 rng(seed);
    std::vector<ZooEntry> out;
    const std::pair<std::size_t, std::size_t> sizes[] = {{2, 3}, {3, 4}, {4, 6}, {5, 5}};
    for (Mode m : {Mode::plain, Mode::soft, Mode::hard, Mode::penalized, Mode::soft_and_penalized}) {
        for (auto [nx, ny] : sizes) {
            for (double eps : {0.05, 0.2}) {
                out.push_back({std::string(name(m)) + " " + std::to_string(nx) + "x" + std::to_string(ny) +
                                   " eps=" + std::to_string(eps),
                               random_spec(rng, m, nx, ny, eps)});
            }
        }
    }
    return out;
}

}  // namespace wotkit::testing
