#include "wotkit/dual.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wotkit {

namespace {

void require_shape(const DualState& s, const ProblemSpec& spec) {
    if (s.phi.size() != spec.rows() || s.psi.size() != spec.cols() ||
        s.lambda.rows() != spec.rows() || s.lambda.cols() != spec.soft_dim() ||
        s.alpha.rows() != spec.rows() || s.alpha.cols() != spec.hard_dim()) {
        throw InvalidArgument("dual state shape does not match problem");
    }
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

// (theta_tilde / zeta)* evaluated at alpha_i.
double penalized_conjugate(const ProblemSpec& spec, std::span<const double> a) {
    const double z = *spec.zeta;
    std::vector<double> scaled(a.begin(), a.end());
    for (double& v : scaled) v *= z;
    return spec.theta_tilde->conjugate(scaled) / z;
}

}  // namespace

DualState DualState::zeros(const ProblemSpec& spec) {
    DualState s;
    s.phi.assign(spec.rows(), 0.0);
    s.psi.assign(spec.cols(), 0.0);
    s.lambda = Matrix(spec.rows(), spec.soft_dim());
    s.alpha = Matrix(spec.rows(), spec.hard_dim());
    return s;
}

void DualState::gauge_fix(const DiscreteMeasure& mu) {
    double a = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) a += mu.weight(i) * phi[i];
    for (double& v : phi) v -= a;
    for (double& v : psi) v += a;
}

Matrix shadow_cost(const DualState& state, const ProblemSpec& spec) {
    require_shape(state, spec);
    Matrix out(spec.rows(), spec.cols());
    const bool has_f = spec.soft_dim() > 0;
    const bool has_g = spec.hard_dim() > 0;
    for (std::size_t i = 0; i < spec.rows(); ++i) {
        for (std::size_t j = 0; j < spec.cols(); ++j) {
            double v = spec.cost(i, j);
            if (has_f) v += dot(state.lambda.row(i), spec.f.at(i, j));
            if (has_g) v += dot(state.alpha.row(i), spec.g.at(i, j));
            out(i, j) = v - state.phi[i] - state.psi[j];
        }
    }
    return out;
}

double softmin(std::span<const double> values, std::span<const double> weights, double epsilon) {
    if (values.size() != weights.size()) throw InvalidArgument("softmin: size mismatch");
    if (!(epsilon > 0.0)) throw InvalidArgument("softmin: epsilon must be positive");
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (weights[k] > 0.0) lo = std::min(lo, values[k]);
    }
    if (!std::isfinite(lo)) throw InvalidArgument("softmin: no finite value with positive weight");
    double s = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (weights[k] > 0.0) s += weights[k] * std::exp(-(values[k] - lo) / epsilon);
    }
    return lo - epsilon * std::log(s);
}

Coupling gibbs_plan(const DualState& state, const ProblemSpec& spec) {
    const Matrix lam = shadow_cost(state, spec);
    const double eps = spec.epsilon;
    Matrix plan(spec.rows(), spec.cols());
    for (std::size_t i = 0; i < spec.rows(); ++i) {
        const double mi = spec.mu.weight(i);
        for (std::size_t j = 0; j < spec.cols(); ++j) {
            const double nj = spec.nu.weight(j);
            if (mi == 0.0 || nj == 0.0) continue;
            // log-domain entry; exponentiated once for output
            const double log_p = std::log(mi) + std::log(nj) - lam(i, j) / eps;
            if (log_p > 700.0) {
                throw Overflow("Gibbs plan entry (" + std::to_string(i) + ", " + std::to_string(j) +
                               ") overflows: exponent " + std::to_string(log_p));
            }
            plan(i, j) = std::exp(log_p);
        }
    }
    return Coupling(spec.mu, spec.nu, std::move(plan));
}

double dual_value(const DualState& state, const ProblemSpec& spec) {
    const Matrix lam = shadow_cost(state, spec);
    const double eps = spec.epsilon;
    double value = 0.0;
    for (std::size_t i = 0; i < spec.rows(); ++i) value += spec.mu.weight(i) * state.phi[i];
    for (std::size_t j = 0; j < spec.cols(); ++j) value += spec.nu.weight(j) * state.psi[j];
    for (std::size_t i = 0; i < spec.rows(); ++i) {
        const double mi = spec.mu.weight(i);
        if (spec.soft_dim() > 0) value -= mi * spec.theta->conjugate(state.lambda.row(i));
        if (spec.penalized() && spec.hard_dim() > 0) {
            value -= mi * penalized_conjugate(spec, state.alpha.row(i));
        }
        double row = 0.0;
        for (std::size_t j = 0; j < spec.cols(); ++j) {
            row += spec.nu.weight(j) * std::exp(-lam(i, j) / eps);
        }
        value -= eps * mi * row;
    }
    return value + eps;
}

DualState dual_gradient(const DualState& state, const ProblemSpec& spec) {
    const Matrix lam = shadow_cost(state, spec);
    const double eps = spec.epsilon;
    const std::size_t M = spec.soft_dim(), N = spec.hard_dim();
    DualState grad = DualState::zeros(spec);
    std::vector<double> tmp(std::max(M, N));
    for (std::size_t i = 0; i < spec.rows(); ++i) {
        const double mi = spec.mu.weight(i);
        double row_mass = 0.0;
        for (std::size_t j = 0; j < spec.cols(); ++j) {
            const double p = mi * spec.nu.weight(j) * std::exp(-lam(i, j) / eps);
            row_mass += p;
            grad.psi[j] -= p;
            for (std::size_t k = 0; k < M; ++k) grad.lambda(i, k) += p * spec.f(i, j, k);
            for (std::size_t k = 0; k < N; ++k) grad.alpha(i, k) += p * spec.g(i, j, k);
        }
        grad.phi[i] = mi - row_mass;
        if (M > 0) {
            std::span<double> out{tmp.data(), M};
            spec.theta->conjugate_gradient(state.lambda.row(i), out);
            for (std::size_t k = 0; k < M; ++k) grad.lambda(i, k) -= mi * out[k];
        }
        if (N > 0 && spec.penalized()) {
            const double z = *spec.zeta;
            std::vector<double> scaled(state.alpha.row(i).begin(), state.alpha.row(i).end());
            for (double& v : scaled) v *= z;
            std::span<double> out{tmp.data(), N};
            spec.theta_tilde->conjugate_gradient(scaled, out);
            for (std::size_t k = 0; k < N; ++k) grad.alpha(i, k) -= mi * out[k];
        }
    }
    for (std::size_t j = 0; j < spec.cols(); ++j) grad.psi[j] += spec.nu.weight(j);
    return grad;
}

}  // namespace wotkit
