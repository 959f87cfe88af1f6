#include "wotkit/model.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "wotkit/error.hpp"

namespace wotkit {

Penalty Penalty::quadratic(double scale) {
    if (!(scale > 0.0) || !std::isfinite(scale)) {
        throw InvalidArgument("quadratic penalty scale must be positive");
    }
    Penalty p;
    p.quadratic_ = true;
    p.scale_ = scale;
    return p;
}

Penalty Penalty::custom(Callbacks callbacks) {
    if (!callbacks.value || !callbacks.conjugate || !callbacks.gradient ||
        !callbacks.conjugate_gradient) {
        throw InvalidArgument("custom penalty needs value, conjugate and both gradients");
    }
    Penalty p;
    p.callbacks_ = std::move(callbacks);
    return p;
}

double Penalty::value(std::span<const double> u) const {
    if (!quadratic_) return callbacks_.value(u);
    double s = 0.0;
    for (double v : u) s += v * v;
    return scale_ * s;
}

double Penalty::conjugate(std::span<const double> p) const {
    if (!quadratic_) return callbacks_.conjugate(p);
    double s = 0.0;
    for (double v : p) s += v * v;
    return s / (4.0 * scale_);
}

void Penalty::gradient(std::span<const double> u, std::span<double> out) const {
    if (!quadratic_) return callbacks_.gradient(u, out);
    for (std::size_t k = 0; k < u.size(); ++k) out[k] = 2.0 * scale_ * u[k];
}

void Penalty::conjugate_gradient(std::span<const double> p, std::span<double> out) const {
    if (!quadratic_) return callbacks_.conjugate_gradient(p, out);
    for (std::size_t k = 0; k < p.size(); ++k) out[k] = p[k] / (2.0 * scale_);
}

double Penalty::conjugate_gradient_lipschitz() const {
    return quadratic_ ? 1.0 / (2.0 * scale_) : callbacks_.conjugate_gradient_lipschitz;
}

std::optional<double> Penalty::growth_exponent() const {
    if (quadratic_) return 1.0;
    return std::nullopt;
}

void ProblemSpec::validate() const {
    const std::size_t nx = mu.size(), ny = nu.size();
    if (nx == 0 || ny == 0) throw InvalidArgument("problem measures must be nonempty");
    if (cost.rows() != nx || cost.cols() != ny) {
        throw InvalidArgument("cost matrix is " + std::to_string(cost.rows()) + "x" +
                              std::to_string(cost.cols()) + ", expected " +
                              std::to_string(nx) + "x" + std::to_string(ny));
    }
    for (double c : cost.data()) {
        if (!std::isfinite(c)) throw InvalidArgument("cost entries must be finite");
    }
    auto check_tensor = [&](const Tensor3& t, const char* name) {
        if (t.depth() == 0) return;
        if (t.rows() != nx || t.cols() != ny) {
            throw InvalidArgument(std::string("moment tensor ") + name + " has wrong shape");
        }
        for (double v : t.data()) {
            if (!std::isfinite(v)) {
                throw InvalidArgument(std::string("moment tensor ") + name + " has non-finite entries");
            }
        }
    };
    check_tensor(f, "f");
    check_tensor(g, "g");
    if (f.depth() > 0 && !theta) throw InvalidArgument("soft moments f given without penalty theta");
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw InvalidArgument("epsilon must be positive");
    if (zeta) {
        if (!(*zeta > 0.0) || !std::isfinite(*zeta)) throw InvalidArgument("zeta must be positive");
        if (!theta_tilde) throw InvalidArgument("zeta given without penalty theta_tilde");
    }
}

Matrix cost_from(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                 const std::function<double(std::span<const double>, std::span<const double>)>& c) {
    Matrix m(mu.size(), nu.size());
    for (std::size_t i = 0; i < mu.size(); ++i) {
        for (std::size_t j = 0; j < nu.size(); ++j) m(i, j) = c(mu.point(i), nu.point(j));
    }
    return m;
}

Matrix squared_distance_cost(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    if (mu.dim() != nu.dim()) throw DimensionError("cost between measures of different dimension");
    return cost_from(mu, nu, [](std::span<const double> x, std::span<const double> y) {
        double s = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) s += (y[k] - x[k]) * (y[k] - x[k]);
        return s;
    });
}

Tensor3 displacement_tensor(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    if (mu.dim() != nu.dim()) throw DimensionError("displacement between measures of different dimension");
    const std::size_t d = mu.dim();
    Tensor3 t(mu.size(), nu.size(), d);
    for (std::size_t i = 0; i < mu.size(); ++i) {
        auto x = mu.point(i);
        for (std::size_t j = 0; j < nu.size(); ++j) {
            auto y = nu.point(j);
            for (std::size_t k = 0; k < d; ++k) t(i, j, k) = y[k] - x[k];
        }
    }
    return t;
}

Tensor3 empty_tensor(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    return Tensor3(mu.size(), nu.size(), 0);
}

std::vector<double> conditional_moment(const Coupling& pi, const Tensor3& t, std::size_t row) {
    if (t.depth() > 0 && (t.rows() != pi.rows() || t.cols() != pi.cols())) {
        throw InvalidArgument("moment tensor shape does not match coupling");
    }
    if (row >= pi.rows()) throw InvalidArgument("row index out of range");
    const double mu_i = pi.row_measure().weight(row);
    if (!(mu_i > 0.0)) throw ZeroMassRow("row " + std::to_string(row) + " has zero mu-mass");
    std::vector<double> m(t.depth(), 0.0);
    auto r = pi.matrix().row(row);
    for (std::size_t j = 0; j < pi.cols(); ++j) {
        if (r[j] == 0.0) continue;
        auto v = t.at(row, j);
        for (std::size_t k = 0; k < m.size(); ++k) m[k] += v[k] * r[j];
    }
    for (double& v : m) v /= mu_i;
    return m;
}

PrimalValue primal_value_unchecked(const Coupling& pi, const ProblemSpec& spec) {
    if (pi.rows() != spec.rows() || pi.cols() != spec.cols()) {
        throw InvalidArgument("coupling shape does not match problem");
    }
    const auto& mu = spec.mu;
    const auto& nu = spec.nu;
    PrimalValue v;
    double ent = 0.0;
    bool infinite = false;
    for (std::size_t i = 0; i < pi.rows(); ++i) {
        auto r = pi.matrix().row(i);
        auto c = spec.cost.row(i);
        for (std::size_t j = 0; j < pi.cols(); ++j) {
            const double p = r[j];
            const double ref = mu.weight(i) * nu.weight(j);
            v.linear += c[j] * p;
            if (p > 0.0) {
                if (ref > 0.0) {
                    ent += p * std::log(p / ref) - p + ref;
                } else {
                    infinite = true;
                }
            } else {
                ent += ref;
            }
        }
    }
    for (std::size_t i = 0; i < pi.rows(); ++i) {
        if (!(mu.weight(i) > 0.0)) continue;
        if (spec.soft_dim() > 0) {
            v.soft += mu.weight(i) * spec.theta->value(conditional_moment(pi, spec.f, i));
        }
        if (spec.zeta && spec.hard_dim() > 0) {
            v.hard_penalty +=
                mu.weight(i) * spec.theta_tilde->value(conditional_moment(pi, spec.g, i)) / *spec.zeta;
        }
    }
    v.entropy = infinite ? std::numeric_limits<double>::infinity() : spec.epsilon * ent;
    v.total = v.linear + v.soft + v.hard_penalty + v.entropy;
    return v;
}

PrimalValue primal_value(const Coupling& pi, const ProblemSpec& spec, double marginal_tol) {
    if (pi.rows() != spec.rows() || pi.cols() != spec.cols()) {
        throw InvalidArgument("coupling shape does not match problem");
    }
    Coupling against(spec.mu, spec.nu, pi.matrix());
    against.check_marginals(marginal_tol);
    return primal_value_unchecked(pi, spec);
}

}  // namespace wotkit
