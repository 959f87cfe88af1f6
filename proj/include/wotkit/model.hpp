#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "wotkit/matrix.hpp"
#include "wotkit/measures.hpp"

namespace wotkit {

/// Convex penalty on R^m together with its Legendre conjugate.
///
/// The quadratic kind is theta(u) = s |u|^2, theta*(p) = |p|^2 / (4 s).
/// Custom penalties supply all four callbacks; the conjugate pair must be
/// consistent (theta** = theta) for duality gaps to be meaningful.
class Penalty {
public:
    using ScalarFn = std::function<double(std::span<const double>)>;
    using VectorFn = std::function<void(std::span<const double>, std::span<double>)>;

    struct Callbacks {
        ScalarFn value;
        ScalarFn conjugate;
        VectorFn gradient;
        VectorFn conjugate_gradient;
        /// Lipschitz constant of the conjugate gradient, 0 if unknown.
        double conjugate_gradient_lipschitz = 0.0;
    };

    static Penalty quadratic(double scale);
    static Penalty custom(Callbacks callbacks);

    bool is_quadratic() const { return quadratic_; }
    double scale() const { return scale_; }

    double value(std::span<const double> u) const;
    double conjugate(std::span<const double> p) const;
    void gradient(std::span<const double> u, std::span<double> out) const;
    void conjugate_gradient(std::span<const double> p, std::span<double> out) const;
    double conjugate_gradient_lipschitz() const;

    /// Exponent a in theta(u) >= c |u|^(1+a), when known. Quadratic: a = 1.
    std::optional<double> growth_exponent() const;

private:
    Penalty() = default;

    bool quadratic_ = false;
    double scale_ = 0.0;
    Callbacks callbacks_;
};

/// A weak OT problem with linear weak cost, soft moment constraints through
/// `theta(int f d pi_x)` and hard moment constraints `int g d pi_x = 0`.
/// Setting `zeta` replaces the hard constraint by the penalty
/// (1/zeta) theta_tilde(int g d pi_x).
struct ProblemSpec {
    DiscreteMeasure mu;
    DiscreteMeasure nu;
    Matrix cost;
    Tensor3 f;  // soft moments, depth M (0 when absent)
    Tensor3 g;  // hard moments, depth N (0 when absent)
    std::optional<Penalty> theta;
    std::optional<Penalty> theta_tilde;
    double epsilon = 1e-2;
    std::optional<double> zeta;

    std::size_t rows() const { return mu.size(); }
    std::size_t cols() const { return nu.size(); }
    std::size_t soft_dim() const { return f.depth(); }
    std::size_t hard_dim() const { return g.depth(); }
    bool penalized() const { return zeta.has_value(); }

    /// Throws InvalidArgument describing the first inconsistency found.
    void validate() const;
};

Matrix squared_distance_cost(const DiscreteMeasure& mu, const DiscreteMeasure& nu);
Matrix cost_from(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                 const std::function<double(std::span<const double>, std::span<const double>)>& c);

/// t(x, y) = y - x, the martingale tensor (depth = dim).
Tensor3 displacement_tensor(const DiscreteMeasure& mu, const DiscreteMeasure& nu);
inline Tensor3 martingale_tensor(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    return displacement_tensor(mu, nu);
}
inline Tensor3 barycentric_tensor(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    return displacement_tensor(mu, nu);
}
Tensor3 empty_tensor(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// sum_j t[i][j] pi_ij / mu_i. Throws ZeroMassRow when mu_i = 0.
std::vector<double> conditional_moment(const Coupling& pi, const Tensor3& t, std::size_t row);

struct PrimalValue {
    double linear = 0.0;
    double soft = 0.0;
    double hard_penalty = 0.0;
    double entropy = 0.0;
    double total = 0.0;
};

/// Primal objective of a coupling. Marginals must match within
/// `marginal_tol` (MarginalMismatch otherwise).
PrimalValue primal_value(const Coupling& pi, const ProblemSpec& spec, double marginal_tol = 1e-8);

/// Same objective without the marginal check, for approximately feasible
/// iterates. The entropy term uses the unnormalized form
/// eps * sum(pi ln(pi / mu nu) - pi + mu nu), which equals eps * H(pi | mu x nu)
/// whenever pi has unit mass.
PrimalValue primal_value_unchecked(const Coupling& pi, const ProblemSpec& spec);

}  // namespace wotkit
