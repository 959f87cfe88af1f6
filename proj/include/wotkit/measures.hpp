#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "wotkit/matrix.hpp"

namespace wotkit {

/// Finitely supported probability measure on R^d.
///
/// Weights are renormalized at construction and points closer than
/// `kMergeTolerance` in every coordinate are merged (weights summed, first
/// occurrence kept), so the support is always a set of distinct points.
class DiscreteMeasure {
public:
    static constexpr double kMergeTolerance = 1e-12;

    DiscreteMeasure() = default;
    /// `coords` is row-major: point i occupies coords[i*dim, (i+1)*dim).
    DiscreteMeasure(std::size_t dim, std::vector<double> coords, std::vector<double> weights);

    static DiscreteMeasure from_1d(std::vector<double> points, std::vector<double> weights);
    static DiscreteMeasure uniform_1d(std::vector<double> points);
    static DiscreteMeasure dirac(std::vector<double> point);

    std::size_t size() const { return weights_.size(); }
    std::size_t dim() const { return dim_; }

    std::span<const double> point(std::size_t i) const {
        return {coords_.data() + i * dim_, dim_};
    }
    /// Coordinate of point i in dimension one.
    double x(std::size_t i) const { return coords_[i * dim_]; }
    double weight(std::size_t i) const { return weights_[i]; }

    const std::vector<double>& coords() const { return coords_; }
    const std::vector<double>& weights() const { return weights_; }

    /// Mean of the measure (a d-vector).
    std::vector<double> mean() const;
    /// max over pairs of support points of the sup-norm distance.
    double diameter_inf() const;

    bool operator==(const DiscreteMeasure&) const = default;

private:
    std::size_t dim_ = 0;
    std::vector<double> coords_;
    std::vector<double> weights_;
};

/// Result of an entropy evaluation. `infinite` is set when the plan charges a
/// cell where the reference measure vanishes.
struct EntropyValue {
    double value = 0.0;
    bool infinite = false;

    double get() const { return infinite ? std::numeric_limits<double>::infinity() : value; }
};

/// Joint mass matrix between two discrete measures. Rows index the first
/// marginal, columns the second. Marginal agreement is not enforced at
/// construction because solver iterates are only approximately feasible;
/// use `marginal_residual` or `check_marginals`.
class Coupling {
public:
    Coupling() = default;
    Coupling(DiscreteMeasure rows, DiscreteMeasure cols, Matrix mass);

    static Coupling product(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

    const DiscreteMeasure& row_measure() const { return mu_; }
    const DiscreteMeasure& col_measure() const { return nu_; }
    const Matrix& matrix() const { return mass_; }
    std::size_t rows() const { return mass_.rows(); }
    std::size_t cols() const { return mass_.cols(); }
    double operator()(std::size_t i, std::size_t j) const { return mass_(i, j); }

    std::vector<double> row_sums() const;
    std::vector<double> col_sums() const;
    double total_mass() const;

    /// Sum of absolute deviations of the row sums from mu and the column sums
    /// from nu.
    double marginal_residual() const;
    double row_residual() const;
    double col_residual() const;
    /// Throws MarginalMismatch if any row or column sum is off by more than tol.
    void check_marginals(double tol) const;

private:
    DiscreteMeasure mu_;
    DiscreteMeasure nu_;
    Matrix mass_;
};

/// Conditional law of y given x = x_i: row i divided by mu_i, supported on the
/// column measure points (zero-mass points are kept so indices line up with
/// the coupling columns). Throws ZeroMassRow when mu_i or the row mass
/// vanishes.
DiscreteMeasure disintegrate(const Coupling& pi, std::size_t row);

/// H(pi | mu x nu) with 0 ln 0 = 0.
EntropyValue relative_entropy(const Coupling& pi);

double w1_distance_1d(const DiscreteMeasure& p, const DiscreteMeasure& q);
double w_infinity_distance_1d(const DiscreteMeasure& p, const DiscreteMeasure& q);

/// Same distances for two weight vectors over one shared, arbitrary-order
/// support of 1D points. Used for conditionals of one coupling.
double w1_distance_1d(std::span<const double> points, std::span<const double> p,
                      std::span<const double> q);
double w_infinity_distance_1d(std::span<const double> points, std::span<const double> p,
                              std::span<const double> q);

/// CSV with a header line; each row holds the d coordinates then the weight.
DiscreteMeasure read_measure_csv(std::istream& in);
DiscreteMeasure load_measure_csv(const std::string& path);
void write_measure_csv(std::ostream& out, const DiscreteMeasure& m);

}  // namespace wotkit
