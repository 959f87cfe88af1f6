#include "wotkit/measures.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <utility>

#include "wotkit/error.hpp"

namespace wotkit {

namespace {

bool same_point(std::span<const double> a, std::span<const double> b) {
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (std::abs(a[k] - b[k]) > DiscreteMeasure::kMergeTolerance) return false;
    }
    return true;
}

struct Atom {
    double x;
    double w;
};

std::vector<Atom> sorted_atoms(std::span<const double> points, std::span<const double> weights) {
    std::vector<Atom> atoms;
    atoms.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (weights[i] > 0.0) atoms.push_back({points[i], weights[i]});
    }
    std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.x < b.x; });
    return atoms;
}

void require_1d(const DiscreteMeasure& p, const DiscreteMeasure& q) {
    if (p.dim() != 1 || q.dim() != 1) {
        throw DimensionError("1D distance requested for measures of dimension " +
                             std::to_string(p.dim()) + " and " + std::to_string(q.dim()));
    }
}

double w1_from_atoms(std::vector<Atom> a, std::vector<Atom> b) {
    // Integral of |F_a - F_b| over the merged breakpoints.
    std::vector<double> grid;
    grid.reserve(a.size() + b.size());
    for (const auto& t : a) grid.push_back(t.x);
    for (const auto& t : b) grid.push_back(t.x);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    double fa = 0.0, fb = 0.0, total = 0.0;
    std::size_t ia = 0, ib = 0;
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        while (ia < a.size() && a[ia].x <= grid[k]) fa += a[ia++].w;
        while (ib < b.size() && b[ib].x <= grid[k]) fb += b[ib++].w;
        total += std::abs(fa - fb) * (grid[k + 1] - grid[k]);
    }
    return total;
}

double winf_from_atoms(const std::vector<Atom>& a, const std::vector<Atom>& b) {
    // Walk the comonotone coupling level by level.
    constexpr double kNegligible = 1e-14;
    std::size_t ia = 0, ib = 0;
    double ra = a.empty() ? 0.0 : a[0].w;
    double rb = b.empty() ? 0.0 : b[0].w;
    double worst = 0.0;
    while (ia < a.size() && ib < b.size()) {
        const double step = std::min(ra, rb);
        if (step > kNegligible) worst = std::max(worst, std::abs(a[ia].x - b[ib].x));
        ra -= step;
        rb -= step;
        if (ra <= kNegligible && ++ia < a.size()) ra += a[ia].w;
        if (rb <= kNegligible && ++ib < b.size()) rb += b[ib].w;
    }
    return worst;
}

}  // namespace

DiscreteMeasure::DiscreteMeasure(std::size_t dim, std::vector<double> coords,
                                 std::vector<double> weights) {
    if (dim == 0) throw InvalidArgument("measure dimension must be positive");
    if (coords.size() != dim * weights.size()) {
        throw InvalidArgument("coordinate count does not match dim * number of weights");
    }
    if (weights.empty()) throw InvalidArgument("measure needs at least one point");
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw InvalidArgument("measure weights must be finite and nonnegative");
        }
        total += w;
    }
    if (!(total > 0.0)) throw InvalidArgument("measure weights sum to zero");
    for (double c : coords) {
        if (!std::isfinite(c)) throw InvalidArgument("measure coordinates must be finite");
    }

    dim_ = dim;
    const std::size_t n = weights.size();
    for (std::size_t i = 0; i < n; ++i) {
        std::span<const double> p{coords.data() + i * dim, dim};
        bool merged = false;
        for (std::size_t k = 0; k < weights_.size(); ++k) {
            if (same_point(point(k), p)) {
                weights_[k] += weights[i];
                merged = true;
                break;
            }
        }
        if (!merged) {
            coords_.insert(coords_.end(), p.begin(), p.end());
            weights_.push_back(weights[i]);
        }
    }
    for (double& w : weights_) w /= total;
}

DiscreteMeasure DiscreteMeasure::from_1d(std::vector<double> points, std::vector<double> weights) {
    return DiscreteMeasure(1, std::move(points), std::move(weights));
}

DiscreteMeasure DiscreteMeasure::uniform_1d(std::vector<double> points) {
    std::vector<double> w(points.size(), 1.0);
    return DiscreteMeasure(1, std::move(points), std::move(w));
}

DiscreteMeasure DiscreteMeasure::dirac(std::vector<double> point) {
    const std::size_t d = point.size();
    return DiscreteMeasure(d, std::move(point), {1.0});
}

std::vector<double> DiscreteMeasure::mean() const {
    std::vector<double> m(dim_, 0.0);
    for (std::size_t i = 0; i < size(); ++i) {
        for (std::size_t k = 0; k < dim_; ++k) m[k] += weights_[i] * coords_[i * dim_ + k];
    }
    return m;
}

double DiscreteMeasure::diameter_inf() const {
    double diam = 0.0;
    for (std::size_t k = 0; k < dim_; ++k) {
        double lo = coords_[k], hi = coords_[k];
        for (std::size_t i = 0; i < size(); ++i) {
            lo = std::min(lo, coords_[i * dim_ + k]);
            hi = std::max(hi, coords_[i * dim_ + k]);
        }
        diam = std::max(diam, hi - lo);
    }
    return diam;
}

Coupling::Coupling(DiscreteMeasure rows, DiscreteMeasure cols, Matrix mass)
    : mu_(std::move(rows)), nu_(std::move(cols)), mass_(std::move(mass)) {
    if (mass_.rows() != mu_.size() || mass_.cols() != nu_.size()) {
        throw InvalidArgument("coupling matrix shape does not match its marginals");
    }
    for (double v : mass_.data()) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw InvalidArgument("coupling entries must be finite and nonnegative");
        }
    }
}

Coupling Coupling::product(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    Matrix m(mu.size(), nu.size());
    for (std::size_t i = 0; i < mu.size(); ++i) {
        for (std::size_t j = 0; j < nu.size(); ++j) m(i, j) = mu.weight(i) * nu.weight(j);
    }
    return Coupling(mu, nu, std::move(m));
}

std::vector<double> Coupling::row_sums() const {
    std::vector<double> s(rows(), 0.0);
    for (std::size_t i = 0; i < rows(); ++i) {
        for (double v : mass_.row(i)) s[i] += v;
    }
    return s;
}

std::vector<double> Coupling::col_sums() const {
    std::vector<double> s(cols(), 0.0);
    for (std::size_t i = 0; i < rows(); ++i) {
        auto r = mass_.row(i);
        for (std::size_t j = 0; j < cols(); ++j) s[j] += r[j];
    }
    return s;
}

double Coupling::total_mass() const {
    double t = 0.0;
    for (double v : mass_.data()) t += v;
    return t;
}

double Coupling::row_residual() const {
    const auto s = row_sums();
    double r = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) r += std::abs(s[i] - mu_.weight(i));
    return r;
}

double Coupling::col_residual() const {
    const auto s = col_sums();
    double r = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j) r += std::abs(s[j] - nu_.weight(j));
    return r;
}

double Coupling::marginal_residual() const { return row_residual() + col_residual(); }

void Coupling::check_marginals(double tol) const {
    const auto rs = row_sums();
    for (std::size_t i = 0; i < rs.size(); ++i) {
        if (std::abs(rs[i] - mu_.weight(i)) > tol) {
            throw MarginalMismatch("row " + std::to_string(i) + " sum deviates from mu by " +
                                   std::to_string(std::abs(rs[i] - mu_.weight(i))));
        }
    }
    const auto cs = col_sums();
    for (std::size_t j = 0; j < cs.size(); ++j) {
        if (std::abs(cs[j] - nu_.weight(j)) > tol) {
            throw MarginalMismatch("column " + std::to_string(j) + " sum deviates from nu by " +
                                   std::to_string(std::abs(cs[j] - nu_.weight(j))));
        }
    }
}

DiscreteMeasure disintegrate(const Coupling& pi, std::size_t row) {
    if (row >= pi.rows()) throw InvalidArgument("row index out of range");
    const double mu_i = pi.row_measure().weight(row);
    if (!(mu_i > 0.0)) throw ZeroMassRow("row " + std::to_string(row) + " has zero mu-mass");
    auto r = pi.matrix().row(row);
    std::vector<double> w(r.size());
    double total = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j) {
        w[j] = r[j] / mu_i;
        total += r[j];
    }
    if (!(total > 0.0)) throw ZeroMassRow("row " + std::to_string(row) + " carries no mass");
    const auto& nu = pi.col_measure();
    return DiscreteMeasure(nu.dim(), nu.coords(), std::move(w));
}

EntropyValue relative_entropy(const Coupling& pi) {
    const auto& mu = pi.row_measure();
    const auto& nu = pi.col_measure();
    EntropyValue h;
    for (std::size_t i = 0; i < pi.rows(); ++i) {
        auto r = pi.matrix().row(i);
        for (std::size_t j = 0; j < pi.cols(); ++j) {
            const double p = r[j];
            if (p <= 0.0) continue;
            const double ref = mu.weight(i) * nu.weight(j);
            if (ref <= 0.0) {
                h.infinite = true;
                continue;
            }
            h.value += p * std::log(p / ref);
        }
    }
    if (h.value < 0.0) h.value = 0.0;  // round-off when pi == mu x nu
    return h;
}

double w1_distance_1d(const DiscreteMeasure& p, const DiscreteMeasure& q) {
    require_1d(p, q);
    return w1_from_atoms(sorted_atoms(p.coords(), p.weights()),
                         sorted_atoms(q.coords(), q.weights()));
}

double w_infinity_distance_1d(const DiscreteMeasure& p, const DiscreteMeasure& q) {
    require_1d(p, q);
    return winf_from_atoms(sorted_atoms(p.coords(), p.weights()),
                           sorted_atoms(q.coords(), q.weights()));
}

double w1_distance_1d(std::span<const double> points, std::span<const double> p,
                      std::span<const double> q) {
    if (p.size() != points.size() || q.size() != points.size()) {
        throw InvalidArgument("weight vectors must match the support size");
    }
    return w1_from_atoms(sorted_atoms(points, p), sorted_atoms(points, q));
}

double w_infinity_distance_1d(std::span<const double> points, std::span<const double> p,
                              std::span<const double> q) {
    if (p.size() != points.size() || q.size() != points.size()) {
        throw InvalidArgument("weight vectors must match the support size");
    }
    return winf_from_atoms(sorted_atoms(points, p), sorted_atoms(points, q));
}

DiscreteMeasure read_measure_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("measure CSV is empty (header line required)");
    std::size_t header_cols = std::count(line.begin(), line.end(), ',') + 1;
    if (header_cols < 2) throw ParseError("measure CSV header needs at least 2 columns");
    const std::size_t dim = header_cols - 1;

    std::vector<double> coords, weights;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                vals.push_back(std::stod(cell, &used));
            } catch (const std::exception&) {
                throw ParseError("line " + std::to_string(lineno) + ": not a number: '" + cell + "'");
            }
        }
        if (vals.size() != header_cols) {
            throw ParseError("line " + std::to_string(lineno) + ": expected " +
                             std::to_string(header_cols) + " columns");
        }
        coords.insert(coords.end(), vals.begin(), vals.end() - 1);
        weights.push_back(vals.back());
    }
    return DiscreteMeasure(dim, std::move(coords), std::move(weights));
}

DiscreteMeasure load_measure_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    return read_measure_csv(in);
}

void write_measure_csv(std::ostream& out, const DiscreteMeasure& m) {
    for (std::size_t k = 0; k < m.dim(); ++k) out << "x" << k << ',';
    out << "weight\n";
    out.precision(17);
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (double c : m.point(i)) out << c << ',';
        out << m.weight(i) << '\n';
    }
}

}  // namespace wotkit
