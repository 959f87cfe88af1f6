#include "wotkit/sliced.hpp"

#include <cmath>

#include "wotkit/error.hpp"

namespace wotkit {

SlicedGrid::SlicedGrid(double delta) : delta_(delta) {
    if (!(delta > 0.0) || !std::isfinite(delta)) throw DomainError("grid step must be positive");
}

std::vector<std::int64_t> SlicedGrid::cell_of(std::span<const double> point) const {
    std::vector<std::int64_t> idx(point.size());
    for (std::size_t k = 0; k < point.size(); ++k) {
        const double r = point[k] / delta_;
        const double nearest = std::round(r);
        const bool on_boundary = std::abs(r - nearest) <= 1e-12 * std::max(1.0, std::abs(r));
        idx[k] = static_cast<std::int64_t>(on_boundary ? nearest : std::floor(r));
    }
    return idx;
}

std::vector<std::size_t> cell_labels(const SlicedGrid& grid, const DiscreteMeasure& nu) {
    std::map<std::vector<std::int64_t>, std::size_t> ids;
    std::vector<std::size_t> labels(nu.size());
    for (std::size_t j = 0; j < nu.size(); ++j) {
        auto [it, inserted] = ids.emplace(grid.cell_of(nu.point(j)), ids.size());
        labels[j] = it->second;
    }
    return labels;
}

Coupling sliced_approximation(const Coupling& pi, double delta) {
    const SlicedGrid grid(delta);
    const auto& nu = pi.col_measure();
    const auto labels = cell_labels(grid, nu);
    std::size_t ncells = 0;
    for (auto l : labels) ncells = std::max(ncells, l + 1);

    std::vector<double> cell_nu(ncells, 0.0);
    for (std::size_t j = 0; j < nu.size(); ++j) cell_nu[labels[j]] += nu.weight(j);

    Matrix out(pi.rows(), pi.cols());
    std::vector<double> cell_mass(ncells);
    for (std::size_t i = 0; i < pi.rows(); ++i) {
        auto r = pi.matrix().row(i);
        std::fill(cell_mass.begin(), cell_mass.end(), 0.0);
        for (std::size_t j = 0; j < pi.cols(); ++j) cell_mass[labels[j]] += r[j];
        auto o = out.row(i);
        for (std::size_t j = 0; j < pi.cols(); ++j) {
            const double cn = cell_nu[labels[j]];
            o[j] = cn > 0.0 ? cell_mass[labels[j]] * nu.weight(j) / cn : 0.0;
        }
    }
    return Coupling(pi.row_measure(), nu, std::move(out));
}

double sliced_entropy_bound(double delta, int dim, double diam_inf) {
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("sliced entropy bound needs delta in (0, 1)");
    if (dim < 1) throw DomainError("dimension must be positive");
    if (!(diam_inf >= 0.0)) throw DomainError("diameter must be nonnegative");
    return -dim * std::log(delta) + dim * std::log(diam_inf + 1.0);
}

}  // namespace wotkit
