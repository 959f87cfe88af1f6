#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "wotkit/measures.hpp"

namespace wotkit {

/// Axis-aligned grid of half-open cells delta * [k, k + 1) anchored at the
/// origin.
class SlicedGrid {
public:
    explicit SlicedGrid(double delta);

    double delta() const { return delta_; }
    /// floor(coordinate / delta) per axis; points within round-off of a cell
    /// boundary are snapped to the cell above it.
    std::vector<std::int64_t> cell_of(std::span<const double> point) const;

private:
    double delta_;
};

/// Cell id of every column-measure point, numbered in order of first
/// appearance.
std::vector<std::size_t> cell_labels(const SlicedGrid& grid, const DiscreteMeasure& nu);

/// Within each grid cell, redistribute every row's mass over the nu-points of
/// the cell proportionally to their nu-weights.
Coupling sliced_approximation(const Coupling& pi, double delta);

/// -d ln(delta) + d ln(diam_inf + 1), for delta in (0, 1).
double sliced_entropy_bound(double delta, int dim, double diam_inf);

}  // namespace wotkit
