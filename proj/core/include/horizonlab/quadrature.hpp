#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace horizonlab {

/// Composite Simpson rule on a (possibly non-uniform) grid for an integrand
/// that is smooth on [t.front(), t.back()]. Pairs of panels use the quadratic
/// through three nodes; an odd leftover panel is integrated with the quadratic
/// through the last three nodes. Exact for quadratics.
double simpson(std::span<const double> t, std::span<const double> f);

/// Cumulative version: out[i] = integral from t[0] to t[i].
std::vector<double> cumulative_simpson(std::span<const double> t, std::span<const double> f);

/// Node-index boundaries of the smooth segments of a grid with `nodes` nodes
/// and discontinuities at `breaks`: {0, breaks..., nodes-1} with duplicates and
/// out-of-range entries removed.
std::vector<std::size_t> segment_bounds(std::size_t nodes, std::span<const std::size_t> breaks);

} // namespace horizonlab
