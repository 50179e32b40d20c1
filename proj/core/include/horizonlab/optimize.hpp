#pragma once

// Derivative-free scalar minimization used by the parametric solvers.
// Objectives may return +inf to mark infeasible points.

#include <cstddef>
#include <functional>

namespace horizonlab {

using ScalarObjective = std::function<double(double)>;

struct ScalarMinimum {
  double x = 0.0;
  double value = 0.0;
  std::size_t evaluations = 0;
};

/// Golden-section search on [a, b] until the bracket is shorter than `xtol`.
/// Returns the best point evaluated (never a point with a larger value than
/// the bracket ends it saw).
ScalarMinimum golden_section(const ScalarObjective& f, double a, double b, double xtol, std::size_t max_iter = 200);

struct GridSearchOptions {
  std::size_t coarse_points = 64;  ///< grid points including both ends
  double xtol = 1e-10;             ///< golden-section bracket tolerance
};

/// Coarse uniform grid on [a, b] (endpoints included) followed by
/// golden-section refinement inside the neighbouring cells of the best grid
/// point. The result is never worse than the best grid point; ties go to the
/// smallest x.
ScalarMinimum grid_then_golden(const ScalarObjective& f, double a, double b, const GridSearchOptions& opt);

/// Bisection for the boundary of a monotone predicate on [a, b]:
/// assumes pred(b) is true; returns the smallest x (to `xtol`) with pred(x) true.
double bisect_predicate(const std::function<bool(double)>& pred, double a, double b, double xtol);

/// Root of a continuous function with f(a) f(b) <= 0 by bisection to `xtol`.
double bisect_root(const ScalarObjective& f, double a, double b, double xtol);

} // namespace horizonlab
