#pragma once

// Time grids, piecewise-constant controls, sampled trajectories and the
// distances used to monitor convergence of states along horizon sweeps.

#include "horizonlab/types.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace horizonlab {

/// Strictly increasing sequence of times starting at 0 with at least two nodes.
class TimeGrid {
public:
  explicit TimeGrid(std::vector<double> nodes);

  /// n+1 equispaced nodes on [0, T].
  static TimeGrid uniform(double T, std::size_t intervals);

  const std::vector<double>& nodes() const noexcept { return nodes_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  double operator[](std::size_t i) const { return nodes_[i]; }
  double back() const { return nodes_.back(); }

  /// Index of the last node <= t (clamped to [0, size-2]).
  std::size_t locate(double t) const;

private:
  std::vector<double> nodes_;
};

/// Step function sum_j u_j 1_[tau_{j-1}, tau_j) on [0, tau_N), extended by a
/// constant tail value on [tau_N, inf). Intervals are half-open on the right;
/// empty intervals are allowed and never selected by evaluation.
class PiecewiseControl {
public:
  PiecewiseControl(std::vector<double> breakpoints, std::vector<Vec> values, Vec tail);

  static PiecewiseControl constant(const Vec& value);
  static PiecewiseControl constant(double value);
  /// Scalar control with equal-length intervals on [0, T] and the given tail.
  static PiecewiseControl uniform(double T, std::span<const double> values, double tail);

  Eigen::Index dim() const noexcept { return tail_.size(); }
  std::size_t intervals() const noexcept { return values_.size(); }
  const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
  const std::vector<Vec>& values() const noexcept { return values_; }
  const Vec& tail() const noexcept { return tail_; }
  double end() const noexcept { return breakpoints_.back(); }

  /// Right-continuous evaluation u(t).
  Vec eval(double t) const;
  /// Left limit u(t-); equals eval(t) away from breakpoints. eval_left(0) = eval(0).
  Vec eval_left(double t) const;
  double eval_scalar(double t) const { return eval(t)(0); }

  /// Breakpoints strictly inside (a, b), sorted, without duplicates.
  std::vector<double> jumps_in(double a, double b) const;

  /// Same control on [0, t_cut], then `tail_control` shifted to start at t_cut.
  PiecewiseControl splice(double t_cut, const PiecewiseControl& tail_control) const;

private:
  std::vector<double> breakpoints_;
  std::vector<Vec> values_;
  Vec tail_;
};

/// Sampled solution on a grid. `states` holds one column per node. When the
/// solution escaped (blow-up) the grid stops at `escape_time`.
struct Trajectory {
  TimeGrid grid;
  Mat states;
  std::optional<double> escape_time;
  /// Node indices where the control jumps (the vector field may be
  /// discontinuous there). Always sorted.
  std::vector<std::size_t> breaks;

  Eigen::Index dim() const noexcept { return states.rows(); }
  std::size_t size() const noexcept { return grid.size(); }
  double t(std::size_t i) const { return grid[i]; }
  Vec x(std::size_t i) const { return states.col(static_cast<Eigen::Index>(i)); }
  double end() const { return grid.back(); }
  bool escaped() const noexcept { return escape_time.has_value(); }

  /// Linear interpolation between nodes.
  Vec at(double t) const;
};

struct ConvergenceReport {
  std::vector<int> indices;
  std::vector<double> gaps;
  bool monotone_decreasing = false;
  std::optional<double> extrapolated_limit;
};

/// Builds a report and sets `monotone_decreasing` (strict decrease) from `gaps`.
ConvergenceReport make_convergence_report(std::vector<int> indices, std::vector<double> gaps,
                                          std::optional<double> limit = std::nullopt);

/// max over the union grid in [0, T] of |x(t) - y(t)| (Euclidean).
double sup_distance(const Trajectory& x, const Trajectory& y, double T);

/// W^{order,p}(0,T) norm of the sampled trajectory. p = +inf gives grid maxima.
double sobolev_seminorm(const Trajectory& x, double T, int order, double p);

/// Truncated metric sup_k 2^{-k} r_k / (1 + r_k) with r_k = ||x - y||_{T_k},
/// k counted from 0. The discarded tail k > K contributes less than 2^{-K-1}.
double lf_metric(const Trajectory& x, const Trajectory& y, std::span<const double> defining_times,
                 int order = 0, double p = kInf);

/// Central differences at interior nodes, one-sided at the ends and next to
/// control jumps.
Mat finite_difference_derivative(const Trajectory& x);

} // namespace horizonlab
