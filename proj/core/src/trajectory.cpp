#include "horizonlab/trajectory.hpp"

#include "horizonlab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace horizonlab {

// ---- TimeGrid -------------------------------------------------------------

TimeGrid::TimeGrid(std::vector<double> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.size() < 2) throw ConfigError("time grid needs at least two nodes");
  if (nodes_.front() != 0.0) throw ConfigError("time grid must start at 0");
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    if (!(nodes_[i] > nodes_[i - 1])) {
      std::ostringstream os;
      os << "time grid not strictly increasing at node " << i;
      throw ConfigError(os.str());
    }
  }
}

TimeGrid TimeGrid::uniform(double T, std::size_t intervals) {
  if (!(T > 0.0) || intervals == 0) throw ConfigError("uniform grid needs T > 0 and intervals >= 1");
  std::vector<double> n(intervals + 1);
  for (std::size_t i = 0; i <= intervals; ++i) n[i] = T * static_cast<double>(i) / static_cast<double>(intervals);
  n.back() = T;
  return TimeGrid(std::move(n));
}

std::size_t TimeGrid::locate(double t) const {
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
  std::size_t i = it == nodes_.begin() ? 0 : static_cast<std::size_t>(it - nodes_.begin()) - 1;
  return std::min(i, nodes_.size() - 2);
}

// ---- PiecewiseControl -----------------------------------------------------

PiecewiseControl::PiecewiseControl(std::vector<double> breakpoints, std::vector<Vec> values, Vec tail)
    : breakpoints_(std::move(breakpoints)), values_(std::move(values)), tail_(std::move(tail)) {
  if (breakpoints_.empty()) throw ConfigError("control needs at least one breakpoint (tau_0 = 0)");
  if (breakpoints_.front() != 0.0) throw ConfigError("first control breakpoint must be 0");
  if (values_.size() + 1 != breakpoints_.size())
    throw ConfigError("control has " + std::to_string(values_.size()) + " values for " +
                      std::to_string(breakpoints_.size()) + " breakpoints");
  for (std::size_t i = 1; i < breakpoints_.size(); ++i) {
    if (!(breakpoints_[i] >= breakpoints_[i - 1]) || !std::isfinite(breakpoints_[i]))
      throw ConfigError("control breakpoints must be finite and nondecreasing");
  }
  if (tail_.size() == 0) throw ConfigError("control dimension must be positive");
  for (const auto& v : values_) {
    if (v.size() != tail_.size()) throw ConfigError("control values have inconsistent dimension");
  }
}

PiecewiseControl PiecewiseControl::constant(const Vec& value) {
  return PiecewiseControl({0.0}, {}, value);
}

PiecewiseControl PiecewiseControl::constant(double value) {
  return constant(Vec::Constant(1, value));
}

PiecewiseControl PiecewiseControl::uniform(double T, std::span<const double> values, double tail) {
  const std::size_t n = values.size();
  std::vector<double> bp(n + 1);
  std::vector<Vec> v(n);
  for (std::size_t j = 0; j <= n; ++j) bp[j] = T * static_cast<double>(j) / static_cast<double>(n);
  bp.back() = T;
  for (std::size_t j = 0; j < n; ++j) v[j] = Vec::Constant(1, values[j]);
  return PiecewiseControl(std::move(bp), std::move(v), Vec::Constant(1, tail));
}

Vec PiecewiseControl::eval(double t) const {
  if (t >= breakpoints_.back()) return tail_;
  // first breakpoint strictly greater than t closes the active interval
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
  const auto j = static_cast<std::size_t>(it - breakpoints_.begin());
  return values_[j - 1];
}

Vec PiecewiseControl::eval_left(double t) const {
  if (t <= 0.0) return eval(0.0);
  if (t > breakpoints_.back()) return tail_;
  // last interval [tau_{j-1}, tau_j) with tau_{j-1} < t
  auto it = std::lower_bound(breakpoints_.begin(), breakpoints_.end(), t);
  const auto j = static_cast<std::size_t>(it - breakpoints_.begin());
  return values_[j - 1];
}

std::vector<double> PiecewiseControl::jumps_in(double a, double b) const {
  std::vector<double> out;
  for (double tau : breakpoints_) {
    if (tau > a && tau < b && (out.empty() || out.back() != tau)) out.push_back(tau);
  }
  return out;
}

PiecewiseControl PiecewiseControl::splice(double t_cut, const PiecewiseControl& tail_control) const {
  if (tail_control.dim() != dim()) throw ConfigError("splice: dimension mismatch");
  std::vector<double> bp{0.0};
  std::vector<Vec> vals;
  for (std::size_t j = 0; j < values_.size(); ++j) {
    const double a = breakpoints_[j];
    const double b = std::min(breakpoints_[j + 1], t_cut);
    if (a >= t_cut) break;
    if (b > a) {
      vals.push_back(values_[j]);
      bp.push_back(b);
    }
  }
  if (bp.back() < t_cut) {
    vals.push_back(tail_);
    bp.push_back(t_cut);
  }
  const auto& tb = tail_control.breakpoints();
  for (std::size_t j = 0; j < tail_control.values().size(); ++j) {
    if (tb[j + 1] > tb[j]) {
      vals.push_back(tail_control.values()[j]);
      bp.push_back(t_cut + tb[j + 1]);
    }
  }
  return PiecewiseControl(std::move(bp), std::move(vals), tail_control.tail());
}

// ---- Trajectory -----------------------------------------------------------

Vec Trajectory::at(double t) const {
  if (t <= grid[0]) return x(0);
  if (t >= grid.back()) return x(size() - 1);
  const std::size_t i = grid.locate(t);
  const double w = (t - grid[i]) / (grid[i + 1] - grid[i]);
  return (1.0 - w) * states.col(static_cast<Eigen::Index>(i)) +
         w * states.col(static_cast<Eigen::Index>(i + 1));
}

ConvergenceReport make_convergence_report(std::vector<int> indices, std::vector<double> gaps,
                                          std::optional<double> limit) {
  ConvergenceReport r;
  r.indices = std::move(indices);
  r.gaps = std::move(gaps);
  r.monotone_decreasing = !r.gaps.empty();
  for (std::size_t i = 1; i < r.gaps.size(); ++i) {
    if (!(r.gaps[i] < r.gaps[i - 1])) r.monotone_decreasing = false;
  }
  r.extrapolated_limit = limit;
  return r;
}

namespace {

void require_defined(const Trajectory& x, double T, const char* what) {
  if (x.escaped() && *x.escape_time <= T)
    throw NonComparableError(std::string(what) + ": trajectory escaped at t=" +
                             std::to_string(*x.escape_time) + " before T=" + std::to_string(T));
  if (x.end() < T * (1.0 - 1e-12))
    throw NonComparableError(std::string(what) + ": trajectory ends at t=" + std::to_string(x.end()) +
                             " before T=" + std::to_string(T));
}

// Union of both grids restricted to [0, T], always containing T.
std::vector<double> union_grid(const Trajectory& x, const Trajectory& y, double T) {
  std::vector<double> u;
  u.reserve(x.size() + y.size() + 1);
  for (double t : x.grid.nodes()) if (t < T) u.push_back(t);
  for (double t : y.grid.nodes()) if (t < T) u.push_back(t);
  u.push_back(T);
  std::sort(u.begin(), u.end());
  u.erase(std::unique(u.begin(), u.end()), u.end());
  return u;
}

// x restricted to [0, T] with a node inserted at T.
Trajectory restrict(const Trajectory& x, double T) {
  std::vector<double> nodes;
  std::vector<Vec> cols;
  for (std::size_t i = 0; i < x.size() && x.t(i) < T; ++i) {
    nodes.push_back(x.t(i));
    cols.push_back(x.x(i));
  }
  nodes.push_back(T);
  cols.push_back(x.at(T));
  Trajectory r{TimeGrid(std::move(nodes)), Mat(x.dim(), static_cast<Eigen::Index>(cols.size())), std::nullopt, {}};
  for (std::size_t i = 0; i < cols.size(); ++i) r.states.col(static_cast<Eigen::Index>(i)) = cols[i];
  for (std::size_t b : x.breaks)
    if (b < r.size() - 1) r.breaks.push_back(b);
  return r;
}

Trajectory difference(const Trajectory& x, const Trajectory& y, double T) {
  if (x.dim() != y.dim()) throw ConfigError("trajectories have different state dimensions");
  auto nodes = union_grid(x, y, T);
  Mat d(x.dim(), static_cast<Eigen::Index>(nodes.size()));
  for (std::size_t i = 0; i < nodes.size(); ++i) d.col(static_cast<Eigen::Index>(i)) = x.at(nodes[i]) - y.at(nodes[i]);
  return Trajectory{TimeGrid(std::move(nodes)), std::move(d), std::nullopt, {}};
}

double seminorm_defined(const Trajectory& x, int order, double p) {
  const std::size_t n = x.size();
  Mat dx;
  if (order == 1) dx = finite_difference_derivative(x);
  if (std::isinf(p)) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      m = std::max(m, x.states.col(static_cast<Eigen::Index>(i)).norm());
      if (order == 1) m = std::max(m, dx.col(static_cast<Eigen::Index>(i)).norm());
    }
    return m;
  }
  std::vector<double> f(n);
  const auto& t = x.grid.nodes();
  auto bounds = segment_bounds(n, x.breaks);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = x.states.col(static_cast<Eigen::Index>(i)).norm();
    f[i] = std::pow(v, p);
    if (order == 1) f[i] += std::pow(dx.col(static_cast<Eigen::Index>(i)).norm(), p);
  }
  for (std::size_t s = 0; s + 1 < bounds.size(); ++s) {
    const std::size_t a = bounds[s], b = bounds[s + 1];
    sum += simpson(std::span<const double>(t).subspan(a, b - a + 1), std::span<const double>(f).subspan(a, b - a + 1));
  }
  return std::pow(std::max(sum, 0.0), 1.0 / p);
}

} // namespace

Mat finite_difference_derivative(const Trajectory& x) {
  const std::size_t n = x.size();
  Mat d(x.dim(), static_cast<Eigen::Index>(n));
  const auto& t = x.grid.nodes();
  const auto& S = x.states;
  auto is_break = [&](std::size_t i) {
    return std::binary_search(x.breaks.begin(), x.breaks.end(), i);
  };
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const bool left_ok = i > 0;
    const bool right_ok = i + 1 < n;
    if (left_ok && right_ok && !is_break(i)) {
      // second-order central difference on a non-uniform grid
      const double h0 = t[i] - t[i - 1], h1 = t[i + 1] - t[i];
      d.col(ii) = (-h1 / (h0 * (h0 + h1))) * S.col(ii - 1) + ((h1 - h0) / (h0 * h1)) * S.col(ii) +
                  (h0 / (h1 * (h0 + h1))) * S.col(ii + 1);
    } else if (right_ok) {
      d.col(ii) = (S.col(ii + 1) - S.col(ii)) / (t[i + 1] - t[i]);
    } else {
      d.col(ii) = (S.col(ii) - S.col(ii - 1)) / (t[i] - t[i - 1]);
    }
  }
  return d;
}

double sup_distance(const Trajectory& x, const Trajectory& y, double T) {
  require_defined(x, T, "sup_distance");
  require_defined(y, T, "sup_distance");
  double m = 0.0;
  for (double t : union_grid(x, y, T)) m = std::max(m, (x.at(t) - y.at(t)).norm());
  return m;
}

double sobolev_seminorm(const Trajectory& x, double T, int order, double p) {
  if (order != 0 && order != 1) throw ConfigError("sobolev_seminorm: order must be 0 or 1");
  if (!(p > 1.0)) throw ConfigError("sobolev_seminorm: exponent must lie in (1, inf]");
  require_defined(x, T, "sobolev_seminorm");
  return seminorm_defined(restrict(x, T), order, p);
}

double lf_metric(const Trajectory& x, const Trajectory& y, std::span<const double> defining_times,
                 int order, double p) {
  if (defining_times.empty()) throw ConfigError("lf_metric: need at least one defining time");
  for (std::size_t k = 1; k < defining_times.size(); ++k)
    if (!(defining_times[k] > defining_times[k - 1])) throw ConfigError("lf_metric: defining times must increase");
  const double Tmax = defining_times.back();
  require_defined(x, Tmax, "lf_metric");
  require_defined(y, Tmax, "lf_metric");
  double d = 0.0;
  double weight = 1.0;
  for (double Tk : defining_times) {
    const double r = seminorm_defined(difference(x, y, Tk), order, p);
    d = std::max(d, weight * r / (1.0 + r));
    weight *= 0.5;
  }
  return d;
}

} // namespace horizonlab
