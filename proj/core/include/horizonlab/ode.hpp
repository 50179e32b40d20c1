#pragma once

// Adaptive Dormand-Prince 5(4) integration with continuous (dense) output and
// blow-up detection. Integration restarts at every declared breakpoint, so a
// right-hand side that is smooth between breakpoints keeps its nominal order.

#include "horizonlab/trajectory.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace horizonlab {

struct IntegratorConfig {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  /// |x| above this radius declares escape (maximal solution left every compact).
  double escape_radius = 1e8;
  double max_step = kInf;
  /// Maximal spacing of the output grid.
  double output_step = 0.01;
  std::size_t max_steps = 5'000'000;

  /// Throws ConfigError on non-positive tolerances, escape_radius < 10, etc.
  void validate() const;
};

/// dx = f(t, x). Must not retain references to its arguments.
using VectorField = std::function<void(double t, const Vec& x, Vec& dx)>;

/// Like VectorField, but also told which smooth segment [tau_k, tau_{k+1}] is
/// being integrated (k counts the segments of [0, T] cut at the breakpoints).
/// Lets piecewise-defined fields pick the correct one-sided value at a jump.
using SegmentField = std::function<void(std::size_t segment, double t, const Vec& x, Vec& dx)>;

/// Output times on [0, T]: spacing <= cfg.output_step inside every smooth
/// segment, every breakpoint in (0, T) included, and an even number of panels
/// per segment (so composite Simpson needs no fallback).
std::vector<double> make_output_times(double T, std::span<const double> breakpoints, double output_step);

/// Integrates from t = output_times.front() (must be 0) to output_times.back(),
/// restarting at each breakpoint. Breakpoints must appear in output_times.
/// On escape the returned trajectory ends at the bisection-refined escape time
/// and `escape_time` is set.
Trajectory integrate_field(const VectorField& f, const Vec& x0, std::span<const double> output_times,
                           std::span<const double> breakpoints, const IntegratorConfig& cfg);

Trajectory integrate_field(const SegmentField& f, const Vec& x0, std::span<const double> output_times,
                           std::span<const double> breakpoints, const IntegratorConfig& cfg);

/// Convenience overload building output times with make_output_times.
Trajectory integrate_field(const VectorField& f, const Vec& x0, double T,
                           std::span<const double> breakpoints, const IntegratorConfig& cfg);

/// Integrates on [t0, t1] (t1 may be smaller than t0 for backward integration)
/// and returns only the final state. Throws NumericalError on escape.
Vec integrate_to(const VectorField& f, const Vec& x0, double t0, double t1, const IntegratorConfig& cfg);

} // namespace horizonlab
