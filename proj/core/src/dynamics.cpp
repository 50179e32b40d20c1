#include "horizonlab/dynamics.hpp"

#include "horizonlab/quadrature.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>

namespace horizonlab {

ControlSystem::ControlSystem(Eigen::Index n, Eigen::Index m, DriftFn drift, InputMapFn input, SystemStructure s)
    : n_(n), m_(m), drift_(std::move(drift)), input_(std::move(input)), structure_(std::move(s)) {
  if (n_ <= 0 || m_ <= 0) throw ConfigError("state and control dimensions must be positive");
}

ControlSystem ControlSystem::generic(Eigen::Index n, Eigen::Index m, DriftFn drift, InputMapFn input_map) {
  return ControlSystem(n, m, std::move(drift), std::move(input_map), GenericSystem{});
}

ControlSystem ControlSystem::switched_linear(const Mat& B1, const Mat& B2) {
  if (B1.rows() != B1.cols() || B2.rows() != B2.cols() || B1.rows() != B2.rows())
    throw ConfigError("switched system matrices must be square and of equal size");
  const Eigen::Index n = B1.rows();
  return ControlSystem(
      n, 1, [B1](double, const Vec& x) -> Vec { return B1 * x; },
      [B2](double, const Vec& x) -> Mat { return B2 * x; }, SwitchedLinearSystem{B1, B2});
}

ControlSystem ControlSystem::switched_from_pair(const Mat& A1, const Mat& A2) {
  return switched_linear(A2, A1 - A2);
}

ControlSystem ControlSystem::sir(double beta_star, double beta, double gamma, double v_max) {
  if (!(beta_star > 0.0 && beta_star <= beta && beta < 1.0))
    throw ConfigError("SIR rates must satisfy 0 < beta_star <= beta < 1");
  if (!(gamma > 0.0) || !(v_max > 0.0)) throw ConfigError("SIR gamma and v_max must be positive");
  return ControlSystem(
      2, 2,
      [gamma](double, const Vec& x) -> Vec {
        Vec a(2);
        a << 0.0, -gamma * x(1);
        return a;
      },
      [](double, const Vec& x) -> Mat {
        Mat b(2, 2);
        b << -x(0) * x(1), -x(0), x(0) * x(1), 0.0;
        return b;
      },
      SirSystem{beta_star, beta, gamma, v_max});
}

ControlSystem ControlSystem::linear_tv(Eigen::Index n, Eigen::Index m, MatrixFn A, MatrixFn B) {
  auto drift = [A](double t, const Vec& x) -> Vec { return A(t) * x; };
  auto input = [B](double t, const Vec&) -> Mat { return B(t); };
  return ControlSystem(n, m, std::move(drift), std::move(input), LinearTvSystem{std::move(A), std::move(B)});
}

Vec ControlSystem::rhs(double t, const Vec& x, const Vec& u) const {
  return drift_(t, x) + input_(t, x) * u;
}

Trajectory integrate(const ControlSystem& sys, const PiecewiseControl& u, const Vec& x0, double T,
                     const IntegratorConfig& cfg, std::span<const double> restarts) {
  if (!(T > 0.0)) throw ConfigError("integrate: horizon must be positive");
  if (x0.size() != sys.state_dim()) throw ConfigError("integrate: initial state has wrong dimension");
  if (u.dim() != sys.control_dim()) throw ConfigError("integrate: control has wrong dimension");
  auto bps = u.jumps_in(0.0, T);
  for (double r : restarts) {
    if (r > 0.0 && r < T) bps.push_back(r);
  }
  std::sort(bps.begin(), bps.end());
  bps.erase(std::unique(bps.begin(), bps.end()), bps.end());

  // Between breakpoints the control is constant; resolve it per segment so
  // the right-hand side never sees the neighbouring value.
  std::vector<double> seg{0.0};
  seg.insert(seg.end(), bps.begin(), bps.end());
  seg.push_back(T);
  std::vector<Vec> useg;
  for (std::size_t k = 0; k + 1 < seg.size(); ++k) useg.push_back(u.eval(0.5 * (seg[k] + seg[k + 1])));
  SegmentField f = [&](std::size_t k, double t, const Vec& x, Vec& dx) { dx = sys.rhs(t, x, useg[k]); };
  const auto times = make_output_times(T, bps, cfg.output_step);
  return integrate_field(f, x0, times, bps, cfg);
}

Mat expm(const Mat& A) { return A.exp(); }

double control_integral(const PiecewiseControl& u, double t) {
  double s = 0.0;
  const auto& bp = u.breakpoints();
  for (std::size_t j = 0; j < u.values().size(); ++j) {
    const double a = bp[j];
    const double b = std::min(bp[j + 1], t);
    if (b > a) s += (b - a) * u.values()[j](0);
  }
  if (t > u.end()) s += (t - u.end()) * u.tail()(0);
  return s;
}

Vec commuting_switched_solution(const Mat& B1, const Mat& B2, const PiecewiseControl& u, const Vec& x0, double t) {
  return expm(B1 * t + B2 * control_integral(u, t)) * x0;
}

Mat state_transition(const MatrixFn& A, Eigen::Index n, double t0, double t1, const IntegratorConfig& cfg) {
  if (t1 < t0) throw ConfigError("state_transition requires t1 >= t0");
  if (t1 == t0) return Mat::Identity(n, n);
  VectorField f = [&](double t, const Vec& m, Vec& dm) {
    const Mat At = A(t);
    Eigen::Map<const Mat> M(m.data(), n, n);
    dm.resize(n * n);
    Eigen::Map<Mat>(dm.data(), n, n) = At * M;
  };
  Vec m0 = Eigen::Map<const Vec>(Mat::Identity(n, n).eval().data(), n * n);
  Vec m1 = integrate_to(f, m0, t0, t1, cfg);
  Mat out = Eigen::Map<const Mat>(m1.data(), n, n);
  if (!out.allFinite()) throw NumericalError("state transition matrix has non-finite entries");
  return out;
}

Trajectory variation_of_constants(const MatrixFn& A, const MatrixFn& B, const PiecewiseControl& u, const Vec& x0,
                                  double T, const IntegratorConfig& cfg) {
  const Eigen::Index n = x0.size();
  const auto bps = u.jumps_in(0.0, T);
  const auto times = make_output_times(T, bps, cfg.output_step);

  // Phi(t, 0) on the output grid.
  VectorField f = [&](double t, const Vec& m, Vec& dm) {
    Eigen::Map<const Mat> M(m.data(), n, n);
    dm.resize(n * n);
    Eigen::Map<Mat>(dm.data(), n, n) = A(t) * M;
  };
  Vec m0 = Eigen::Map<const Vec>(Mat::Identity(n, n).eval().data(), n * n);
  Trajectory phi = integrate_field(f, m0, times, bps, cfg);
  if (phi.escaped()) {
    throw NumericalError("state transition matrix escaped");
  }

  const std::size_t N = phi.size();
  std::vector<Mat> Phi(N);
  for (std::size_t i = 0; i < N; ++i) Phi[i] = Eigen::Map<const Mat>(phi.states.col(static_cast<Eigen::Index>(i)).data(), n, n);

  Trajectory out{phi.grid, Mat(n, static_cast<Eigen::Index>(N)), std::nullopt, phi.breaks};
  const auto& t = phi.grid.nodes();
  const auto bounds = segment_bounds(N, phi.breaks);
  Vec acc = Vec::Zero(n);
  out.states.col(0) = x0;
  std::vector<double> g;
  for (std::size_t s = 0; s + 1 < bounds.size(); ++s) {
    const std::size_t a = bounds[s], b = bounds[s + 1];
    const Vec us = u.eval(0.5 * (t[a] + t[b]));
    // integrand Phi(s,0)^{-1} B(s) u(s), one component at a time
    Mat vals(n, static_cast<Eigen::Index>(b - a + 1));
    for (std::size_t i = a; i <= b; ++i)
      vals.col(static_cast<Eigen::Index>(i - a)) = Phi[i].partialPivLu().solve(B(t[i]) * us);
    std::span<const double> ts(t.data() + a, b - a + 1);
    Mat cum(n, vals.cols());
    for (Eigen::Index r = 0; r < n; ++r) {
      g.resize(static_cast<std::size_t>(vals.cols()));
      for (Eigen::Index c = 0; c < vals.cols(); ++c) g[static_cast<std::size_t>(c)] = vals(r, c);
      auto cs = cumulative_simpson(ts, g);
      for (Eigen::Index c = 0; c < vals.cols(); ++c) cum(r, c) = cs[static_cast<std::size_t>(c)];
    }
    for (std::size_t i = a + 1; i <= b; ++i)
      out.states.col(static_cast<Eigen::Index>(i)) = Phi[i] * (x0 + acc + cum.col(static_cast<Eigen::Index>(i - a)));
    acc += cum.col(cum.cols() - 1);
  }
  return out;
}

TransitionBoundReport transition_bound_check(const MatrixFn& A, Eigen::Index n, double T, std::size_t samples,
                                             const IntegratorConfig& cfg, double tol) {
  if (samples < 2) throw ConfigError("transition_bound_check needs at least two samples");
  TransitionBoundReport r;
  const std::size_t fine = std::max<std::size_t>(samples * 16, 1024);
  for (std::size_t i = 0; i <= fine; ++i) {
    const double t = T * static_cast<double>(i) / static_cast<double>(fine);
    Eigen::JacobiSVD<Mat> svd(A(t));
    r.lambda_T = std::max(r.lambda_T, svd.singularValues()(0));
  }
  std::vector<double> pts(samples);
  for (std::size_t i = 0; i < samples; ++i) pts[i] = T * static_cast<double>(i) / static_cast<double>(samples - 1);
  for (std::size_t i = 0; i < samples; ++i) {
    for (std::size_t j = i; j < samples; ++j) {
      const Mat Phi = state_transition(A, n, pts[i], pts[j], cfg);
      Eigen::JacobiSVD<Mat> svd(Phi);
      const double ratio = svd.singularValues()(0) / std::exp(r.lambda_T * (pts[j] - pts[i]));
      r.max_ratio = std::max(r.max_ratio, ratio);
      ++r.pairs_checked;
    }
  }
  r.holds = r.max_ratio <= 1.0 + tol;
  return r;
}

} // namespace horizonlab
