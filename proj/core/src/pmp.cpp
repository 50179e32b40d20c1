#include "horizonlab/pmp.hpp"

#include "horizonlab/dynamics.hpp"
#include "horizonlab/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace horizonlab {

namespace {

// Cubic Hermite interpolation of x on one smooth segment of the grid.
class SegmentHermite {
public:
  SegmentHermite(const Trajectory& x, std::size_t a, std::size_t b, const Mat& M) : x_(x), a_(a), b_(b) {
    d_.resize(x.dim(), static_cast<Eigen::Index>(b - a + 1));
    for (std::size_t i = a; i <= b; ++i) d_.col(static_cast<Eigen::Index>(i - a)) = M * x.x(i);
  }

  Vec operator()(double t) const {
    const auto& nodes = x_.grid.nodes();
    auto it = std::upper_bound(nodes.begin() + static_cast<std::ptrdiff_t>(a_),
                               nodes.begin() + static_cast<std::ptrdiff_t>(b_), t);
    std::size_t i = static_cast<std::size_t>(it - nodes.begin());
    i = std::clamp<std::size_t>(i, a_ + 1, b_) - 1;
    const double t0 = nodes[i], h = nodes[i + 1] - t0;
    const double s = std::clamp((t - t0) / h, 0.0, 1.0);
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
    const auto k = static_cast<Eigen::Index>(i - a_);
    return h00 * x_.states.col(static_cast<Eigen::Index>(i)) + h10 * h * d_.col(k) +
           h01 * x_.states.col(static_cast<Eigen::Index>(i + 1)) + h11 * h * d_.col(k + 1);
  }

private:
  const Trajectory& x_;
  std::size_t a_, b_;
  Mat d_;
};

std::vector<double> segment_controls(const Trajectory& x, const PiecewiseControl& u,
                                     const std::vector<std::size_t>& bounds) {
  std::vector<double> us;
  for (std::size_t s = 0; s + 1 < bounds.size(); ++s) us.push_back(u.eval_scalar(0.5 * (x.t(bounds[s]) + x.t(bounds[s + 1]))));
  return us;
}

} // namespace

CostateTrajectory costate_solve(const Mat& B1, const Mat& B2, const Trajectory& x, const PiecewiseControl& u,
                                const IntegratorConfig& cfg) {
  if (x.escaped()) throw NonComparableError("costate_solve: state trajectory escaped");
  if (B1.rows() != x.dim() || B2.rows() != x.dim()) throw ConfigError("costate_solve: dimension mismatch");
  const std::size_t N = x.size();
  const double T = x.end();
  const auto bounds = segment_bounds(N, x.breaks);
  const auto us = segment_controls(x, u, bounds);
  const std::size_t S = us.size();

  std::vector<SegmentHermite> interp;
  std::vector<Mat> Mt;
  interp.reserve(S);
  for (std::size_t s = 0; s < S; ++s) {
    const Mat M = B1 + us[s] * B2;
    interp.emplace_back(x, bounds[s], bounds[s + 1], M);
    Mt.push_back(M.transpose());
  }

  // q(r) = p(T - r) solves q' = x(T - r) + M^T q, q(0) = 0.
  std::vector<double> rt(N);
  for (std::size_t i = 0; i < N; ++i) rt[i] = T - x.t(N - 1 - i);
  rt.front() = 0.0;
  std::vector<double> rbps;
  for (auto it = bounds.rbegin() + 1; it + 1 != bounds.rend(); ++it) rbps.push_back(T - x.t(*it));

  SegmentField f = [&](std::size_t k, double r, const Vec& q, Vec& dq) {
    const std::size_t s = S - 1 - std::min(k, S - 1);
    dq = interp[s](T - r) + Mt[s] * q;
  };
  const Trajectory q = integrate_field(f, Vec::Zero(x.dim()), rt, rbps, cfg);
  if (q.escaped() || !q.states.allFinite()) throw NumericalError("costate_solve: non-finite costate");

  CostateTrajectory out{x.grid, Mat(x.dim(), static_cast<Eigen::Index>(N)), x.breaks};
  for (std::size_t i = 0; i < N; ++i)
    out.costates.col(static_cast<Eigen::Index>(i)) = q.states.col(static_cast<Eigen::Index>(N - 1 - i));
  out.costates.col(static_cast<Eigen::Index>(N - 1)).setZero();
  return out;
}

SwitchingSamples switching_function(const Mat& B2, const Trajectory& x, const CostateTrajectory& p) {
  if (x.size() != p.size() || x.grid.nodes() != p.grid.nodes())
    throw ConfigError("switching_function: state and costate grids differ");
  const Mat SB2 = sym(B2);
  SwitchingSamples out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const Vec xi = x.x(i);
    out.t.push_back(x.t(i));
    out.phi.push_back(p.p(i).dot(B2 * xi));
    out.dphi.push_back(-xi.dot(SB2 * xi));
  }
  return out;
}

std::vector<double> hamiltonian_samples(const Mat& B1, const Mat& B2, const Trajectory& x, const CostateTrajectory& p,
                                        const PiecewiseControl& u) {
  const auto bounds = segment_bounds(x.size(), x.breaks);
  const auto us = segment_controls(x, u, bounds);
  std::vector<double> H(x.size());
  std::size_t s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    while (s + 1 < us.size() && i > bounds[s + 1]) ++s;
    const Vec xi = x.x(i), pi = p.p(i);
    H[i] = 0.5 * xi.squaredNorm() + pi.dot(B1 * xi) + us[s] * pi.dot(B2 * xi);
  }
  return H;
}

std::size_t sign_changes(const std::vector<double>& phi, double delta) {
  std::size_t count = 0;
  int last = 0;
  for (double v : phi) {
    if (std::abs(v) <= delta) continue;
    const int sg = v > 0 ? 1 : -1;
    if (last != 0 && sg != last) ++count;
    last = sg;
  }
  return count;
}

PmpResiduals residuals(const SwitchingSamples& phi, const PiecewiseControl& u, const std::vector<double>& H,
                       std::optional<double> delta) {
  PmpResiduals r;
  if (phi.t.size() < 2) throw ConfigError("residuals: need at least two samples");
  double pmax = 0.0;
  for (double v : phi.phi) pmax = std::max(pmax, std::abs(v));
  r.delta = delta.value_or(1e-6 * (1.0 + pmax));
  const double T = phi.t.back() - phi.t.front();

  double bad = 0.0;
  for (std::size_t i = 0; i + 1 < phi.t.size(); ++i) {
    const double h = phi.t[i + 1] - phi.t[i];
    const double pm = 0.5 * (phi.phi[i] + phi.phi[i + 1]);
    const double um = u.eval_scalar(phi.t[i] + 0.5 * h);
    if ((pm > r.delta && um > r.delta) || (pm < -r.delta && um < 1.0 - r.delta)) bad += h;
  }
  r.weierstrass_violation = T > 0 ? bad / T : 0.0;

  if (!H.empty()) {
    const auto [lo, hi] = std::minmax_element(H.begin(), H.end());
    r.hamiltonian_rel_var = (*hi - *lo) / (1.0 + std::abs(H.back()));
  }
  r.phi_zero_crossings = sign_changes(phi.phi, r.delta);
  return r;
}

PmpAnalysis analyze_switched(const Mat& B1, const Mat& B2, const PiecewiseControl& u, const Vec& x0, double T,
                             const IntegratorConfig& cfg) {
  const auto sys = ControlSystem::switched_linear(B1, B2);
  Trajectory x = integrate(sys, u, x0, T, cfg);
  if (x.escaped()) throw NonComparableError("analyze_switched: state escaped before T");
  CostateTrajectory p = costate_solve(B1, B2, x, u, cfg);
  SwitchingSamples phi = switching_function(B2, x, p);
  std::vector<double> H = hamiltonian_samples(B1, B2, x, p, u);
  PmpResiduals res = residuals(phi, u, H);
  return {std::move(x), std::move(p), std::move(phi), std::move(H), res};
}

} // namespace horizonlab
