#include "horizonlab/ode.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace horizonlab {

void IntegratorConfig::validate() const {
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) throw ConfigError("integrator tolerances must be positive");
  if (!(escape_radius >= 10.0)) throw ConfigError("escape_radius must be >= 10");
  if (!(max_step > 0.0)) throw ConfigError("max_step must be positive");
  if (!(output_step > 0.0) || !std::isfinite(output_step)) throw ConfigError("output_step must be positive and finite");
  if (max_steps == 0) throw ConfigError("max_steps must be positive");
}

std::vector<double> make_output_times(double T, std::span<const double> breakpoints, double output_step) {
  if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("horizon must be positive and finite");
  if (!(output_step > 0.0)) throw ConfigError("output_step must be positive");
  std::vector<double> bounds{0.0};
  for (double b : breakpoints)
    if (b > 0.0 && b < T) bounds.push_back(b);
  bounds.push_back(T);
  std::sort(bounds.begin(), bounds.end());
  bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());

  std::vector<double> out{0.0};
  for (std::size_t s = 0; s + 1 < bounds.size(); ++s) {
    const double a = bounds[s], b = bounds[s + 1];
    const auto m = static_cast<std::size_t>(std::max(1.0, std::ceil((b - a) / (2.0 * output_step))));
    const std::size_t panels = 2 * m;
    for (std::size_t j = 1; j < panels; ++j)
      out.push_back(a + (b - a) * static_cast<double>(j) / static_cast<double>(panels));
    out.push_back(b);
  }
  return out;
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
// Continuous extension (Hairer & Wanner, dopri5 contd5).
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

struct DenseStep {
  double t0 = 0.0, h = 0.0;
  Vec r1, r2, r3, r4, r5;

  Vec eval(double t) const {
    const double th = (t - t0) / h;
    const double th1 = 1.0 - th;
    return r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
  }
};

class Stepper {
public:
  Stepper(const VectorField& f, const IntegratorConfig& cfg, Eigen::Index n)
      : f_(f), cfg_(cfg), k1_(n), k2_(n), k3_(n), k4_(n), k5_(n), k6_(n), k7_(n), ytmp_(n), ynew_(n) {}

  // Attempts one step of size h from (t, y). Returns the error norm; on
  // success (err <= 1) y_new(), dense() and k1 for the next step are ready.
  double attempt(double t, const Vec& y, double h, bool k1_valid) {
    if (!k1_valid) f_(t, y, k1_);
    ytmp_ = y + h * (a21 * k1_);
    f_(t + c2 * h, ytmp_, k2_);
    ytmp_ = y + h * (a31 * k1_ + a32 * k2_);
    f_(t + c3 * h, ytmp_, k3_);
    ytmp_ = y + h * (a41 * k1_ + a42 * k2_ + a43 * k3_);
    f_(t + c4 * h, ytmp_, k4_);
    ytmp_ = y + h * (a51 * k1_ + a52 * k2_ + a53 * k3_ + a54 * k4_);
    f_(t + c5 * h, ytmp_, k5_);
    ytmp_ = y + h * (a61 * k1_ + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
    f_(t + h, ytmp_, k6_);
    ynew_ = y + h * (a71 * k1_ + a73 * k3_ + a74 * k4_ + a75 * k5_ + a76 * k6_);
    if (!ynew_.allFinite()) return kInf;
    f_(t + h, ynew_, k7_);
    if (!k7_.allFinite()) return kInf;

    double acc = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double sc = cfg_.abs_tol + cfg_.rel_tol * std::max(std::abs(y(i)), std::abs(ynew_(i)));
      const double e = h * (e1 * k1_(i) + e3 * k3_(i) + e4 * k4_(i) + e5 * k5_(i) + e6 * k6_(i) + e7 * k7_(i)) / sc;
      acc += e * e;
    }
    const double err = std::sqrt(acc / static_cast<double>(y.size()));
    return std::isfinite(err) ? err : kInf;
  }

  DenseStep dense(double t, const Vec& y, double h) const {
    DenseStep d;
    d.t0 = t;
    d.h = h;
    d.r1 = y;
    d.r2 = ynew_ - y;
    d.r3 = h * k1_ - d.r2;
    d.r4 = d.r2 - h * k7_ - d.r3;
    d.r5 = h * (d1 * k1_ + d3 * k3_ + d4 * k4_ + d5 * k5_ + d6 * k6_ + d7 * k7_);
    return d;
  }

  void accept() { k1_.swap(k7_); }
  const Vec& y_new() const { return ynew_; }

private:
  const VectorField& f_;
  const IntegratorConfig& cfg_;
  Vec k1_, k2_, k3_, k4_, k5_, k6_, k7_, ytmp_, ynew_;
};

double next_factor(double err) {
  if (err == 0.0) return 5.0;
  if (!std::isfinite(err)) return 0.25;
  return std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
}

// Time of first crossing of |y| = radius inside the dense step (|y(t0)| <= radius).
double bisect_escape(const DenseStep& d, double radius) {
  double lo = d.t0, hi = d.t0 + d.h;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    const Vec y = d.eval(mid);
    if (y.allFinite() && y.norm() <= radius) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

struct SegmentOutcome {
  Vec y;
  std::optional<double> escape;
  Vec escape_state;
  double h_next;
};

// Integrates over [a, b], writing dense output at the given times (all in (a, b]).
SegmentOutcome integrate_segment(const VectorField& f, const IntegratorConfig& cfg, double a, double b,
                                 const Vec& y0, double h_guess, std::span<const double> outputs,
                                 std::vector<double>& out_t, std::vector<Vec>& out_y, std::size_t& steps) {
  Stepper st(f, cfg, y0.size());
  double t = a;
  Vec y = y0;
  double h = std::min({h_guess, cfg.max_step, b - a});
  bool k1_valid = false;
  std::size_t next_out = 0;
  const double span = b - a;
  const double tiny = 1e-14 * std::max(1.0, std::abs(b));

  while (t < b) {
    if (++steps > cfg.max_steps) throw NumericalError("integrator exceeded max_steps");
    double hs = std::min(h, b - t);
    if (b - (t + hs) < 1e-12 * span) hs = b - t;
    const double err = st.attempt(t, y, hs, k1_valid);
    k1_valid = true;  // k1 depends only on (t, y), unchanged on rejection
    if (err > 1.0) {
      h = hs * next_factor(err);
      if (h < tiny) {
        // step size collapsed: the solution is leaving every compact set at t
        return {y, t, y, h};
      }
      continue;
    }
    const double t_new = (hs == b - t) ? b : t + hs;
    const DenseStep dense = st.dense(t, y, hs);
    const Vec& yn = st.y_new();
    if (yn.norm() > cfg.escape_radius) {
      const double te = bisect_escape(dense, cfg.escape_radius);
      while (next_out < outputs.size() && outputs[next_out] < te) {
        out_t.push_back(outputs[next_out]);
        out_y.push_back(dense.eval(outputs[next_out]));
        ++next_out;
      }
      return {y, te, dense.eval(te), h};
    }
    while (next_out < outputs.size() && outputs[next_out] <= t_new) {
      const double to = outputs[next_out];
      out_t.push_back(to);
      out_y.push_back(to == t_new ? Vec(yn) : dense.eval(to));
      ++next_out;
    }
    y = yn;
    t = t_new;
    st.accept();
    h = std::min(hs * next_factor(err), cfg.max_step);
  }
  return {y, std::nullopt, Vec(), h};
}

} // namespace

Trajectory integrate_field(const VectorField& f, const Vec& x0, std::span<const double> output_times,
                           std::span<const double> breakpoints, const IntegratorConfig& cfg) {
  SegmentField g = [&f](std::size_t, double t, const Vec& x, Vec& dx) { f(t, x, dx); };
  return integrate_field(g, x0, output_times, breakpoints, cfg);
}

Trajectory integrate_field(const SegmentField& field, const Vec& x0, std::span<const double> output_times,
                           std::span<const double> breakpoints, const IntegratorConfig& cfg) {
  cfg.validate();
  if (output_times.size() < 2 || output_times.front() != 0.0)
    throw ConfigError("output times must start at 0 and contain at least two nodes");
  if (!x0.allFinite()) throw ConfigError("initial state is not finite");
  const double T = output_times.back();

  std::vector<double> seg{0.0};
  for (double b : breakpoints)
    if (b > 0.0 && b < T) seg.push_back(b);
  seg.push_back(T);
  std::sort(seg.begin(), seg.end());
  seg.erase(std::unique(seg.begin(), seg.end()), seg.end());

  std::vector<double> out_t{0.0};
  std::vector<Vec> out_y{x0};
  std::vector<std::size_t> breaks;
  std::optional<double> escape;
  Vec y = x0;
  double h = std::min(cfg.output_step, 1e-2 * std::max(1e-3, T));
  if (x0.norm() > cfg.escape_radius) escape = 0.0;
  std::size_t steps = 0;
  std::size_t oi = 1;

  for (std::size_t s = 0; s + 1 < seg.size() && !escape; ++s) {
    const double a = seg[s], b = seg[s + 1];
    std::size_t oj = oi;
    while (oj < output_times.size() && output_times[oj] <= b) ++oj;
    if (oj == oi || output_times[oj - 1] != b)
      throw ConfigError("breakpoints must be included in output times");
    VectorField f = [&field, s](double t, const Vec& x, Vec& dx) { field(s, t, x, dx); };
    auto res = integrate_segment(f, cfg, a, b, y, h, output_times.subspan(oi, oj - oi), out_t, out_y, steps);
    oi = oj;
    if (res.escape) {
      escape = res.escape;
      if (out_t.back() < *escape) {
        out_t.push_back(*escape);
        out_y.push_back(res.escape_state);
      }
      break;
    }
    y = res.y;
    h = res.h_next;
    if (s + 2 < seg.size()) breaks.push_back(out_t.size() - 1);
  }

  if (out_t.size() < 2) {
    // escaped immediately; keep a degenerate two-node record
    out_t.push_back(std::max(out_t.back(), 0.0) + 1e-300);
    out_y.push_back(out_y.back());
  }
  Trajectory tr{TimeGrid(out_t), Mat(x0.size(), static_cast<Eigen::Index>(out_t.size())), escape, std::move(breaks)};
  for (std::size_t i = 0; i < out_y.size(); ++i) tr.states.col(static_cast<Eigen::Index>(i)) = out_y[i];
  return tr;
}

Trajectory integrate_field(const VectorField& f, const Vec& x0, double T, std::span<const double> breakpoints,
                           const IntegratorConfig& cfg) {
  auto times = make_output_times(T, breakpoints, cfg.output_step);
  return integrate_field(f, x0, times, breakpoints, cfg);
}

Vec integrate_to(const VectorField& f, const Vec& x0, double t0, double t1, const IntegratorConfig& cfg) {
  cfg.validate();
  if (t1 == t0) return x0;
  const double dir = t1 > t0 ? 1.0 : -1.0;
  VectorField g = [&](double s, const Vec& x, Vec& dx) {
    f(t0 + dir * s, x, dx);
    if (dir < 0) dx = -dx;
  };
  const double L = std::abs(t1 - t0);
  std::vector<Vec> ys;
  std::vector<double> ts;
  std::size_t steps = 0;
  const double ends[1] = {L};
  auto res = integrate_segment(g, cfg, 0.0, L, x0, std::min(1e-2 * L, cfg.max_step), ends, ts, ys, steps);
  if (res.escape) throw NumericalError("integration escaped before reaching the final time");
  return res.y;
}

} // namespace horizonlab
