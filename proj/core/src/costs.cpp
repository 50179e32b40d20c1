#include "horizonlab/costs.hpp"

#include "horizonlab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace horizonlab {

bool contains(const ControlSet& set, const Vec& u, double margin) {
  return std::visit(
      [&](const auto& s) -> bool {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, BoxSet>) {
          if (s.lo.size() != u.size()) throw ConfigError("control set dimension mismatch");
          return ((u - s.lo).array() >= -margin).all() && ((s.hi - u).array() >= -margin).all();
        } else {
          if (s.center.size() != u.size()) throw ConfigError("control set dimension mismatch");
          return (u - s.center).norm() <= s.radius + margin;
        }
      },
      set);
}

bool contains(const StateSet& set, const Vec& x, double margin) {
  return std::visit(
      [&](const auto& s) -> bool {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, BoxSet>) {
          if (s.lo.size() != x.size()) throw ConfigError("state set dimension mismatch");
          return ((x - s.lo).array() >= -margin).all() && ((s.hi - x).array() >= -margin).all();
        } else if constexpr (std::is_same_v<S, HalfspaceSet>) {
          if (s.normal.size() != x.size()) throw ConfigError("state set dimension mismatch");
          return s.normal.dot(x) <= s.offset + margin;
        } else {
          return (x.array() >= -margin).all() && x.sum() <= 1.0 + margin;
        }
      },
      set);
}

bool is_compact(const ControlSet& set) {
  if (const auto* b = std::get_if<BoxSet>(&set)) return b->lo.allFinite() && b->hi.allFinite();
  return std::isfinite(std::get<BallSet>(set).radius);
}

void CostSpec::validate() const {
  if (!(p > 1.0)) throw ConfigError("cost exponent p must lie in (1, inf]");
  if (std::isinf(p) && !U) throw ConfigError("p = inf requires a control set U");
}

std::string to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::None: return "none";
    case ViolationKind::State: return "state";
    case ViolationKind::Control: return "control";
    case ViolationKind::Inadmissible: return "inadmissible";
  }
  return "unknown";
}

double CostBreakdown::total() const {
  if (std::isinf(running) || std::isinf(tail)) return kInf;
  return running + tail;
}

double tail_integral(const PiecewiseControl& u, double T, double p) {
  double s = 0.0;
  const auto& bp = u.breakpoints();
  for (std::size_t j = 0; j < u.values().size(); ++j) {
    const double a = std::max(bp[j], T);
    const double b = bp[j + 1];
    if (b > a) s += (b - a) * std::pow(u.values()[j].norm(), p);
  }
  if (u.tail().norm() != 0.0) return kInf;
  return s;
}

namespace {

// Integrand samples of one smooth segment restricted to [0, T].
struct Samples {
  std::vector<double> t;
  std::vector<double> f;
};

// Evaluates l along x on [0, T], one Samples block per smooth segment.
std::vector<Samples> integrand_segments(const CostSpec& spec, const Trajectory& x, const PiecewiseControl& u,
                                        double T) {
  std::vector<Samples> out;
  const auto bounds = segment_bounds(x.size(), x.breaks);
  for (std::size_t s = 0; s + 1 < bounds.size(); ++s) {
    const std::size_t a = bounds[s], b = bounds[s + 1];
    if (x.t(a) >= T) break;
    const double seg_end = std::min(x.t(b), T);
    const Vec useg = u.eval(0.5 * (x.t(a) + seg_end));
    Samples smp;
    for (std::size_t i = a; i <= b && x.t(i) < T; ++i) {
      const Vec xi = x.x(i);
      smp.t.push_back(x.t(i));
      smp.f.push_back(spec.l1(x.t(i), xi) + spec.l2(x.t(i), xi, useg));
    }
    if (smp.t.back() < seg_end) {
      const Vec xe = x.at(seg_end);
      smp.t.push_back(seg_end);
      smp.f.push_back(spec.l1(seg_end, xe) + spec.l2(seg_end, xe, useg));
    }
    if (smp.t.size() >= 2) out.push_back(std::move(smp));
  }
  return out;
}

} // namespace

double running_cost(const CostSpec& spec, const Trajectory& x, const PiecewiseControl& u, double T) {
  double sum = 0.0;
  for (const auto& s : integrand_segments(spec, x, u, T)) {
    for (double v : s.f)
      if (!std::isfinite(v)) return kInf;
    sum += simpson(s.t, s.f);
  }
  return sum;
}

CostBreakdown evaluate_on(const CostSpec& spec, const Trajectory& x, const PiecewiseControl& u, double T) {
  spec.validate();
  CostBreakdown r;
  if (x.escaped() && *x.escape_time <= T) {
    r.running = kInf;
    r.tail = kInf;
    r.violation = {ViolationKind::Inadmissible, x.escape_time};
    return r;
  }
  if (x.end() < T * (1.0 - 1e-12)) throw NonComparableError("evaluate: trajectory shorter than horizon");

  if (std::isinf(spec.p)) {
    // int_0^inf chi_U(u(t)) dt over every non-empty interval and the tail
    const auto& bp = u.breakpoints();
    for (std::size_t j = 0; j < u.values().size(); ++j) {
      if (bp[j + 1] > bp[j] && !contains(*spec.U, u.values()[j])) {
        r.tail = kInf;
        r.violation = {ViolationKind::Control, bp[j]};
        break;
      }
    }
    if (r.violation.kind == ViolationKind::None && !contains(*spec.U, u.tail())) {
      r.tail = kInf;
      r.violation = {ViolationKind::Control, u.end()};
    }
  } else {
    r.tail = tail_integral(u, T, spec.p);
  }

  if (spec.X) {
    for (std::size_t i = 0; i < x.size() && x.t(i) <= T; ++i) {
      if (!contains(*spec.X, x.x(i), spec.state_margin)) {
        r.running = kInf;
        if (r.violation.kind == ViolationKind::None || x.t(i) < r.violation.time.value_or(kInf))
          r.violation = {ViolationKind::State, x.t(i)};
        return r;
      }
    }
  }
  r.running = running_cost(spec, x, u, T);
  return r;
}

CostBreakdown evaluate(const CostSpec& spec, const ControlSystem& sys, const PiecewiseControl& u, const Vec& x0,
                       double T, const IntegratorConfig& cfg) {
  if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("evaluate: horizon must be positive and finite");
  const Trajectory x = integrate(sys, u, x0, T, cfg);
  return evaluate_on(spec, x, u, T);
}

TruncatedInfiniteCost evaluate_truncated_infinite(const CostSpec& spec, const ControlSystem& sys,
                                                  const PiecewiseControl& u, const Vec& x0, double T_max,
                                                  const IntegratorConfig& cfg) {
  TruncatedInfiniteCost out;
  const Trajectory x = integrate(sys, u, x0, T_max, cfg);
  CostSpec truncated = spec;
  out.cost = evaluate_on(truncated, x, u, T_max);
  if (!std::isinf(spec.p)) out.cost.tail = 0.0;  // convention: int_inf^inf = 0
  if (!out.cost.admissible()) {
    out.tail_unknown = true;
    return out;
  }

  // exponential fit of the integrand on the last quarter of the horizon
  std::vector<double> ts, fs;
  bool all_zero = true, any_zero = false;
  for (const auto& s : integrand_segments(spec, x, u, T_max)) {
    for (std::size_t i = 0; i < s.t.size(); ++i) {
      if (s.t[i] < 0.75 * T_max) continue;
      ts.push_back(s.t[i]);
      fs.push_back(s.f[i]);
      if (s.f[i] > 0.0) all_zero = false;
      else any_zero = true;
    }
  }
  if (all_zero) {
    out.tail_bound = 0.0;
    return out;
  }
  if (any_zero || ts.size() < 3) {
    out.tail_unknown = true;
    return out;
  }
  double st = 0, sy = 0, stt = 0, sty = 0;
  const double n = static_cast<double>(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double ly = std::log(fs[i]);
    st += ts[i];
    sy += ly;
    stt += ts[i] * ts[i];
    sty += ts[i] * ly;
  }
  const double slope = (n * sty - st * sy) / (n * stt - st * st);
  const double icpt = (sy - slope * st) / n;
  out.decay_rate = -slope;
  if (!(out.decay_rate > 0.0)) {
    out.tail_unknown = true;
    return out;
  }
  const double at_end = std::max(std::exp(icpt + slope * T_max), fs.back());
  out.tail_bound = at_end / out.decay_rate;
  return out;
}

namespace {

struct Sampler {
  std::mt19937_64 rng;
  std::uniform_real_distribution<double> unit{-1.0, 1.0};

  explicit Sampler(std::uint64_t seed) : rng(seed) {}
  Vec cube(Eigen::Index n, double r) {
    Vec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = r * unit(rng);
    return v;
  }
  double time(double t_max) { return 0.5 * t_max * (unit(rng) + 1.0); }
};

} // namespace

CoercivityReport coercivity_probe(const CostSpec& spec, const ProbeDomain& domain, std::size_t sample_count,
                                  std::uint64_t seed) {
  spec.validate();
  CoercivityReport r;
  if (std::isinf(spec.p) && spec.U && is_compact(*spec.U)) {
    r.compact_control_set = true;
    r.passed = true;
    return r;
  }
  if (!spec.coercivity) throw ConfigError("coercivity_probe: no coercivity certificate in the cost specification");
  const auto& cert = *spec.coercivity;
  Sampler smp(seed);
  for (std::size_t k = 0; k < sample_count; ++k) {
    const double t = smp.time(domain.t_max);
    const Vec x = smp.cube(domain.state_dim, domain.state_radius);
    const Vec u = smp.cube(domain.control_dim, domain.control_radius);
    const double bound = cert.alpha * std::pow(u.norm(), spec.p) - cert.gamma(t);
    const double margin = spec.l2(t, x, u) - bound;
    if (margin < r.worst_margin) {
      r.worst_margin = margin;
      r.worst_u = u;
    }
  }
  r.samples = sample_count;
  r.passed = r.worst_margin >= 0.0;
  return r;
}

double greedy_residual(const CostSpec& spec, const ProbeDomain& domain, std::size_t sample_count, std::uint64_t seed) {
  if (!spec.greedy) throw ConfigError("greedy_residual: no greedy control in the cost specification");
  Sampler smp(seed);
  double worst = 0.0;
  for (std::size_t k = 0; k < sample_count; ++k) {
    const double t = smp.time(domain.t_max);
    const Vec x = smp.cube(domain.state_dim, domain.state_radius);
    worst = std::max(worst, std::abs(spec.l2(t, x, (*spec.greedy)(t, x))));
  }
  return worst;
}

CostSpec switched_quadratic_cost(Eigen::Index n) {
  CostSpec c;
  c.l1 = [](double, const Vec& x) { return 0.5 * x.squaredNorm(); };
  c.l2 = [](double, const Vec&, const Vec&) { return 0.0; };
  c.p = kInf;
  c.U = BoxSet{Vec::Zero(1), Vec::Ones(1)};
  c.greedy = [](double, const Vec&) -> Vec { return Vec::Zero(1); };
  (void)n;
  return c;
}

} // namespace horizonlab
