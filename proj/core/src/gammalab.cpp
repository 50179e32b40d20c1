#include "horizonlab/gammalab.hpp"

#include "horizonlab/types.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace horizonlab {

std::string to_string(GeneratorKind k) {
  switch (k) {
    case GeneratorKind::Chatter: return "chatter";
    case GeneratorKind::Oscillation: return "oscillation";
    case GeneratorKind::ScaledPulse: return "scaled_pulse";
  }
  return "chatter";
}

GeneratorKind parse_generator_kind(const std::string& s) {
  if (s == "chatter") return GeneratorKind::Chatter;
  if (s == "oscillation") return GeneratorKind::Oscillation;
  if (s == "scaled_pulse") return GeneratorKind::ScaledPulse;
  throw ConfigError("unknown generator kind '" + s + "'");
}

void WeakStarSequence::validate() const {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("generator horizon must be positive and finite");
  if (kind == GeneratorKind::Chatter && !(duty >= 0.0 && duty <= 1.0)) throw ConfigError("chatter duty must be in [0, 1]");
  if (kind == GeneratorKind::Oscillation && samples_per_period < 2)
    throw ConfigError("oscillation needs at least 2 samples per period");
}

PiecewiseControl WeakStarSequence::member(std::size_t k) const {
  validate();
  if (k == 0) throw ConfigError("sequence index starts at 1");
  const double kk = static_cast<double>(k);
  std::vector<double> bp{0.0};
  std::vector<Vec> vals;
  switch (kind) {
    case GeneratorKind::Chatter: {
      const auto periods = static_cast<std::size_t>(std::ceil(horizon * kk - 1e-9));
      for (std::size_t m = 0; m < periods; ++m) {
        const double md = static_cast<double>(m);
        bp.push_back((md + duty) / kk);
        vals.push_back(Vec::Constant(1, high));
        bp.push_back((md + 1.0) / kk);
        vals.push_back(Vec::Constant(1, low));
      }
      break;
    }
    case GeneratorKind::Oscillation: {
      const auto periods = static_cast<std::size_t>(std::ceil(horizon * kk - 1e-9));
      const std::size_t M = samples_per_period;
      const double md = static_cast<double>(M);
      for (std::size_t i = 0; i < periods * M; ++i) {
        const double id = static_cast<double>(i);
        const double phase = 2.0 * std::numbers::pi * (static_cast<double>(i % M) + 0.5) / md;
        bp.push_back((id + 1.0) / (kk * md));
        vals.push_back(Vec::Constant(1, mean + amplitude * std::sin(phase)));
      }
      break;
    }
    case GeneratorKind::ScaledPulse:
      return scaled_pulse(1.0 / kk);
  }
  return PiecewiseControl(std::move(bp), std::move(vals), limit().tail());
}

PiecewiseControl WeakStarSequence::limit() const {
  switch (kind) {
    case GeneratorKind::Chatter: return PiecewiseControl::constant(low + duty * (high - low));
    case GeneratorKind::Oscillation: return PiecewiseControl::constant(mean);
    case GeneratorKind::ScaledPulse: return PiecewiseControl::constant(0.0);
  }
  return PiecewiseControl::constant(0.0);
}

PiecewiseControl scaled_pulse(double r) {
  if (!(r > 0.0) || !std::isfinite(r)) throw ConfigError("pulse rate must be positive");
  return PiecewiseControl({0.0, 1.0 / r}, {Vec::Constant(1, r)}, Vec::Zero(1));
}

TestDictionary TestDictionary::dyadic(double lo, double hi, std::size_t levels) {
  if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) throw ConfigError("dictionary support must be [lo, hi]");
  if (levels == 0 || levels > 20) throw ConfigError("dictionary levels must be in 1..20");
  TestDictionary d;
  for (std::size_t l = 0; l < levels; ++l) {
    const std::size_t n = std::size_t{1} << l;
    const double w = (hi - lo) / static_cast<double>(n);
    for (std::size_t m = 0; m < n; ++m) {
      const double a = lo + w * static_cast<double>(m);
      d.supports.emplace_back(a, m + 1 == n ? hi : a + w);
    }
  }
  return d;
}

double TestDictionary::support_begin() const {
  double v = kInf;
  for (const auto& s : supports) v = std::min(v, s.first);
  return v;
}

double TestDictionary::support_end() const {
  double v = -kInf;
  for (const auto& s : supports) v = std::max(v, s.second);
  return v;
}

namespace {

// Antiderivative of 16 s^2 (1 - s)^2.
double bump_primitive(double s) {
  const double s3 = s * s * s;
  return 16.0 * (s3 / 3.0 - s3 * s / 2.0 + s3 * s * s / 5.0);
}

double piece_pairing(double lo, double hi, double v, double a, double b) {
  const double l = std::max(lo, a);
  const double h = std::min(hi, b);
  if (!(h > l) || v == 0.0) return 0.0;
  const double w = b - a;
  return v * (bump_primitive((h - a) / w) - bump_primitive((l - a) / w)) * w;
}

} // namespace

double bump_pairing(const PiecewiseControl& u, double a, double b) {
  if (u.dim() != 1) throw ConfigError("pairing needs a scalar control");
  if (!(b > a)) throw ConfigError("bump support must satisfy a < b");
  const auto& bp = u.breakpoints();
  double s = 0.0;
  for (std::size_t i = 0; i < u.intervals(); ++i) {
    if (bp[i + 1] <= a || bp[i] >= b) continue;
    s += piece_pairing(bp[i], bp[i + 1], u.values()[i](0), a, b);
  }
  s += piece_pairing(u.end(), kInf, u.tail()(0), a, b);
  return s;
}

double weak_star_gap(const PiecewiseControl& uk, const PiecewiseControl& u, const TestDictionary& dict) {
  double g = 0.0;
  for (const auto& [a, b] : dict.supports) g = std::max(g, std::abs(bump_pairing(uk, a, b) - bump_pairing(u, a, b)));
  return g;
}

ClosureReport closure_probe(const ControlSystem& sys, const WeakStarSequence& seq, const std::vector<std::size_t>& ks,
                            const Vec& x0, double T, const IntegratorConfig& cfg) {
  const PiecewiseControl limit = seq.limit();
  if (integrate(sys, limit, x0, T, cfg).escaped()) throw NumericalError("limit trajectory escapes before T");
  const auto limit_jumps = limit.jumps_in(0.0, T);
  ClosureReport r;
  r.ks = ks;
  for (std::size_t k : ks) {
    // both runs restart at the union of jumps, so they share one output grid
    // and the distance carries no interpolation error
    const PiecewiseControl uk = seq.member(k);
    const Trajectory xk = integrate(sys, uk, x0, T, cfg, limit_jumps);
    r.escape_times.push_back(xk.escape_time);
    if (xk.escaped()) {
      r.gaps.push_back(kInf);
      continue;
    }
    const Trajectory ref = integrate(sys, limit, x0, T, cfg, uk.jumps_in(0.0, T));
    r.gaps.push_back(sup_distance(xk, ref, T));
  }
  std::vector<int> idx(ks.begin(), ks.end());
  r.report = make_convergence_report(std::move(idx), r.gaps, 0.0);
  return r;
}

ControlSystem blowup_system() {
  return ControlSystem::generic(
      1, 1, [](double, const Vec& x) -> Vec { return Vec::Zero(x.size()); },
      [](double, const Vec& x) -> Mat { return Mat::Constant(1, 1, x(0) * x(0)); });
}

BlowupReport blowup_probe(const std::vector<double>& rates, const IntegratorConfig& cfg) {
  const ControlSystem sys = blowup_system();
  const Vec x0 = Vec::Ones(1);
  BlowupReport r;
  double horizon = 0.0;
  for (double rate : rates) {
    BlowupEntry e;
    e.rate = rate;
    const double T = 2.0 / rate;
    horizon = std::max(horizon, T);
    const Trajectory x = integrate(sys, scaled_pulse(rate), x0, T, cfg);
    e.escape_time = x.escape_time;
    if (e.escape_time) e.relative_error = std::abs(*e.escape_time * rate - 1.0);
    r.entries.push_back(e);
  }
  if (horizon > 0.0) {
    const Trajectory x = integrate(sys, PiecewiseControl::constant(0.0), x0, horizon, cfg);
    r.limit_global = !x.escaped();
    r.limit_max_dev = (x.states.array() - 1.0).abs().maxCoeff();
  }
  return r;
}

PiecewiseControl replace_tail(const PiecewiseControl& u, double T_cut, const PiecewiseControl& w) {
  if (!(T_cut >= 0.0) || !std::isfinite(T_cut)) throw ConfigError("tail cut must be finite and nonnegative");
  if (u.dim() != w.dim()) throw ConfigError("tail replacement needs controls of equal dimension");
  std::vector<double> bp{0.0};
  std::vector<Vec> vals;
  const auto push = [&](double end, const Vec& v) {
    if (end > bp.back()) {
      bp.push_back(end);
      vals.push_back(v);
    }
  };
  const auto& ub = u.breakpoints();
  for (std::size_t i = 0; i < u.intervals() && ub[i] < T_cut; ++i) push(std::min(ub[i + 1], T_cut), u.values()[i]);
  push(T_cut, u.tail());
  const auto& wb = w.breakpoints();
  for (std::size_t i = 0; i < w.intervals(); ++i) {
    if (wb[i + 1] > T_cut) push(wb[i + 1], w.values()[i]);
  }
  return PiecewiseControl(std::move(bp), std::move(vals), w.tail());
}

TailsReport tails_replacement_probe(const PiecewiseControl& u, const std::vector<PiecewiseControl>& members,
                                    const std::vector<PiecewiseControl>& tails, const std::vector<double>& horizons,
                                    const TestDictionary& dict) {
  if (members.size() != tails.size() || members.size() != horizons.size())
    throw ConfigError("members, tails and horizons must have equal length");
  TailsReport r;
  for (std::size_t k = 0; k < members.size(); ++k) {
    TailsEntry e;
    e.T_k = horizons[k];
    e.gap_original = weak_star_gap(members[k], u, dict);
    e.gap_replaced = weak_star_gap(replace_tail(members[k], horizons[k], tails[k]), u, dict);
    r.entries.push_back(e);
  }
  return r;
}

LiminfReport liminf_spotcheck(const CostSpec& spec, const ControlSystem& sys, const std::vector<PiecewiseControl>& members,
                              const std::vector<double>& horizons, const PiecewiseControl& limit, const Vec& x0,
                              double T_max, const IntegratorConfig& cfg, double tol) {
  if (members.size() != horizons.size() || members.empty())
    throw ConfigError("liminf check needs one horizon per member");
  for (double T : horizons) {
    if (!(T > 0.0) || T > T_max) throw ConfigError("liminf horizons must lie in (0, T_max]");
  }
  LiminfReport r;
  r.horizons = horizons;
  const auto inf = evaluate_truncated_infinite(spec, sys, limit, x0, T_max, cfg);
  r.f_infinity = inf.cost.total();
  r.tail_bound = inf.tail_bound;

  double lowest = kInf;
  for (std::size_t k = 0; k < members.size(); ++k) {
    const auto c = evaluate(spec, sys, members[k], x0, horizons[k], cfg);
    r.member_costs.push_back(c.total());
    r.admissible.push_back(c.admissible());
    lowest = std::min(lowest, c.total());
    r.recovery_costs.push_back(evaluate(spec, sys, limit, x0, horizons[k], cfg).total());
  }
  r.liminf_margin = lowest - r.f_infinity;
  r.liminf_holds = r.liminf_margin >= -tol;

  std::vector<std::size_t> order(horizons.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return horizons[a] < horizons[b]; });
  r.recovery_holds = true;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const double v = r.recovery_costs[order[i]];
    if (v > r.f_infinity + tol) r.recovery_holds = false;
    if (i > 0 && v < r.recovery_costs[order[i - 1]] - tol) r.recovery_holds = false;
  }
  return r;
}

} // namespace horizonlab
