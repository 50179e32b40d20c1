#include "horizonlab/pattern.hpp"

#include "horizonlab/types.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>

namespace horizonlab {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::vector<std::string> switched_descriptors(SwitchType type) {
  if (type == SwitchType::OneZero) return {"1", "0"};
  return {"0", "1"};
}

PatternRecord solve_switched(const SwitchedProblem& p, double T, const SweepOptions& opt) {
  PatternRecord r;
  r.T = T;
  const auto s = optimize_single_switch(p.pair, p.type, p.x0, T, opt.single);
  r.taus = {s.tau};
  r.values = switched_descriptors(p.type);
  r.cost = s.cost;
  r.flat_objective = s.flat_objective;
  if (opt.residuals) {
    const auto a = analyze_switched(p.pair.B1(), p.pair.B2(), single_switch_control(p.type, s.tau), p.x0, T, opt.cfg);
    r.residuals = a.residuals;
  }
  return r;
}

PatternRecord solve_vacc(const SirVaccProblem& p, double T, const SweepOptions& opt) {
  PatternRecord r;
  r.T = T;
  const auto s = optimize_vaccination(p.params, p.x0, T, opt.cfg, opt.sir);
  r.taus = {s.tau1};
  r.values = {"v_max", "0"};
  r.cost = s.cost;
  r.feasible = s.feasible;
  return r;
}

PatternRecord solve_npi(const SirNpiProblem& p, double T, const SweepOptions& opt) {
  PatternRecord r;
  r.T = T;
  const auto s = optimize_npi_mode(p.params, p.x0, T, p.mode, opt.cfg, opt.sir);
  r.taus = {s.control.tau1, s.control.tau2, s.control.tau3};
  r.values = {"beta", "beta_star", "arc:" + to_string(p.mode), "beta"};
  r.cost = s.cost;
  r.feasible = s.feasible;
  r.arc_max_dev = s.arc_max_dev;
  return r;
}

std::size_t tau_count(const Problem& p) {
  return std::holds_alternative<SirNpiProblem>(p) ? 3 : 1;
}

} // namespace

std::string problem_kind(const Problem& p) {
  return std::visit(Overloaded{[](const SwitchedProblem&) { return std::string("switched"); },
                               [](const SirVaccProblem&) { return std::string("sir_vacc"); },
                               [](const SirNpiProblem&) { return std::string("sir_npi"); }},
                    p);
}

std::string to_string(TauClass c) {
  switch (c) {
    case TauClass::Convergent: return "convergent";
    case TauClass::DivergentToInfinity: return "divergent";
    case TauClass::Undetermined: return "undetermined";
  }
  return "undetermined";
}

PatternRecord solve_at(const Problem& p, double T, const SweepOptions& opt) {
  if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("horizon must be positive and finite");
  return std::visit(Overloaded{[&](const SwitchedProblem& q) { return solve_switched(q, T, opt); },
                               [&](const SirVaccProblem& q) { return solve_vacc(q, T, opt); },
                               [&](const SirNpiProblem& q) { return solve_npi(q, T, opt); }},
                    p);
}

TauClass classify(std::span<const double> horizons, std::span<const double> taus, const SweepOptions& opt,
                  std::vector<double>* gaps_out) {
  const std::size_t n = taus.size();
  std::vector<double> gaps;
  for (std::size_t k = 0; k + 1 < n; ++k) gaps.push_back(std::abs(taus[k + 1] - taus[k]));
  if (gaps_out) *gaps_out = gaps;
  if (n < 2) return TauClass::Undetermined;

  const auto tracks_T = [&](std::size_t k) {
    return taus[k] >= horizons[k] * (1.0 - opt.divergence_tol);
  };
  if (tracks_T(n - 1) && tracks_T(n - 2)) return TauClass::DivergentToInfinity;

  if (!(gaps.back() < opt.gap_tol)) return TauClass::Undetermined;
  for (std::size_t k = 0; k + 1 < gaps.size(); ++k) {
    const double next = gaps[k + 1];
    if (next <= opt.noise_floor) continue;
    if (!(next * opt.decay_factor <= gaps[k])) return TauClass::Undetermined;
  }
  return TauClass::Convergent;
}

SweepResult sweep(const Problem& p, std::vector<double> horizons, const SweepOptions& opt) {
  if (horizons.size() < 3) throw ConfigError("sweep needs at least three horizons");
  std::sort(horizons.begin(), horizons.end());
  if (std::adjacent_find(horizons.begin(), horizons.end()) != horizons.end())
    throw ConfigError("sweep horizons must be distinct");
  opt.cfg.validate();

  SweepResult out;
  out.kind = problem_kind(p);
  out.records.resize(horizons.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < horizons.size(); k = next++) {
      try {
        out.records[k] = solve_at(p, horizons[k], opt);
      } catch (const std::exception& e) {
        PatternRecord r;
        r.T = horizons[k];
        r.feasible = false;
        r.error = e.what();
        out.records[k] = std::move(r);
      }
    }
  };
  const std::size_t jobs = std::clamp<std::size_t>(opt.jobs, 1, horizons.size());
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }

  std::vector<const PatternRecord*> good;
  std::vector<double> good_T;
  for (const auto& r : out.records) {
    if (r.feasible && r.error.empty() && !r.taus.empty()) {
      good.push_back(&r);
      good_T.push_back(r.T);
    } else {
      out.partial = true;
    }
  }

  const std::size_t m = tau_count(p);
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<double> seq;
    for (const auto* r : good) seq.push_back(r->taus[j]);
    std::vector<double> gaps;
    const TauClass c = classify(good_T, seq, opt, &gaps);
    std::vector<int> idx(gaps.size());
    for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = static_cast<int>(k);
    std::optional<double> limit;
    double tinf = seq.empty() ? kInf : seq.back();
    if (c == TauClass::DivergentToInfinity) tinf = kInf;
    if (c == TauClass::Convergent) limit = tinf;
    out.diagnostics.push_back(make_convergence_report(std::move(idx), std::move(gaps), limit));
    out.classes.push_back(c);
    out.tau_infinity.push_back(tinf);
  }
  return out;
}

// ---- certification ---------------------------------------------------------

namespace {

bool beats(double competitor, double extrapolated, const CertifyOptions& opt) {
  if (!std::isfinite(competitor)) return false;
  return extrapolated > competitor + opt.rtol * std::abs(competitor) + opt.atol;
}

void require_horizon(const std::vector<double>& tau, double T_cert) {
  double mx = 0.0;
  for (double t : tau) {
    if (std::isnan(t) || t < 0.0) throw ConfigError("tau_infinity entries must be nonnegative");
    if (std::isfinite(t)) mx = std::max(mx, t);
  }
  if (!(T_cert > 0.0) || !std::isfinite(T_cert)) throw ConfigError("T_cert must be positive and finite");
  if (T_cert < 2.0 * mx) throw ConfigError("T_cert must be at least twice the largest finite tau");
}

/// Fills perturbation competitors and the local probe from a cost of the tau vector.
void probe_and_perturb(CertificationReport& rep, const std::vector<double>& tau, double T_cert,
                       std::size_t budget, const CertifyOptions& opt,
                       const std::function<double(const std::vector<double>&)>& cost, bool ordered) {
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> anywhere(0.0, T_cert);
  for (std::size_t k = 0; k < budget; ++k) {
    std::vector<double> t = tau;
    for (double& v : t) {
      if (std::isfinite(v)) {
        v = std::clamp(v + opt.perturbation_radius * std::max(1.0, v) * unit(rng), 0.0, T_cert);
      } else {
        v = anywhere(rng);
      }
    }
    if (ordered) std::sort(t.begin(), t.end());
    rep.competitors.push_back({"perturbation_" + std::to_string(k), cost(t)});
  }

  for (std::size_t j = 0; j < tau.size(); ++j) {
    if (!std::isfinite(tau[j])) continue;
    std::pair<double, double> c{kInf, kInf};
    for (int side : {-1, 1}) {
      std::vector<double> t = tau;
      t[j] += side * opt.probe_step;
      const bool in_range = t[j] >= 0.0 && t[j] <= T_cert;
      const bool in_order = !ordered || std::is_sorted(t.begin(), t.end());
      const double v = in_range && in_order ? cost(t) : kInf;
      (side < 0 ? c.first : c.second) = v;
    }
    rep.local_probe.push_back(c);
    if (!(c.first > rep.extrapolated_cost) || !(c.second > rep.extrapolated_cost)) rep.local_minimum = false;
  }
}

void finish(CertificationReport& rep, const CertifyOptions& opt) {
  rep.best_competitor = kInf;
  bool beaten = false;
  for (const auto& c : rep.competitors) {
    rep.best_competitor = std::min(rep.best_competitor, c.cost);
    if (beats(c.cost, rep.extrapolated_cost, opt)) beaten = true;
  }
  rep.certified = std::isfinite(rep.extrapolated_cost) && !beaten;
}

CertificationReport certify_switched(const SwitchedProblem& p, const std::vector<double>& tau, double T_cert,
                                     std::size_t budget, const CertifyOptions& opt) {
  if (tau.size() != 1) throw ConfigError("switched pattern has one switching time");
  CertificationReport rep;
  const double tau_eff = std::min(tau[0], T_cert);
  rep.extrapolated_cost = single_switch_cost(p.pair, p.type, p.x0, T_cert, tau_eff);

  const auto tail = evaluate_truncated_infinite(switched_quadratic_cost(p.pair.dim()),
                                                ControlSystem::switched_from_pair(p.pair.A1(), p.pair.A2()),
                                                single_switch_control(p.type, tau[0]), p.x0, T_cert, opt.cfg);
  rep.tail_bound = tail.tail_bound;
  rep.tail_unknown = tail.tail_unknown;

  const auto N = static_cast<std::size_t>(std::ceil(T_cert / opt.relaxed_step - 1e-9));
  const auto relaxed = relaxed_direct_solve(p.pair, p.x0, T_cert, std::max<std::size_t>(N, 1), opt.cfg);
  rep.competitors.push_back({"relaxed", relaxed.cost});
  rep.relaxed_rel_diff =
      std::abs(rep.extrapolated_cost - relaxed.cost) / std::max(std::abs(relaxed.cost), 1e-300);
  if (relaxed.cost == 0.0 && rep.extrapolated_cost == 0.0) rep.relaxed_rel_diff = 0.0;

  const auto param = optimize_single_switch(p.pair, p.type, p.x0, T_cert);
  rep.competitors.push_back({"parametric", param.cost});

  probe_and_perturb(
      rep, tau, T_cert, budget, opt,
      [&](const std::vector<double>& t) { return single_switch_cost(p.pair, p.type, p.x0, T_cert, t[0]); }, false);
  return rep;
}

CertificationReport certify_vacc(const SirVaccProblem& p, const std::vector<double>& tau, double T_cert,
                                 std::size_t budget, const CertifyOptions& opt) {
  if (tau.size() != 1) throw ConfigError("vaccination pattern has one switching time");
  CertificationReport rep;
  const auto score = [&](const std::vector<double>& t) {
    const auto e = evaluate_vaccination(p.params, p.x0, T_cert, std::min(t[0], T_cert), opt.cfg,
                                        opt.sir.constraint_tol);
    return e.feasible ? e.cost : kInf;
  };
  rep.extrapolated_cost = score(tau);

  auto spec = sir_cost_spec(p.params);
  spec.state_margin = opt.sir.constraint_tol;
  const auto u = merge_controls(PiecewiseControl::constant(p.params.beta),
                                vaccination_control(p.params, std::min(tau[0], 2.0 * T_cert)));
  const auto tail = evaluate_truncated_infinite(spec, p.params.system(), u, p.x0, T_cert, opt.cfg);
  rep.tail_bound = tail.tail_bound;
  rep.tail_unknown = tail.tail_unknown;

  const auto param = optimize_vaccination(p.params, p.x0, T_cert, opt.cfg, opt.sir);
  rep.competitors.push_back({"parametric", param.feasible ? param.cost : kInf});
  probe_and_perturb(rep, tau, T_cert, budget, opt, score, false);
  return rep;
}

CertificationReport certify_npi(const SirNpiProblem& p, const std::vector<double>& tau, double T_cert,
                                std::size_t budget, const CertifyOptions& opt) {
  if (tau.size() != 3) throw ConfigError("NPI pattern has three switching times");
  CertificationReport rep;
  const auto score = [&](const std::vector<double>& t) {
    const NpiControl c{std::min(t[0], T_cert), std::min(t[1], T_cert), std::min(t[2], T_cert), p.mode};
    const auto e = evaluate_npi(p.params, c, p.x0, T_cert, opt.cfg, opt.sir.constraint_tol);
    return e.feasible ? e.cost : kInf;
  };
  rep.extrapolated_cost = score(tau);

  // With lambda_i = 0 the integrand lambda_b (beta - b) vanishes after tau3.
  if (std::isfinite(tau[2]) && tau[2] <= T_cert) {
    rep.tail_bound = 0.0;
  } else {
    rep.tail_unknown = true;
  }

  const auto param = optimize_npi_mode(p.params, p.x0, T_cert, p.mode, opt.cfg, opt.sir);
  rep.competitors.push_back({"parametric", param.feasible ? param.cost : kInf});
  probe_and_perturb(rep, tau, T_cert, budget, opt, score, true);
  return rep;
}

} // namespace

CertificationReport certify_limit(const Problem& p, const std::vector<double>& tau_infinity, double T_cert,
                                  std::size_t competitor_budget, const CertifyOptions& opt) {
  require_horizon(tau_infinity, T_cert);
  opt.cfg.validate();
  CertificationReport rep = std::visit(
      Overloaded{
          [&](const SwitchedProblem& q) { return certify_switched(q, tau_infinity, T_cert, competitor_budget, opt); },
          [&](const SirVaccProblem& q) { return certify_vacc(q, tau_infinity, T_cert, competitor_budget, opt); },
          [&](const SirNpiProblem& q) { return certify_npi(q, tau_infinity, T_cert, competitor_budget, opt); }},
      p);
  rep.kind = problem_kind(p);
  rep.T_cert = T_cert;
  rep.tau_infinity = tau_infinity;
  finish(rep, opt);
  return rep;
}

// ---- pattern extraction ----------------------------------------------------

namespace {

struct Piece {
  double a, b, v;
  bool frac;
};

void merge_equal(std::vector<Piece>& ps) {
  std::vector<Piece> out;
  for (const auto& p : ps) {
    if (p.b <= p.a) continue;
    if (!out.empty() && out.back().v == p.v && out.back().frac == p.frac) {
      out.back().b = p.b;
    } else {
      out.push_back(p);
    }
  }
  ps = std::move(out);
}

ExtractedPattern extract_pieces(std::vector<Piece> ps, double snap_tol, double min_length, double lo, double hi) {
  if (!(hi > lo)) throw ConfigError("extract_pattern needs lo < hi");
  const double band = snap_tol * (hi - lo);
  for (auto& p : ps) {
    if (std::abs(p.v - lo) <= band) {
      p.v = lo;
      p.frac = false;
    } else if (std::abs(p.v - hi) <= band) {
      p.v = hi;
      p.frac = false;
    } else {
      p.frac = true;
    }
  }
  merge_equal(ps);

  for (std::size_t i = 0; i < ps.size();) {
    if (!ps[i].frac) {
      ++i;
      continue;
    }
    const bool has_prev = i > 0 && !ps[i - 1].frac;
    const bool has_next = i + 1 < ps.size() && !ps[i + 1].frac;
    const double len = ps[i].b - ps[i].a;
    if (has_prev && has_next && ps[i - 1].v != ps[i + 1].v && std::isfinite(len)) {
      // Replace by a switch carrying the same integral.
      const double w = (ps[i].v - lo) / (hi - lo);
      const double hi_share = ps[i - 1].v == hi ? w : 1.0 - w;
      const double tau = ps[i].a + hi_share * len;
      ps[i - 1].b = tau;
      ps[i + 1].a = tau;
      ps.erase(ps.begin() + static_cast<std::ptrdiff_t>(i));
      continue;
    }
    if (len < min_length && (i > 0 || i + 1 < ps.size())) {
      if (i > 0) {
        ps[i - 1].b = ps[i].b;
      } else {
        ps[i + 1].a = ps[i].a;
      }
      ps.erase(ps.begin() + static_cast<std::ptrdiff_t>(i));
      merge_equal(ps);
      i = 0;
      continue;
    }
    ++i;
  }
  merge_equal(ps);

  ExtractedPattern out;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (i > 0) out.taus.push_back(ps[i].a);
    out.values.push_back(ps[i].v);
  }
  out.N = out.values.size();
  return out;
}

} // namespace

ExtractedPattern extract_pattern(const PiecewiseControl& u, double snap_tol, double min_length, double lo,
                                 double hi) {
  if (u.dim() != 1) throw ConfigError("extract_pattern needs a scalar control");
  std::vector<Piece> ps;
  const auto& bp = u.breakpoints();
  for (std::size_t i = 0; i < u.intervals(); ++i) ps.push_back({bp[i], bp[i + 1], u.values()[i](0), false});
  ps.push_back({u.end(), kInf, u.tail()(0), false});
  return extract_pieces(std::move(ps), snap_tol, min_length, lo, hi);
}

ExtractedPattern extract_pattern(std::span<const double> t, std::span<const double> v, double snap_tol,
                                 double min_length, double lo, double hi) {
  if (t.empty() || t.size() != v.size()) throw ConfigError("grid control needs matching, non-empty t and v");
  std::vector<Piece> ps;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double b = i + 1 < t.size() ? t[i + 1] : kInf;
    ps.push_back({t[i], b, v[i], false});
  }
  return extract_pieces(std::move(ps), snap_tol, min_length, lo, hi);
}

PiecewiseControl to_control(const ExtractedPattern& p) {
  if (p.values.empty() || p.values.size() != p.taus.size() + 1) throw ConfigError("malformed pattern");
  std::vector<double> bp{0.0};
  std::vector<Vec> vals;
  for (std::size_t i = 0; i < p.taus.size(); ++i) {
    bp.push_back(p.taus[i]);
    vals.push_back(Vec::Constant(1, p.values[i]));
  }
  return PiecewiseControl(std::move(bp), std::move(vals), Vec::Constant(1, p.values.back()));
}

} // namespace horizonlab
