#include "horizonlab/sir.hpp"

#include "horizonlab/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

namespace horizonlab {

void SirParams::validate() const {
  if (!(beta_star > 0.0 && beta_star <= beta && beta < 1.0))
    throw ConfigError("SIR rates must satisfy 0 < beta_star <= beta < 1");
  if (!(gamma > 0.0) || !(v_max > 0.0)) throw ConfigError("SIR gamma and v_max must be positive");
  if (!(i_max > 0.0 && i_max <= 1.0)) throw ConfigError("SIR i_max must lie in (0, 1]");
  if (lambda_b < 0.0 || lambda_v < 0.0 || lambda_i < 0.0) throw ConfigError("SIR cost weights must be nonnegative");
}

ControlSystem SirParams::system() const { return ControlSystem::sir(beta_star, beta, gamma, v_max); }

void check_unit_triangle(const Vec& x0) {
  constexpr double tol = 1e-12;
  if (x0.size() != 2) throw ConfigError("SIR initial condition must have two entries (s, i)");
  if (!x0.allFinite() || x0(0) < -tol || x0(1) < -tol || x0(0) + x0(1) > 1.0 + tol)
    throw DomainError("initial condition outside unit triangle");
}

double sir_first_integral(double s, double i, double gamma, double b) { return s + i - (gamma / b) * std::log(s); }

PiecewiseControl merge_controls(const PiecewiseControl& b, const PiecewiseControl& v) {
  if (b.dim() != 1 || v.dim() != 1) throw ConfigError("merge_controls: scalar controls expected");
  std::vector<double> bp = b.breakpoints();
  bp.insert(bp.end(), v.breakpoints().begin(), v.breakpoints().end());
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
  std::vector<Vec> vals;
  for (std::size_t j = 0; j + 1 < bp.size(); ++j) {
    const double m = 0.5 * (bp[j] + bp[j + 1]);
    Vec u(2);
    u << b.eval_scalar(m), v.eval_scalar(m);
    vals.push_back(u);
  }
  if (vals.empty()) {
    // both controls are pure tails
    Vec u(2);
    u << b.tail()(0), v.tail()(0);
    return PiecewiseControl::constant(u);
  }
  Vec tail(2);
  tail << b.tail()(0), v.tail()(0);
  return PiecewiseControl(std::move(bp), std::move(vals), tail);
}

namespace {

void check_box(const PiecewiseControl& u, double lo, double hi, const char* name) {
  constexpr double tol = 1e-12;
  auto ok = [&](const Vec& x) { return x(0) >= lo - tol && x(0) <= hi + tol; };
  const auto& bp = u.breakpoints();
  for (std::size_t j = 0; j < u.values().size(); ++j)
    if (bp[j + 1] > bp[j] && !ok(u.values()[j]))
      throw ConfigError(std::string("SIR control ") + name + " leaves its admissible interval");
  if (!ok(u.tail())) throw ConfigError(std::string("SIR control ") + name + " leaves its admissible interval");
}

using RateFn = std::function<double(double t, const Vec& z)>;

// One constant-structure piece of an SIR run on [start, end).
struct Phase {
  double end;
  RateFn b;
  double v;
};

// z = (s, i, c), c the accumulated running cost.
void sir_rhs(const SirParams& p, double b, double v, const Vec& z, Vec& dz) {
  dz.resize(3);
  const double s = z(0), i = z(1);
  dz(0) = -b * s * i - v * s;
  dz(1) = b * s * i - p.gamma * i;
  dz(2) = p.lambda_b * (p.beta - b) + p.lambda_v * v + p.lambda_i * i;
}

// Run on [t0, phases.back().end]; node times are relative to t0.
struct Run {
  std::optional<Trajectory> z;
  double t0 = 0.0;
  std::vector<double> ends;  // absolute phase ends (non-empty phases only)
  std::vector<const Phase*> used;
};

Run run_phases(const SirParams& p, const Vec& z0, double t0, const std::vector<Phase>& phases, double output_step,
               const IntegratorConfig& cfg) {
  Run r;
  r.t0 = t0;
  double a = t0;
  for (const auto& ph : phases) {
    if (ph.end > a) {
      r.ends.push_back(ph.end);
      r.used.push_back(&ph);
      a = ph.end;
    }
  }
  if (r.used.empty()) return r;
  const double L = r.ends.back() - t0;
  std::vector<double> rel;
  for (std::size_t k = 0; k + 1 < r.ends.size(); ++k) rel.push_back(r.ends[k] - t0);
  const auto times = make_output_times(L, rel, output_step);
  SegmentField f = [&](std::size_t k, double t, const Vec& z, Vec& dz) {
    const Phase& ph = *r.used[std::min(k, r.used.size() - 1)];
    const double b = std::clamp(ph.b(t + t0, z), p.beta_star, p.beta);
    sir_rhs(p, b, ph.v, z, dz);
  };
  r.z = integrate_field(f, z0, times, rel, cfg);
  if (r.z->escaped() || !r.z->states.allFinite()) throw NumericalError("SIR integration produced non-finite states");
  return r;
}

bool empty(const Run& r) { return r.used.empty(); }

// Concatenates runs (first must start at 0) into one absolute-time trajectory.
Trajectory stitch(const std::vector<const Run*>& runs, const Vec& z0) {
  std::vector<double> t{0.0};
  std::vector<Vec> z{z0};
  std::vector<std::size_t> breaks;
  for (const Run* r : runs) {
    if (empty(*r)) continue;
    if (t.size() > 1) breaks.push_back(t.size() - 1);
    for (std::size_t b : r->z->breaks) breaks.push_back(t.size() - 1 + b);
    for (std::size_t i = 1; i < r->z->size(); ++i) {
      t.push_back(r->t0 + r->z->t(i));
      z.push_back(r->z->x(i));
    }
  }
  if (t.size() < 2) {
    t.push_back(1e-300);
    z.push_back(z0);
  }
  Trajectory out{TimeGrid(t), Mat(z0.size(), static_cast<Eigen::Index>(t.size())), std::nullopt, breaks};
  for (std::size_t i = 0; i < z.size(); ++i) out.states.col(static_cast<Eigen::Index>(i)) = z[i];
  return out;
}

SirEvaluation summarize(const SirParams& p, const Trajectory& z, double constraint_tol) {
  const double max_i = z.states.row(1).maxCoeff();
  return {Trajectory{z.grid, z.states.topRows(2), std::nullopt, z.breaks}, z.states(2, z.states.cols() - 1), max_i,
          max_i <= p.i_max + constraint_tol};
}

Vec augment(const Vec& x0) {
  Vec z(3);
  z << x0(0), x0(1), 0.0;
  return z;
}

RateFn constant_rate(double b) {
  return [b](double, const Vec&) { return b; };
}

// Cubic Hermite value of a run at absolute time t, using the exact field of
// the phase that contains the bracketing node interval.
Vec hermite_at(const SirParams& p, const Run& r, double t) {
  const Trajectory& z = *r.z;
  const auto& nodes = z.grid.nodes();
  const double rt = std::clamp(t - r.t0, 0.0, nodes.back());
  std::size_t i = z.grid.locate(rt);
  const double h = nodes[i + 1] - nodes[i];
  const double s = (rt - nodes[i]) / h;
  // phase of the interval (i, i+1)
  const double mid = r.t0 + nodes[i] + 0.5 * h;
  std::size_t k = 0;
  while (k + 1 < r.ends.size() && mid >= r.ends[k]) ++k;
  const Phase& ph = *r.used[k];
  auto deriv = [&](std::size_t j) {
    Vec d;
    const Vec zj = z.x(j);
    sir_rhs(p, std::clamp(ph.b(r.t0 + nodes[j], zj), p.beta_star, p.beta), ph.v, zj, d);
    return d;
  };
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * z.x(i) + (s3 - 2 * s2 + s) * h * deriv(i) + (-2 * s3 + 3 * s2) * z.x(i + 1) +
         (s3 - s2) * h * deriv(i + 1);
}

} // namespace

Trajectory sir_simulate(const SirParams& p, const PiecewiseControl& b, const PiecewiseControl& v, const Vec& x0,
                        double T, const IntegratorConfig& cfg) {
  p.validate();
  check_unit_triangle(x0);
  check_box(b, p.beta_star, p.beta, "b");
  check_box(v, 0.0, p.v_max, "v");
  return integrate(p.system(), merge_controls(b, v), x0, T, cfg);
}

CostSpec sir_cost_spec(const SirParams& p) {
  CostSpec c;
  c.l1 = [li = p.lambda_i](double, const Vec& x) { return li * x(1); };
  c.l2 = [p](double, const Vec&, const Vec& u) { return p.lambda_b * (p.beta - u(0)) + p.lambda_v * u(1); };
  c.p = kInf;
  Vec lo(2), hi(2);
  lo << p.beta_star, 0.0;
  hi << p.beta, p.v_max;
  c.U = BoxSet{lo, hi};
  Vec nrm(2);
  nrm << 0.0, 1.0;
  c.X = HalfspaceSet{nrm, p.i_max};
  Vec ug(2);
  ug << p.beta, 0.0;
  c.greedy = [ug](double, const Vec&) { return ug; };
  return c;
}

TriangleReport triangle_invariance_check(const SirParams& p, std::size_t trials, std::uint64_t seed,
                                         const IntegratorConfig& cfg, double T, std::size_t intervals) {
  if (trials == 0) throw ConfigError("triangle_invariance_check: trials must be >= 1");
  p.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  TriangleReport rep;
  rep.trials = trials;
  for (std::size_t k = 0; k < trials; ++k) {
    double s = U(rng), i = U(rng);
    if (s + i > 1.0) {
      s = 1.0 - s;
      i = 1.0 - i;
    }
    Vec x0(2);
    x0 << s, i;
    std::vector<double> bv(intervals), vv(intervals);
    for (std::size_t j = 0; j < intervals; ++j) {
      bv[j] = p.beta_star + (p.beta - p.beta_star) * U(rng);
      vv[j] = p.v_max * U(rng);
    }
    const auto b = PiecewiseControl::uniform(T, bv, bv.back());
    const auto v = PiecewiseControl::uniform(T, vv, vv.back());
    const Trajectory x = sir_simulate(p, b, v, x0, T, cfg);
    double prev = kInf;
    for (std::size_t n = 0; n < x.size(); ++n) {
      const double sn = x.states(0, static_cast<Eigen::Index>(n)), in = x.states(1, static_cast<Eigen::Index>(n));
      rep.max_violation = std::max({rep.max_violation, -sn, -in, sn + in - 1.0});
      if (n > 0) rep.max_sum_increase = std::max(rep.max_sum_increase, sn + in - prev);
      prev = sn + in;
    }
  }
  rep.sum_nonincreasing = rep.max_sum_increase <= 1e-12;
  return rep;
}

// ---- vaccination ------------------------------------------------------------

PiecewiseControl vaccination_control(const SirParams& p, double tau1) {
  if (tau1 <= 0.0) return PiecewiseControl::constant(0.0);
  return PiecewiseControl({0.0, tau1}, {Vec::Constant(1, p.v_max)}, Vec::Zero(1));
}

SirEvaluation evaluate_vaccination(const SirParams& p, const Vec& x0, double T, double tau1,
                                   const IntegratorConfig& cfg, double constraint_tol) {
  p.validate();
  check_unit_triangle(x0);
  if (!(T > 0.0)) throw ConfigError("evaluate_vaccination: horizon must be positive");
  tau1 = std::clamp(tau1, 0.0, T);
  const std::vector<Phase> phases{{tau1, constant_rate(p.beta), p.v_max}, {T, constant_rate(p.beta), 0.0}};
  const Run r = run_phases(p, augment(x0), 0.0, phases, cfg.output_step, cfg);
  return summarize(p, stitch({&r}, augment(x0)), constraint_tol);
}

VaccinationResult optimize_vaccination(const SirParams& p, const Vec& x0, double T, const IntegratorConfig& cfg,
                                       const SirSolveOptions& opt) {
  VaccinationResult res;
  auto f = [&](double tau) {
    ++res.evaluations;
    const auto e = evaluate_vaccination(p, x0, T, tau, cfg, opt.constraint_tol);
    return e.feasible ? e.cost : kInf;
  };
  const auto best = grid_then_golden(f, 0.0, T, {std::max<std::size_t>(opt.coarse_points, 3), opt.xtol});
  res.tau1 = best.x;
  const auto e = evaluate_vaccination(p, x0, T, best.x, cfg, opt.constraint_tol);
  res.cost = e.feasible ? e.cost : kInf;
  res.feasible = e.feasible;
  res.max_i = e.max_i;
  res.slack = p.i_max - e.max_i;
  return res;
}

// ---- NPI ----------------------------------------------------------------------

std::string to_string(Arc3Mode m) {
  return m == Arc3Mode::FeedbackKeepIM ? "feedback_keep_iM" : "formula_as_printed";
}

Arc3Mode parse_arc3_mode(const std::string& s) {
  if (s == "feedback_keep_iM") return Arc3Mode::FeedbackKeepIM;
  if (s == "formula_as_printed") return Arc3Mode::FormulaAsPrinted;
  throw ConfigError("unknown arc3_mode '" + s + "' (expected feedback_keep_iM or formula_as_printed)");
}

double arc3_rate(const SirParams& p, Arc3Mode mode, double s2, double tau2, double t, double s) {
  double b;
  if (mode == Arc3Mode::FeedbackKeepIM) {
    b = s > 0.0 ? p.gamma / s : p.beta;
  } else {
    const double den = s2 + p.gamma * p.i_max * (tau2 - t);
    b = den > 0.0 ? p.beta - p.gamma / den : p.beta_star;
  }
  return std::clamp(b, p.beta_star, p.beta);
}

namespace {

std::vector<Phase> prefix_phases(const SirParams& p, double tau1, double end) {
  return {{tau1, constant_rate(p.beta), 0.0}, {end, constant_rate(p.beta_star), 0.0}};
}

Phase arc_phase(const SirParams& p, Arc3Mode mode, double s2, double tau2, double end) {
  return {end, [&p, mode, s2, tau2](double t, const Vec& z) { return arc3_rate(p, mode, s2, tau2, t, z(0)); }, 0.0};
}

// Largest i reached after releasing to b = beta (v = 0) from (s, i).
double release_peak(const SirParams& p, double s, double i) {
  if (p.beta * s <= p.gamma || s <= 0.0) return i;
  return i + s - (p.gamma / p.beta) * (1.0 + std::log(p.beta * s / p.gamma));
}

} // namespace

NpiEvaluation evaluate_npi(const SirParams& p, const NpiControl& c, const Vec& x0, double T,
                           const IntegratorConfig& cfg, double constraint_tol) {
  p.validate();
  check_unit_triangle(x0);
  if (!(T > 0.0)) throw ConfigError("evaluate_npi: horizon must be positive");
  if (!(0.0 <= c.tau1 && c.tau1 <= c.tau2 && c.tau2 <= c.tau3))
    throw ConfigError("NPI switching times must satisfy 0 <= tau1 <= tau2 <= tau3");
  const double t1 = std::min(c.tau1, T), t2 = std::min(c.tau2, T), t3 = std::min(c.tau3, T);
  const Vec z0 = augment(x0);
  const auto pre = prefix_phases(p, t1, t2);
  const Run a = run_phases(p, z0, 0.0, pre, cfg.output_step, cfg);
  const Vec z2 = empty(a) ? z0 : Vec(a.z->x(a.z->size() - 1));
  const std::vector<Phase> post{arc_phase(p, c.mode, z2(0), t2, t3), {T, constant_rate(p.beta), 0.0}};
  const Run b = run_phases(p, z2, t2, post, cfg.output_step, cfg);
  const Trajectory z = stitch({&a, &b}, z0);

  NpiEvaluation e{summarize(p, z, constraint_tol), 0.0};
  for (std::size_t n = 0; n < z.size(); ++n) {
    if (z.t(n) > t2 && z.t(n) < t3) e.arc_max_dev = std::max(e.arc_max_dev, std::abs(z.states(1, static_cast<Eigen::Index>(n)) - p.i_max));
  }
  return e;
}

namespace {

class NpiSearch {
public:
  NpiSearch(const SirParams& p, const Vec& x0, double T, Arc3Mode mode, const IntegratorConfig& cfg,
            const SirSolveOptions& opt)
      : p_(p), z0_(augment(x0)), T_(T), mode_(mode), cfg_(cfg), opt_(opt) {}

  struct Candidate {
    double cost = kInf;
    double tau1 = 0.0, tau2 = 0.0, tau3 = 0.0;
    double theta = 0.0;
  };

  // First time i reaches i_max on the run after `from` (T if never).
  double hit_time(const Run& r, double from) const {
    const auto& nodes = r.z->grid.nodes();
    for (std::size_t k = 1; k < nodes.size(); ++k) {
      if (r.t0 + nodes[k] <= from) continue;
      if (r.z->states(1, static_cast<Eigen::Index>(k)) >= p_.i_max) {
        const double lo = std::max(from, r.t0 + nodes[k - 1]), hi = r.t0 + nodes[k];
        return bisect_predicate([&](double t) { return hermite_at(p_, r, t)(1) >= p_.i_max; }, lo, hi, 1e-13 * (1.0 + T_));
      }
    }
    return T_;
  }

  // Prefix run for tau1 (beta, then beta_star up to T), cached by tau1.
  const Run& prefix(double tau1) {
    if (!cached_ || cached_tau1_ != tau1) {
      phases_ = prefix_phases(p_, tau1, T_);
      run_ = run_phases(p_, z0_, 0.0, phases_, opt_.search_output_step, cfg_);
      cached_tau1_ = tau1;
      cached_ = true;
      prefix_ok_ = true;
      for (std::size_t k = 0; k < run_.z->size() && run_.z->t(k) <= tau1; ++k)
        if (run_.z->states(1, static_cast<Eigen::Index>(k)) > p_.i_max) prefix_ok_ = false;
      hit_ = prefix_ok_ ? hit_time(run_, tau1) : tau1;
    }
    return run_;
  }

  Candidate eval(double tau1, double theta) {
    ++evaluations;
    Candidate c;
    const Run& a = prefix(tau1);
    if (!prefix_ok_) return c;
    const double tau2 = tau1 + std::clamp(theta, 0.0, 1.0) * (hit_ - tau1);
    const Vec z2 = tau2 > 0.0 ? hermite_at(p_, a, tau2) : z0_;
    c.tau1 = tau1;
    c.tau2 = tau2;
    c.theta = std::clamp(theta, 0.0, 1.0);
    if (tau2 >= T_) {
      c.tau3 = T_;
      c.cost = z2(2);
      return c;
    }
    const std::vector<Phase> post{arc_phase(p_, mode_, z2(0), tau2, T_)};
    const Run b = run_phases(p_, z2, tau2, post, opt_.search_output_step, cfg_);
    const double lim = p_.i_max;  // strict inside the search, tolerance only for the final check
    auto release_ok = [&](const Vec& z) { return release_peak(p_, z(0), z(1)) <= lim; };

    const auto& nodes = b.z->grid.nodes();
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      const Vec zk = b.z->x(k);
      if (zk(1) > lim) return c;  // the arc itself breaks the constraint
      if (!release_ok(zk)) continue;
      double t3 = tau2 + nodes[k];
      if (k > 0) {
        const double lo = tau2 + nodes[k - 1];
        t3 = bisect_predicate([&](double t) { return release_ok(hermite_at(p_, b, t)); }, lo, t3, 1e-12 * (1.0 + T_));
      }
      c.tau3 = t3;
      c.cost = k == 0 ? z2(2) : hermite_at(p_, b, t3)(2);
      return c;
    }
    return c;
  }

  std::size_t evaluations = 0;

private:
  const SirParams& p_;
  Vec z0_;
  double T_;
  Arc3Mode mode_;
  const IntegratorConfig& cfg_;
  const SirSolveOptions& opt_;
  std::vector<Phase> phases_;
  Run run_;
  bool cached_ = false;
  double cached_tau1_ = 0.0;
  bool prefix_ok_ = false;
  double hit_ = 0.0;
};

} // namespace

NpiSolution optimize_npi_mode(const SirParams& p, const Vec& x0, double T, Arc3Mode mode,
                              const IntegratorConfig& cfg, const SirSolveOptions& opt) {
  p.validate();
  check_unit_triangle(x0);
  if (p.lambda_i != 0.0) throw ConfigError("NPI problem requires lambda_i = 0");
  if (!(T > 0.0)) throw ConfigError("optimize_npi: horizon must be positive");

  NpiSolution sol;
  sol.control.mode = mode;
  auto finish = [&](const NpiControl& c) {
    sol.control = c;
    const auto e = evaluate_npi(p, c, x0, T, cfg, opt.constraint_tol);
    sol.cost = e.feasible ? e.cost : kInf;
    sol.feasible = e.feasible;
    sol.max_i = e.max_i;
    sol.arc_max_dev = e.arc_max_dev;
    sol.saturates = c.tau3 > c.tau2 + 1e-9 && e.arc_max_dev < 1e-4;
    return sol;
  };

  // no intervention at all
  const auto free_run = evaluate_npi(p, {0.0, 0.0, 0.0, mode}, x0, T, cfg, opt.constraint_tol);
  if (free_run.feasible) return finish({0.0, 0.0, 0.0, mode});

  NpiSearch search(p, x0, T, mode, cfg, opt);
  const double tau1_max = search.hit_time(search.prefix(T), 0.0);

  NpiSearch::Candidate best;
  auto consider = [&](const NpiSearch::Candidate& c) {
    if (c.cost < best.cost) best = c;
  };
  const std::size_t n1 = 24, n2 = 12;
  for (std::size_t a = 0; a < n1; ++a) {
    const double tau1 = tau1_max * static_cast<double>(a) / static_cast<double>(n1 - 1);
    for (std::size_t b = 0; b < n2; ++b) consider(search.eval(tau1, static_cast<double>(b) / static_cast<double>(n2 - 1)));
  }
  if (std::isfinite(best.cost)) {
    double w1 = tau1_max / static_cast<double>(n1 - 1), w2 = 1.0 / static_cast<double>(n2 - 1);
    for (int sweep = 0; sweep < 4; ++sweep) {
      const double tau1 = best.tau1, theta = best.theta;
      golden_section(
          [&](double th) {
            const auto c = search.eval(tau1, th);
            consider(c);
            return c.cost;
          },
          std::max(0.0, theta - w2), std::min(1.0, theta + w2), opt.xtol);
      const double theta_now = best.theta;
      golden_section(
          [&](double t1) {
            const auto c = search.eval(t1, theta_now);
            consider(c);
            return c.cost;
          },
          std::max(0.0, best.tau1 - w1), std::min(tau1_max, best.tau1 + w1), opt.xtol * (1.0 + T));
      w1 *= 0.5;
      w2 *= 0.5;
    }
  }
  sol.evaluations = search.evaluations;
  if (!std::isfinite(best.cost)) {
    sol.feasible = false;
    sol.cost = kInf;
    return sol;
  }
  const std::size_t evals = sol.evaluations;
  NpiControl c{best.tau1, best.tau2, best.tau3, mode};
  if (mode == Arc3Mode::FeedbackKeepIM && c.tau3 > c.tau2) {
    // While gamma / s < beta_star the feedback rate is clipped to beta_star and
    // the arc is the lockdown phase in disguise; start the arc where it binds.
    const auto e = evaluate_npi(p, c, x0, T, cfg, opt.constraint_tol);
    const double s_star = p.gamma / p.beta_star;
    if (e.x.at(c.tau2)(0) > s_star) {
      const double t = bisect_predicate([&](double tt) { return e.x.at(tt)(0) <= s_star; }, c.tau2, c.tau3,
                                        1e-12 * (1.0 + T));
      c.tau2 = std::min(t, c.tau3);
    }
  }
  finish(c);
  sol.evaluations = evals;
  return sol;
}

NpiReport optimize_npi(const SirParams& p, const Vec& x0, double T, const IntegratorConfig& cfg,
                       const SirSolveOptions& opt) {
  NpiReport r;
  r.feedback = optimize_npi_mode(p, x0, T, Arc3Mode::FeedbackKeepIM, cfg, opt);
  r.printed = optimize_npi_mode(p, x0, T, Arc3Mode::FormulaAsPrinted, cfg, opt);
  if (r.feedback.saturates) r.saturating = Arc3Mode::FeedbackKeepIM;
  else if (r.printed.saturates) r.saturating = Arc3Mode::FormulaAsPrinted;
  return r;
}

} // namespace horizonlab
