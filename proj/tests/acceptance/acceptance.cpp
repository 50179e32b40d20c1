// Acceptance harness: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "commands.hpp"
#include "fixtures.hpp"

#include "horizonlab/costs.hpp"
#include "horizonlab/gammalab.hpp"
#include "horizonlab/pattern.hpp"
#include "horizonlab/pmp.hpp"
#include "horizonlab/sir.hpp"
#include "horizonlab/switched.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

using namespace horizonlab;
using horizonlab::testing::certified_pair;
using horizonlab::testing::certified_x0;
using horizonlab::testing::vec;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome closed_form_integration() {
  std::mt19937_64 rng(1);
  IntegratorConfig cfg;
  double worst = 0.0, slowest = 0.0;
  for (Eigen::Index n : {2, 3}) {
    for (int trial = 0; trial < 5; ++trial) {
      const auto pair = horizonlab::testing::random_commuting_pair(n, rng);
      const auto u = horizonlab::testing::random_bang_control(10.0, rng);
      const Vec x0 = Vec::Ones(n);
      const auto t0 = std::chrono::steady_clock::now();
      const auto x = integrate(ControlSystem::switched_linear(pair.B1(), pair.B2()), u, x0, 10.0, cfg);
      double err = 0.0, scale = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const Vec e = commuting_switched_solution(pair.B1(), pair.B2(), u, x0, x.t(i));
        err = std::max(err, (x.x(i) - e).norm());
        scale = std::max(scale, e.norm());
      }
      slowest = std::max(slowest, seconds_since(t0));
      worst = std::max(worst, err / scale);
    }
  }
  return {worst < 1e-6 && slowest < 1.0, fmt("max rel sup error %.2e", worst) + fmt(", slowest case %.3f s", slowest)};
}

Outcome blowup_reproduction() {
  const auto r = blowup_probe({1.0, 0.5, 0.1}, IntegratorConfig{});
  bool ok = r.limit_global && r.limit_max_dev == 0.0;
  double worst = 0.0;
  for (const auto& e : r.entries) {
    ok = ok && e.escape_time.has_value() && e.relative_error < 0.01;
    worst = std::max(worst, e.relative_error);
  }
  return {ok, fmt("max |r t_esc - 1| = %.2e", worst) + fmt(", limit max |x - 1| = %g", r.limit_max_dev)};
}

Outcome closure_decay() {
  const auto pair = certified_pair();
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = closure_probe(ControlSystem::switched_from_pair(pair.A1(), pair.A2()), WeakStarSequence{},
                               {4, 16, 64, 256}, certified_x0(), 5.0, IntegratorConfig{});
  const double dt = seconds_since(t0);
  const bool ok = r.report.monotone_decreasing && r.gaps.back() < 0.1 * r.gaps.front() && dt < 10.0;
  std::string d = "gaps";
  for (double g : r.gaps) d += fmt(" %.3e", g);
  return {ok, d + fmt(", %.2f s", dt)};
}

Outcome condition_consistency() {
  Mat A(2, 2);
  A << -1.0, 0.3, 0.2, -0.5;
  const auto vac = check_condition(SwitchedPair(A + Mat::Identity(2, 2), A), SwitchType::OneZero);
  const auto fail = check_condition(SwitchedPair(A, A), SwitchType::OneZero);
  const auto pair = certified_pair();
  const auto hold = check_condition(pair, SwitchType::OneZero);

  bool oracle_ok = hold.finsler_mu.has_value();
  std::size_t near_null = 0;
  if (oracle_ok) {
    const Mat S = sym(pair.A1() - pair.A2());
    const Mat Q1 = sym(S * pair.A1()), Q2 = sym(S * pair.A2());
    const auto lmin = [](const Mat& m) { return Eigen::SelfAdjointEigenSolver<Mat>(m).eigenvalues()(0); };
    oracle_ok = lmin(Q1 + hold.finsler_mu->first * S) > 0.0 && lmin(Q2 + hold.finsler_mu->second * S) > 0.0;
    const Mat X = sphere_points(2, 1u << 16);
    const double eps = 1e-4;
    for (Eigen::Index k = 0; k < X.cols(); ++k) {
      const Vec x = X.col(k);
      if (std::abs(x.dot(S * x)) >= eps) continue;
      ++near_null;
      if (x.dot(Q1 * x) <= eps || x.dot(Q2 * x) <= eps) oracle_ok = false;
    }
    oracle_ok = oracle_ok && near_null > 0;
  }
  const bool ok = vac.verdict == Verdict::Vacuous && fail.verdict == Verdict::Fails && fail.witness.has_value() &&
                  hold.verdict == Verdict::Holds && oracle_ok;
  std::string d = "verdicts " + to_string(vac.verdict) + "/" + to_string(fail.verdict) + "/" + to_string(hold.verdict);
  if (hold.finsler_mu)
    d += fmt(", mu = (%.4f", hold.finsler_mu->first) + fmt(", %.4f)", hold.finsler_mu->second);
  return {ok, d + ", " + std::to_string(near_null) + " near-null oracle samples"};
}

Outcome single_switch_structure() {
  const auto pair = certified_pair();
  const Vec x0 = certified_x0();
  const double T = 10.0;
  const std::size_t N = 200;
  IntegratorConfig cfg;
  const auto rx = relaxed_direct_solve(pair, x0, T, N, cfg);
  const auto par = optimize_single_switch(pair, SwitchType::OneZero, x0, T);
  const auto pat = extract_pattern(rx.control, 0.05, 2.0 * T / N);
  const double rel = std::abs(rx.cost - par.cost) / par.cost;

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst_grad = 0.0;
  const std::size_t M = 20;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> v(M);
    for (auto& x : v) x = unit(rng);
    const auto g = relaxed_gradient(pair, x0, T, v, cfg);
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < M; ++j) {
      auto up = v, dn = v;
      up[j] += 1e-6;
      dn[j] -= 1e-6;
      const double fd = (piecewise_cost(pair, x0, T, up) - piecewise_cost(pair, x0, T, dn)) / 2e-6;
      num += (g[j] - fd) * (g[j] - fd);
      den += fd * fd;
    }
    worst_grad = std::max(worst_grad, std::sqrt(num / den));
  }
  const std::size_t transitions = pat.N - 1;
  const bool ok = transitions <= 1 && rel < 1e-4 && worst_grad < 1e-4;
  return {ok, std::to_string(transitions) + " transition(s)" + fmt(", cost rel diff %.2e", rel) +
                  fmt(", gradient rel error %.2e", worst_grad)};
}

Outcome pmp_residuals() {
  const auto pair = certified_pair();
  const Vec x0 = certified_x0();
  const double T = 10.0;
  IntegratorConfig cfg;
  const auto opt = optimize_single_switch(pair, SwitchType::OneZero, x0, T);
  const auto a = analyze_switched(pair.B1(), pair.B2(), single_switch_control(SwitchType::OneZero, opt.tau), x0, T, cfg);
  const double phiT = std::abs(a.phi.phi.back());
  const bool ok = a.residuals.hamiltonian_rel_var < 1e-3 && a.residuals.weierstrass_violation < 0.01 &&
                  phiT <= cfg.abs_tol && a.residuals.phi_zero_crossings <= 1;
  return {ok, fmt("H variation %.2e", a.residuals.hamiltonian_rel_var) +
                  fmt(", Weierstrass violation %.2e", a.residuals.weierstrass_violation) + fmt(", |phi(T)| %.1e", phiT) +
                  ", " + std::to_string(a.residuals.phi_zero_crossings) + " sign change(s)"};
}

Outcome pattern_preservation() {
  const SwitchedProblem p{certified_pair(), SwitchType::OneZero, certified_x0()};
  const auto r = sweep(p, {5, 10, 20, 40, 80}, SweepOptions{});
  const auto& g = r.diagnostics.at(0).gaps;
  bool gaps_ok = g.back() < 1e-3;
  for (std::size_t k = 0; k + 1 < g.size(); ++k) gaps_ok = gaps_ok && 2.0 * g[k + 1] <= g[k];
  const auto c = certify_limit(p, r.tau_infinity, 80.0, 50, CertifyOptions{});
  std::size_t perturbations = 0;
  for (const auto& comp : c.competitors)
    if (comp.label.rfind("perturbation_", 0) == 0) ++perturbations;
  const bool ok = gaps_ok && c.certified && c.relaxed_rel_diff && *c.relaxed_rel_diff < 1e-4 && perturbations >= 50;
  std::string d = "gaps";
  for (double x : g) d += fmt(" %.2e", x);
  return {ok, d + fmt(", tau_inf %.6f", r.tau_infinity[0]) + fmt(", relaxed rel diff %.2e", c.relaxed_rel_diff.value_or(kInf)) +
                  ", " + std::to_string(perturbations) + " perturbations, certified=" + (c.certified ? "yes" : "no")};
}

Outcome sir_invariance() {
  SirParams p;
  p.beta_star = 0.1;
  p.beta = 0.3;
  p.gamma = 0.1;
  p.v_max = 0.1;
  IntegratorConfig cfg;
  const auto r = triangle_invariance_check(p, 1000, 2024, cfg);
  const auto x = sir_simulate(p, PiecewiseControl::constant(p.beta), PiecewiseControl::constant(0.0), vec({0.95, 0.05}),
                              50.0, cfg);
  const double c0 = sir_first_integral(0.95, 0.05, p.gamma, p.beta);
  double drift = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n) {
    const auto k = static_cast<Eigen::Index>(n);
    drift = std::max(drift, std::abs(sir_first_integral(x.states(0, k), x.states(1, k), p.gamma, p.beta) - c0));
  }
  const bool ok = r.max_violation < 1e-9 && r.sum_nonincreasing && drift < 1e-6;
  return {ok, fmt("max violation %.1e", r.max_violation) + fmt(", max s+i increase %.1e", r.max_sum_increase) +
                  fmt(", first-integral drift %.1e", drift)};
}

Outcome vaccination_structure() {
  struct Instance {
    SirParams p;
    Vec x0;
    double T;
  };
  std::vector<Instance> cases;
  SirParams a;
  a.beta_star = 0.1;
  a.beta = 0.3;
  a.gamma = 0.1;
  a.v_max = 0.1;
  a.i_max = 0.08;
  a.lambda_v = 1.0;
  a.lambda_i = 1.0;
  cases.push_back({a, vec({0.99, 0.01}), 100.0});
  SirParams b = a;
  b.i_max = 1.0;
  b.lambda_v = 0.2;
  cases.push_back({b, vec({0.99, 0.01}), 60.0});
  SirParams c = a;
  c.beta = 0.5;
  c.gamma = 0.15;
  c.v_max = 0.05;
  c.i_max = 0.2;
  c.lambda_v = 0.5;
  c.lambda_i = 2.0;
  cases.push_back({c, vec({0.95, 0.02}), 80.0});

  IntegratorConfig cfg;
  bool ok = true;
  std::string d;
  for (const auto& inst : cases) {
    const auto r = optimize_vaccination(inst.p, inst.x0, inst.T, cfg);
    const double step = inst.T / 400.0;
    double best = kInf, best_tau = 0.0;
    for (int k = 0; k <= 400; ++k) {
      const auto e = evaluate_vaccination(inst.p, inst.x0, inst.T, k * step, cfg);
      if (e.feasible && e.cost < best) {
        best = e.cost;
        best_tau = k * step;
      }
    }
    const double off = std::abs(r.tau1 - best_tau);
    ok = ok && r.feasible && off <= step && r.slack >= -1e-6;
    d += (d.empty() ? "" : "; ") + fmt("tau1 %.4f", r.tau1) + fmt(" vs grid %.4f", best_tau) + fmt(" (slack %.1e)", r.slack);
  }
  return {ok, d};
}

Outcome npi_boundary_arc() {
  SirParams p;
  p.beta_star = 0.15;
  p.beta = 0.4;
  p.gamma = 0.1;
  p.i_max = 0.1;
  p.lambda_b = 1.0;
  const auto r = optimize_npi(p, vec({0.99, 0.01}), 200.0, IntegratorConfig{});
  const auto& f = r.feedback;
  const bool ok = f.feasible && f.control.tau3 > f.control.tau2 && f.arc_max_dev < 1e-4;
  return {ok, fmt("feedback arc max |i - i_M| %.1e", f.arc_max_dev) +
                  fmt(", printed-formula arc max |i - i_M| %.1e", r.printed.arc_max_dev) +
                  ", printed formula saturates: " + (r.printed.saturates ? "yes" : "no") + " (recorded)"};
}

Outcome tail_functional() {
  CostSpec spec;
  spec.l2 = [](double, const Vec&, const Vec& u) { return u.squaredNorm(); };
  spec.p = 2.0;
  const auto sys = ControlSystem::generic(
      1, 1, [](double, const Vec&) { return Vec::Zero(1); }, [](double, const Vec&) { return Mat::Identity(1, 1); });
  IntegratorConfig cfg;
  const auto nonzero_tail = evaluate(spec, sys, PiecewiseControl({0.0, 1.0}, {vec({1.0})}, vec({0.5})), vec({0.0}),
                                     2.0, cfg);
  const PiecewiseControl compact({0.0, 1.0, 3.0, 4.5}, {vec({1.0}), vec({-2.0}), vec({0.5})}, vec({0.0}));
  const auto finite = evaluate(spec, sys, compact, vec({0.0}), 2.0, cfg);
  const double closed = 1.0 * 4.0 + 1.5 * 0.25;  // int_2^inf |u|^2

  const auto u = PiecewiseControl::constant(0.3);
  std::vector<PiecewiseControl> members, tails;
  std::vector<double> T;
  for (int k = 1; k <= 8; ++k) {
    members.push_back(u);
    tails.push_back(PiecewiseControl::constant(1.0));
    T.push_back(k);
  }
  const auto dict = TestDictionary::dyadic(0.0, 5.0, 4);
  const auto rep = tails_replacement_probe(u, members, tails, T, dict);
  bool exact_zero = true;
  for (const auto& e : rep.entries)
    if (e.T_k >= dict.support_end()) exact_zero = exact_zero && e.gap_replaced == 0.0;
  const bool ok = std::isinf(nonzero_tail.tail) && std::isfinite(finite.tail) && finite.tail == closed && exact_zero;
  return {ok, std::string("nonzero tail -> ") + (std::isinf(nonzero_tail.tail) ? "inf" : "finite") +
                  fmt(", compact tail %.6g", finite.tail) + fmt(" (closed form %.6g)", closed) +
                  ", replaced gaps beyond support " + (exact_zero ? "exactly 0" : "nonzero")};
}

std::map<std::string, std::string> directory_bytes(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    out[e.path().filename().string()] = os.str();
  }
  return out;
}

Outcome determinism() {
  const fs::path specs = HORIZONLAB_SPECS_DIR;
  const fs::path root = fs::temp_directory_path() / "horizonlab_acceptance_determinism";
  fs::remove_all(root);
  bool ok = true;
  std::size_t files = 0;
  for (const char* spec : {"switched_certified.json", "sir_vacc.json"}) {
    const std::string path = (specs / spec).string();
    const fs::path a = root / (std::string(spec) + ".a"), b = root / (std::string(spec) + ".b");
    const int ca = cli::guarded([&] { return cli::cmd_sweep(path, a.string(), 1); });
    const int cb = cli::guarded([&] { return cli::cmd_sweep(path, b.string(), 2); });
    const auto da = directory_bytes(a), db = directory_bytes(b);
    ok = ok && ca == cli::kExitOk && cb == cli::kExitOk && !da.empty() && da == db;
    files += da.size();
  }
  fs::remove_all(root);
  return {ok, std::to_string(files) + " output files compared across repeated runs (1 and 2 workers)"};
}

} // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"integrator vs closed form", closed_form_integration},
      {"blow-up reproduction", blowup_reproduction},
      {"closure decay", closure_decay},
      {"condition checker consistency", condition_consistency},
      {"single-switch structure", single_switch_structure},
      {"PMP residuals", pmp_residuals},
      {"pattern preservation", pattern_preservation},
      {"SIR invariance", sir_invariance},
      {"SIR vaccination structure", vaccination_structure},
      {"SIR NPI boundary arc", npi_boundary_arc},
      {"tail functional", tail_functional},
      {"sweep determinism", determinism},
  };
  int failures = 0;
  int id = 0;
  for (const auto& [name, run] : criteria) {
    ++id;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
