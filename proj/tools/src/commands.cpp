#include "commands.hpp"

#include "spec_file.hpp"

#include "horizonlab/types.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

namespace horizonlab::cli {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
}

void write_json(const fs::path& path, const Json& j) {
  write_text(path, j.dump(2) + "\n");
}

fs::path prepare_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec || !fs::is_directory(p)) throw ConfigError("cannot create output directory '" + dir + "'");
  return p;
}

std::string trajectory_csv(const Trajectory& x, const std::vector<std::string>& names = {}) {
  std::ostringstream os;
  write_trajectory_csv(os, x, names);
  return os.str();
}

void require_kind(const SpecFile& s, std::initializer_list<const char*> kinds, const char* command) {
  for (const char* k : kinds) {
    if (s.kind == k) return;
  }
  throw ConfigError(std::string(command) + " does not support problem kind '" + s.kind + "'");
}

PiecewiseControl component(const PiecewiseControl& u, Eigen::Index i) {
  std::vector<Vec> vals;
  for (const auto& v : u.values()) vals.push_back(Vec::Constant(1, v(i)));
  return PiecewiseControl(u.breakpoints(), std::move(vals), Vec::Constant(1, u.tail()(i)));
}

CostSpec lqr_cost(const SpecFile& s) {
  CostSpec c;
  const Mat Q = s.Q, R = s.R;
  c.l1 = [Q](double, const Vec& x) { return 0.5 * x.dot(Q * x); };
  c.l2 = [R](double, const Vec&, const Vec& u) { return 0.5 * u.dot(R * u); };
  c.p = 2.0;
  const Eigen::Index m = R.rows();
  c.greedy = [m](double, const Vec&) -> Vec { return Vec::Zero(m); };
  const double rmin = Eigen::SelfAdjointEigenSolver<Mat>(0.5 * (R + R.transpose())).eigenvalues().minCoeff();
  c.coercivity = CoercivityCertificate{0.5 * rmin, [](double) { return 0.0; }};
  return c;
}

Json switched_solution(const SpecFile& s, const fs::path& dir) {
  const auto& pair = *s.pair;
  const Vec x0 = s.initial_state();
  const double T = s.horizon();
  Json j;
  j["kind"] = s.kind;
  j["T"] = real_json(T);
  j["switch_type"] = to_string(s.switch_type);
  j["condition"] = to_json(check_condition(pair, s.switch_type, s.solver.condition));

  const auto ss = optimize_single_switch(pair, s.switch_type, x0, T, s.solver.single);
  const auto u = single_switch_control(s.switch_type, ss.tau);
  const auto an = analyze_switched(pair.B1(), pair.B2(), u, x0, T, s.cfg);
  j["single_switch"] = to_json(ss);
  j["residuals"] = to_json(an.residuals);
  j["phi_at_T"] = real_json(an.phi.phi.back());

  if (s.solver.relaxed_intervals > 0) {
    const auto rx = relaxed_direct_solve(pair, x0, T, s.solver.relaxed_intervals, s.cfg, s.solver.relaxed);
    const auto pat = extract_pattern(rx.control, s.solver.snap_tol);
    Json r = to_json(rx);
    r["intervals"] = s.solver.relaxed_intervals;
    r["rel_gap_to_parametric"] = real_json(std::abs(rx.cost - ss.cost) / std::max(std::abs(ss.cost), 1e-300));
    Json taus = Json::array();
    for (double t : pat.taus) taus.push_back(real_json(t));
    Json vals = Json::array();
    for (double v : pat.values) vals.push_back(real_json(v));
    r["pattern"] = {{"N", pat.N}, {"taus", std::move(taus)}, {"values", std::move(vals)}};
    j["relaxed"] = std::move(r);
  }
  write_json(dir / "control.json", to_json(u));
  write_text(dir / "trajectory.csv", trajectory_csv(an.x));
  return j;
}

Json lqr_solution(const SpecFile& s, const fs::path& dir) {
  const Vec x0 = s.initial_state();
  const double T = s.horizon();
  const auto sys = s.system();
  const auto u = s.control ? *s.control : PiecewiseControl::constant(Vec(Vec::Zero(s.B.cols())));
  const auto cost = lqr_cost(s);
  const Mat A = s.A, B = s.B;
  const MatrixFn Af = [A](double) { return A; };
  const MatrixFn Bf = [B](double) { return B; };

  const auto x = integrate(sys, u, x0, T, s.cfg);
  const auto y = variation_of_constants(Af, Bf, u, x0, T, s.cfg);
  const auto tb = transition_bound_check(Af, A.rows(), T, 16, s.cfg);
  ProbeDomain dom;
  dom.t_max = T;
  dom.state_dim = A.rows();
  dom.control_dim = B.cols();
  const auto co = coercivity_probe(cost, dom, 2000, 1);

  Json j;
  j["kind"] = s.kind;
  j["T"] = real_json(T);
  j["cost"] = to_json(evaluate_on(cost, x, u, T));
  j["variation_of_constants_sup_error"] = real_json(x.escaped() ? kInf : sup_distance(x, y, T));
  j["transition_bound"] = {{"lambda_T", real_json(tb.lambda_T)},
                           {"max_ratio", real_json(tb.max_ratio)},
                           {"pairs_checked", tb.pairs_checked},
                           {"holds", tb.holds}};
  j["coercivity"] = {{"samples", co.samples}, {"worst_margin", real_json(co.worst_margin)}, {"passed", co.passed}};
  write_text(dir / "trajectory.csv", trajectory_csv(x));
  return j;
}

int vaccination(const SpecFile& s, const fs::path& dir) {
  const Vec x0 = s.initial_state();
  const double T = s.horizon();
  check_unit_triangle(x0);
  const auto r = optimize_vaccination(s.sir, x0, T, s.cfg, s.solver.sir);
  Json j;
  j["kind"] = s.kind;
  j["T"] = real_json(T);
  j["result"] = to_json(r);
  if (r.feasible) {
    const auto e = evaluate_vaccination(s.sir, x0, T, r.tau1, s.cfg, s.solver.sir.constraint_tol);
    write_text(dir / "trajectory.csv", trajectory_csv(e.x, {"s", "i"}));
    write_json(dir / "control.json", to_json(vaccination_control(s.sir, r.tau1)));
  }
  write_json(dir / "vaccination.json", j);
  if (!r.feasible) {
    std::cerr << "no feasible vaccination time: x0 lies outside the viable set for i <= i_max\n";
    return kExitInfeasible;
  }
  return kExitOk;
}

int npi(const SpecFile& s, const fs::path& dir) {
  const Vec x0 = s.initial_state();
  const double T = s.horizon();
  check_unit_triangle(x0);
  const auto r = optimize_npi(s.sir, x0, T, s.cfg, s.solver.sir);
  Json j;
  j["kind"] = s.kind;
  j["T"] = real_json(T);
  j["selected_mode"] = to_string(s.arc3_mode);
  Json modes = to_json(r);
  for (const auto* sol : {&r.feedback, &r.printed}) {
    const std::string key = to_string(sol->control.mode);
    modes[key]["slack"] = real_json(s.sir.i_max - sol->max_i);
    if (sol->feasible) {
      const auto e = evaluate_npi(s.sir, sol->control, x0, T, s.cfg, s.solver.sir.constraint_tol);
      write_text(dir / ("trajectory_" + key + ".csv"), trajectory_csv(e.x, {"s", "i"}));
    }
  }
  j["modes"] = std::move(modes);
  write_json(dir / "npi.json", j);
  if (!r.get(s.arc3_mode).feasible) {
    std::cerr << "no feasible NPI schedule for arc3_mode " << to_string(s.arc3_mode) << "\n";
    return kExitInfeasible;
  }
  return kExitOk;
}

PiecewiseControl random_tail(std::mt19937_64& rng, double start, double bound) {
  std::uniform_real_distribution<double> d(-bound, bound);
  std::vector<double> bp{0.0, start};
  std::vector<Vec> vals{Vec::Zero(1)};
  for (int i = 1; i <= 10; ++i) {
    bp.push_back(start + i);
    vals.push_back(Vec::Constant(1, d(rng)));
  }
  return PiecewiseControl(std::move(bp), std::move(vals), Vec::Zero(1));
}

} // namespace

int guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed input: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

std::size_t resolve_jobs(std::optional<std::size_t> flag) {
  if (flag) {
    if (*flag == 0) throw ConfigError("--jobs must be at least 1");
    return *flag;
  }
  if (const char* env = std::getenv("HORIZONLAB_JOBS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) throw ConfigError("HORIZONLAB_JOBS must be a positive integer");
    return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

int cmd_simulate(const std::string& spec_path, const std::string& control_path, const std::string& out_path) {
  const auto s = load_spec(spec_path);
  const auto u = !control_path.empty() ? control_from_json(load_json(control_path))
                 : s.control           ? *s.control
                                       : throw ConfigError("simulate needs --control or a control in the spec");
  const Vec x0 = s.initial_state();
  const double T = s.horizon();

  if (s.kind == "sir_vacc" || s.kind == "sir_npi") {
    check_unit_triangle(x0);
    if (u.dim() != 2) throw ConfigError("SIR control must have two components (b, v)");
    const auto x = sir_simulate(s.sir, component(u, 0), component(u, 1), x0, T, s.cfg);
    write_text(out_path, trajectory_csv(x, {"s", "i"}));
    const double max_i = x.states.row(1).maxCoeff();
    if (max_i > s.sir.i_max + s.solver.sir.constraint_tol) {
      std::cerr << "state constraint i <= i_max violated (max i = " << format_real(max_i) << ")\n";
      return kExitInfeasible;
    }
    return kExitOk;
  }

  const auto sys = s.system();
  if (u.dim() != sys.control_dim()) throw ConfigError("control has the wrong dimension");
  const auto x = integrate(sys, u, x0, T, s.cfg);
  write_text(out_path, trajectory_csv(x));
  if (x.escaped()) {
    std::cerr << "solution escapes at t=" << format_real(*x.escape_time) << "\n";
    return kExitInfeasible;
  }
  return kExitOk;
}

int cmd_check_condition(const std::string& matrices_path, const std::string& type, std::optional<std::size_t> samples,
                        std::optional<double> band, const std::string& out_path) {
  const auto j = load_json(matrices_path);
  if (!j.is_object()) throw ConfigError("matrices file must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (key != "A1" && key != "A2") throw ConfigError("unknown key '" + key + "' in matrices file");
  }
  if (!j.contains("A1") || !j.contains("A2")) throw ConfigError("matrices file needs A1 and A2");
  const SwitchedPair pair(mat_from_json(j.at("A1")), mat_from_json(j.at("A2")));
  ConditionOptions opt;
  if (samples) opt.sphere_samples = *samples;
  if (band) opt.zero_band = *band;

  Json out;
  out["commutes"] = pair.commutes();
  out["commutator_norm"] = real_json(pair.commutator_norm());
  if (type == "both" || type == "one_zero")
    out["one_zero"] = to_json(check_condition(pair, SwitchType::OneZero, opt));
  if (type == "both" || type == "zero_one")
    out["zero_one"] = to_json(check_condition(pair, SwitchType::ZeroOne, opt));
  if (type != "both" && type != "one_zero" && type != "zero_one")
    throw ConfigError("--type must be one_zero, zero_one or both");
  write_json(out_path, out);
  return kExitOk;
}

int cmd_solve(const std::string& spec_path, const std::string& out_dir) {
  const auto s = load_spec(spec_path);
  require_kind(s, {"switched", "sir_vacc", "sir_npi", "linear_lqr_probe"}, "solve");
  const auto dir = prepare_dir(out_dir);
  if (s.kind == "sir_vacc") return vaccination(s, dir);
  if (s.kind == "sir_npi") return npi(s, dir);
  const Json j = s.kind == "switched" ? switched_solution(s, dir) : lqr_solution(s, dir);
  write_json(dir / "solution.json", j);
  return kExitOk;
}

int cmd_sweep(const std::string& spec_path, const std::string& out_dir, std::size_t jobs) {
  const auto s = load_spec(spec_path);
  require_kind(s, {"switched", "sir_vacc", "sir_npi"}, "sweep");
  if (s.horizons.size() < 3) throw ConfigError("sweep needs at least three horizons");
  const auto dir = prepare_dir(out_dir);
  const Problem problem = s.problem();
  const auto res = sweep(problem, s.horizons, s.sweep_options(jobs));

  std::ostringstream csv;
  write_sweep_csv(csv, res, s.kind == "sir_npi" ? to_string(s.arc3_mode) : std::string());
  write_text(dir / "sweep.csv", csv.str());

  Json summary = to_json(res);
  Json records = Json::array();
  Json residuals = Json::array();
  std::size_t failed = 0;
  for (const auto& r : res.records) {
    records.push_back(to_json(r));
    residuals.push_back({{"T", real_json(r.T)}, {"residuals", r.residuals ? to_json(*r.residuals) : Json(nullptr)}});
    if (!r.error.empty() || !r.feasible) {
      ++failed;
      std::cerr << "warning: horizon T=" << format_real(r.T) << " "
                << (r.error.empty() ? std::string("is infeasible") : "failed: " + r.error) << "\n";
    }
  }
  summary["records"] = std::move(records);
  write_json(dir / "sweep.json", summary);
  write_json(dir / "residuals.json", residuals);

  if (failed == res.records.size()) {
    std::cerr << "all horizons failed\n";
    return kExitInfeasible;
  }

  if (s.certify.enabled) {
    double max_tau = 0.0;
    for (double t : res.tau_infinity) {
      if (std::isfinite(t)) max_tau = std::max(max_tau, t);
    }
    const double T_cert = s.certify.T_cert.value_or(std::max(s.horizons.back(), 2.0 * max_tau));
    const auto cert = certify_limit(problem, res.tau_infinity, T_cert, s.certify.budget, s.certify.options);
    Json cj = to_json(cert);
    Json classes = Json::array();
    for (auto c : res.classes) classes.push_back(to_string(c));
    cj["tau_classes"] = std::move(classes);
    write_json(dir / "certification.json", cj);
  }
  return kExitOk;
}

int cmd_gamma_probe(const std::string& spec_path, const std::string& out_dir) {
  const auto s = load_spec(spec_path);
  require_kind(s, {"switched", "linear_lqr_probe", "blowup"}, "gamma-probe");
  const auto dir = prepare_dir(out_dir);
  const auto& g = s.gamma;
  const double T = g.T ? *g.T : s.horizon();
  const Vec x0 = s.initial_state();
  const auto sys = s.system();
  if (sys.control_dim() != 1) throw ConfigError("gamma-probe needs a scalar control");

  Json j;
  j["kind"] = s.kind;
  j["T"] = real_json(T);

  WeakStarSequence gen = g.generator;
  if (s.kind == "blowup") gen.kind = GeneratorKind::ScaledPulse;
  j["generator"] = to_string(gen.kind);
  const auto dict = TestDictionary::dyadic(g.dictionary.lo, g.dictionary.hi.value_or(T), g.dictionary.levels);
  const auto limit = gen.limit();

  Json ws = Json::array();
  std::vector<double> ws_gaps;
  for (std::size_t k : g.ks) {
    ws_gaps.push_back(weak_star_gap(gen.member(k), limit, dict));
    ws.push_back({{"k", k}, {"gap", real_json(ws_gaps.back())}});
  }
  j["weak_star"] = std::move(ws);

  const auto closure = closure_probe(sys, gen, g.ks, x0, T, s.cfg);
  j["closure"] = to_json(closure);

  if (s.kind == "blowup") j["blowup"] = to_json(blowup_probe(g.rates, s.cfg));

  if (g.tails) {
    if (g.tails->horizons.size() != g.ks.size()) throw ConfigError("gamma.tails.horizons needs one entry per k");
    std::mt19937_64 rng(g.tails->seed);
    std::vector<PiecewiseControl> members, tails;
    for (std::size_t i = 0; i < g.ks.size(); ++i) {
      members.push_back(gen.member(g.ks[i]));
      tails.push_back(random_tail(rng, g.tails->horizons[i], g.tails->bound));
    }
    j["tails"] = to_json(tails_replacement_probe(limit, members, tails, g.tails->horizons, dict));
  }

  if (g.liminf) {
    if (g.liminf->horizons.size() != g.ks.size()) throw ConfigError("gamma.liminf.horizons needs one entry per k");
    const CostSpec cost = s.kind == "switched"          ? switched_quadratic_cost(s.pair->dim())
                          : s.kind == "linear_lqr_probe" ? lqr_cost(s)
                                                         : throw ConfigError("liminf check needs a cost");
    std::vector<PiecewiseControl> members;
    for (std::size_t k : g.ks) members.push_back(gen.member(k));
    j["liminf"] = to_json(liminf_spotcheck(cost, sys, members, g.liminf->horizons, limit, x0, g.liminf->T_max, s.cfg,
                                           g.liminf->tol));
  }
  write_json(dir / "gamma.json", j);

  std::ostringstream csv;
  csv << "k,weak_star_gap,closure_gap\n";
  for (std::size_t i = 0; i < g.ks.size(); ++i)
    csv << g.ks[i] << ',' << format_real(ws_gaps[i]) << ',' << format_real(closure.gaps[i]) << '\n';
  write_text(dir / "gamma.csv", csv.str());
  return kExitOk;
}

int cmd_sir_vacc(const std::string& spec_path, const std::string& out_dir) {
  const auto s = load_spec(spec_path);
  require_kind(s, {"sir_vacc"}, "sir-vacc");
  return vaccination(s, prepare_dir(out_dir));
}

int cmd_sir_npi(const std::string& spec_path, const std::string& out_dir) {
  const auto s = load_spec(spec_path);
  require_kind(s, {"sir_npi"}, "sir-npi");
  return npi(s, prepare_dir(out_dir));
}

} // namespace horizonlab::cli
