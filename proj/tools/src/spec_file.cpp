#include "spec_file.hpp"

#include "horizonlab/types.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <set>

namespace horizonlab::cli {

namespace {

void expect_keys(const Json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

double get_real(const Json& j, const char* key, double fallback) {
  return j.contains(key) ? real_from_json(j.at(key)) : fallback;
}

std::size_t get_count(const Json& j, const char* key, std::size_t fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw ConfigError(std::string("'") + key + "' must be a nonnegative integer");
  return v.get<std::size_t>();
}

bool get_flag(const Json& j, const char* key, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_boolean()) throw ConfigError(std::string("'") + key + "' must be true or false");
  return j.at(key).get<bool>();
}

std::string get_string(const Json& j, const char* key, const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_string()) throw ConfigError(std::string("'") + key + "' must be a string");
  return j.at(key).get<std::string>();
}

std::vector<double> get_reals(const Json& j, const char* key) {
  if (!j.contains(key)) return {};
  if (!j.at(key).is_array()) throw ConfigError(std::string("'") + key + "' must be an array");
  std::vector<double> out;
  for (const auto& v : j.at(key)) out.push_back(real_from_json(v));
  return out;
}

IntegratorConfig parse_integrator(const Json& j) {
  expect_keys(j, "integrator", {"abs_tol", "rel_tol", "escape_radius", "max_step", "output_step", "max_steps"});
  IntegratorConfig c;
  c.abs_tol = get_real(j, "abs_tol", c.abs_tol);
  c.rel_tol = get_real(j, "rel_tol", c.rel_tol);
  c.escape_radius = get_real(j, "escape_radius", c.escape_radius);
  c.max_step = get_real(j, "max_step", c.max_step);
  c.output_step = get_real(j, "output_step", c.output_step);
  c.max_steps = get_count(j, "max_steps", c.max_steps);
  c.validate();
  return c;
}

SolverSettings parse_solver(const Json& j) {
  expect_keys(j, "solver",
              {"coarse_points", "xtol", "relaxed_intervals", "relaxed_max_iterations", "relaxed_tol",
               "sir_coarse_points", "sir_xtol", "constraint_tol", "search_output_step", "sphere_samples",
               "zero_band", "finsler_grid", "snap_tol", "gap_tol", "decay_factor", "divergence_tol", "noise_floor",
               "residuals"});
  SolverSettings s;
  s.single.coarse_points = get_count(j, "coarse_points", s.single.coarse_points);
  s.single.xtol = get_real(j, "xtol", s.single.xtol);
  s.relaxed_intervals = get_count(j, "relaxed_intervals", s.relaxed_intervals);
  s.relaxed.max_iterations = get_count(j, "relaxed_max_iterations", s.relaxed.max_iterations);
  s.relaxed.tol = get_real(j, "relaxed_tol", s.relaxed.tol);
  s.sir.coarse_points = get_count(j, "sir_coarse_points", s.sir.coarse_points);
  s.sir.xtol = get_real(j, "sir_xtol", s.sir.xtol);
  s.sir.constraint_tol = get_real(j, "constraint_tol", s.sir.constraint_tol);
  s.sir.search_output_step = get_real(j, "search_output_step", s.sir.search_output_step);
  s.condition.sphere_samples = get_count(j, "sphere_samples", s.condition.sphere_samples);
  s.condition.zero_band = get_real(j, "zero_band", s.condition.zero_band);
  s.condition.finsler_grid = get_count(j, "finsler_grid", s.condition.finsler_grid);
  s.snap_tol = get_real(j, "snap_tol", s.snap_tol);
  s.gap_tol = get_real(j, "gap_tol", s.gap_tol);
  s.decay_factor = get_real(j, "decay_factor", s.decay_factor);
  s.divergence_tol = get_real(j, "divergence_tol", s.divergence_tol);
  s.noise_floor = get_real(j, "noise_floor", s.noise_floor);
  s.residuals = get_flag(j, "residuals", s.residuals);
  if (s.single.coarse_points < 2 || s.sir.coarse_points < 2) throw ConfigError("coarse grids need at least 2 points");
  return s;
}

CertifySettings parse_certify(const Json& j) {
  expect_keys(j, "certify",
              {"enabled", "T_cert", "budget", "seed", "rtol", "atol", "relaxed_step", "perturbation_radius",
               "probe_step"});
  CertifySettings c;
  c.enabled = get_flag(j, "enabled", c.enabled);
  if (j.contains("T_cert")) c.T_cert = real_from_json(j.at("T_cert"));
  c.budget = get_count(j, "budget", c.budget);
  c.options.seed = get_count(j, "seed", c.options.seed);
  c.options.rtol = get_real(j, "rtol", c.options.rtol);
  c.options.atol = get_real(j, "atol", c.options.atol);
  c.options.relaxed_step = get_real(j, "relaxed_step", c.options.relaxed_step);
  c.options.perturbation_radius = get_real(j, "perturbation_radius", c.options.perturbation_radius);
  c.options.probe_step = get_real(j, "probe_step", c.options.probe_step);
  if (!(c.options.relaxed_step > 0.0)) throw ConfigError("relaxed_step must be positive");
  return c;
}

GammaSettings parse_gamma(const Json& j) {
  expect_keys(j, "gamma", {"generator", "ks", "T", "dictionary", "rates", "tails", "liminf"});
  GammaSettings g;
  if (j.contains("generator")) {
    const auto& q = j.at("generator");
    expect_keys(q, "gamma.generator",
                {"kind", "low", "high", "duty", "mean", "amplitude", "samples_per_period", "horizon"});
    auto& s = g.generator;
    s.kind = parse_generator_kind(get_string(q, "kind", "chatter"));
    s.low = get_real(q, "low", s.low);
    s.high = get_real(q, "high", s.high);
    s.duty = get_real(q, "duty", s.duty);
    s.mean = get_real(q, "mean", s.mean);
    s.amplitude = get_real(q, "amplitude", s.amplitude);
    s.samples_per_period = get_count(q, "samples_per_period", s.samples_per_period);
    s.horizon = get_real(q, "horizon", s.horizon);
    s.validate();
  }
  if (j.contains("ks")) {
    if (!j.at("ks").is_array() || j.at("ks").empty()) throw ConfigError("'ks' must be a non-empty array");
    g.ks.clear();
    for (const auto& k : j.at("ks")) {
      if (!k.is_number_integer() || k.get<long long>() < 1) throw ConfigError("'ks' entries must be positive integers");
      g.ks.push_back(k.get<std::size_t>());
    }
  }
  if (j.contains("T")) g.T = real_from_json(j.at("T"));
  if (j.contains("dictionary")) {
    const auto& d = j.at("dictionary");
    expect_keys(d, "gamma.dictionary", {"lo", "hi", "levels"});
    g.dictionary.lo = get_real(d, "lo", g.dictionary.lo);
    if (d.contains("hi")) g.dictionary.hi = real_from_json(d.at("hi"));
    g.dictionary.levels = get_count(d, "levels", g.dictionary.levels);
  }
  if (j.contains("rates")) g.rates = get_reals(j, "rates");
  if (j.contains("tails")) {
    const auto& t = j.at("tails");
    expect_keys(t, "gamma.tails", {"horizons", "bound", "seed"});
    TailSettings ts;
    ts.horizons = get_reals(t, "horizons");
    ts.bound = get_real(t, "bound", ts.bound);
    ts.seed = get_count(t, "seed", ts.seed);
    g.tails = ts;
  }
  if (j.contains("liminf")) {
    const auto& l = j.at("liminf");
    expect_keys(l, "gamma.liminf", {"horizons", "T_max", "tol"});
    LiminfSettings ls;
    ls.horizons = get_reals(l, "horizons");
    if (!l.contains("T_max")) throw ConfigError("gamma.liminf needs T_max");
    ls.T_max = real_from_json(l.at("T_max"));
    ls.tol = get_real(l, "tol", ls.tol);
    g.liminf = ls;
  }
  return g;
}

SirParams parse_sir(const Json& j) {
  expect_keys(j, "sir", {"beta_star", "beta", "gamma", "v_max", "i_max", "lambda_b", "lambda_v", "lambda_i"});
  SirParams p;
  p.beta_star = get_real(j, "beta_star", p.beta_star);
  p.beta = get_real(j, "beta", p.beta);
  p.gamma = get_real(j, "gamma", p.gamma);
  p.v_max = get_real(j, "v_max", p.v_max);
  p.i_max = get_real(j, "i_max", p.i_max);
  p.lambda_b = get_real(j, "lambda_b", p.lambda_b);
  p.lambda_v = get_real(j, "lambda_v", p.lambda_v);
  p.lambda_i = get_real(j, "lambda_i", p.lambda_i);
  p.validate();
  return p;
}

Mat square(const Json& j, const char* name) {
  Mat m = mat_from_json(j);
  if (m.rows() != m.cols()) throw ConfigError(std::string(name) + " must be square");
  return m;
}

} // namespace

Vec SpecFile::initial_state() const {
  if (x0) return *x0;
  if (kind == "blowup") return Vec::Ones(1);
  throw ConfigError("spec needs x0");
}

double SpecFile::horizon() const {
  if (!T) throw ConfigError("spec needs a horizon T");
  return *T;
}

ControlSystem SpecFile::system() const {
  if (kind == "switched") return ControlSystem::switched_from_pair(pair->A1(), pair->A2());
  if (kind == "sir_vacc" || kind == "sir_npi") return sir.system();
  if (kind == "blowup") return blowup_system();
  const Mat a = A, b = B;
  return ControlSystem::linear_tv(
      a.rows(), b.cols(), [a](double) { return a; }, [b](double) { return b; });
}

Problem SpecFile::problem() const {
  if (kind == "switched") return SwitchedProblem{*pair, switch_type, initial_state()};
  if (kind == "sir_vacc") return SirVaccProblem{sir, initial_state()};
  if (kind == "sir_npi") return SirNpiProblem{sir, initial_state(), arc3_mode};
  throw ConfigError("problem kind '" + kind + "' has no pattern solver");
}

SweepOptions SpecFile::sweep_options(std::size_t jobs) const {
  SweepOptions o;
  o.cfg = cfg;
  o.single = solver.single;
  o.sir = solver.sir;
  o.decay_factor = solver.decay_factor;
  o.gap_tol = solver.gap_tol;
  o.divergence_tol = solver.divergence_tol;
  o.noise_floor = solver.noise_floor;
  o.jobs = jobs;
  o.residuals = solver.residuals;
  return o;
}

SpecFile parse_spec(const Json& j) {
  if (!j.is_object()) throw ConfigError("spec must be a JSON object");
  if (!j.contains("spec_version")) throw ConfigError("spec needs spec_version");
  if (!j.at("spec_version").is_number_integer() || j.at("spec_version").get<long long>() != 1)
    throw ConfigError("unsupported spec_version (expected 1)");
  SpecFile s;
  s.kind = get_string(j, "kind", "");
  static const std::set<std::string> kinds{"switched", "sir_vacc", "sir_npi", "linear_lqr_probe", "blowup"};
  if (!kinds.count(s.kind)) throw ConfigError("unknown or missing problem kind '" + s.kind + "'");

  if (s.kind == "switched") {
    expect_keys(j, "spec", {"spec_version", "kind", "x0", "T", "horizons", "integrator", "solver", "certify", "gamma",
                            "control", "A1", "A2", "switch_type"});
  } else if (s.kind == "sir_vacc") {
    expect_keys(j, "spec",
                {"spec_version", "kind", "x0", "T", "horizons", "integrator", "solver", "certify", "control", "sir"});
  } else if (s.kind == "sir_npi") {
    expect_keys(j, "spec", {"spec_version", "kind", "x0", "T", "horizons", "integrator", "solver", "certify", "control",
                            "sir", "arc3_mode"});
  } else if (s.kind == "linear_lqr_probe") {
    expect_keys(j, "spec",
                {"spec_version", "kind", "x0", "T", "integrator", "gamma", "control", "A", "B", "Q", "R"});
  } else {
    expect_keys(j, "spec", {"spec_version", "kind", "x0", "T", "integrator", "gamma", "control"});
  }

  if (j.contains("integrator")) s.cfg = parse_integrator(j.at("integrator"));
  if (j.contains("x0")) s.x0 = vec_from_json(j.at("x0"));
  if (j.contains("T")) {
    s.T = real_from_json(j.at("T"));
    if (!(*s.T > 0.0) || !std::isfinite(*s.T)) throw ConfigError("T must be positive and finite");
  }
  s.horizons = get_reals(j, "horizons");
  for (double h : s.horizons) {
    if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("horizons must be positive and finite");
  }
  if (j.contains("solver")) s.solver = parse_solver(j.at("solver"));
  if (j.contains("certify")) s.certify = parse_certify(j.at("certify"));
  s.certify.options.cfg = s.cfg;
  s.certify.options.sir = s.solver.sir;
  if (j.contains("gamma")) s.gamma = parse_gamma(j.at("gamma"));
  if (j.contains("control")) s.control = control_from_json(j.at("control"));

  Eigen::Index n = 0;
  Eigen::Index m = 1;
  if (s.kind == "switched") {
    if (!j.contains("A1") || !j.contains("A2")) throw ConfigError("switched spec needs A1 and A2");
    s.pair = SwitchedPair(square(j.at("A1"), "A1"), square(j.at("A2"), "A2"));
    s.switch_type = parse_switch_type(get_string(j, "switch_type", "one_zero"));
    n = s.pair->dim();
  } else if (s.kind == "sir_vacc" || s.kind == "sir_npi") {
    if (j.contains("sir")) s.sir = parse_sir(j.at("sir"));
    if (s.kind == "sir_npi") s.arc3_mode = parse_arc3_mode(get_string(j, "arc3_mode", "feedback_keep_iM"));
    n = 2;
    m = 2;
  } else if (s.kind == "linear_lqr_probe") {
    for (const char* k : {"A", "B"}) {
      if (!j.contains(k)) throw ConfigError(std::string("linear_lqr_probe spec needs ") + k);
    }
    s.A = square(j.at("A"), "A");
    s.B = mat_from_json(j.at("B"));
    n = s.A.rows();
    m = s.B.cols();
    if (s.B.rows() != n) throw ConfigError("B must have as many rows as A");
    s.Q = j.contains("Q") ? square(j.at("Q"), "Q") : Mat(Mat::Identity(n, n));
    s.R = j.contains("R") ? square(j.at("R"), "R") : Mat(Mat::Identity(m, m));
    if (s.Q.rows() != n || s.R.rows() != m) throw ConfigError("Q and R must match the state and control sizes");
  } else {
    n = 1;
  }
  if (s.x0 && s.x0->size() != n) throw ConfigError("x0 has the wrong dimension");
  if (s.control && s.control->dim() != m) throw ConfigError("control has the wrong dimension");
  return s;
}

Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
}

SpecFile load_spec(const std::string& path) {
  return parse_spec(load_json(path));
}

} // namespace horizonlab::cli
