#pragma once

// Problem specification files: a single JSON object with `spec_version: 1`,
// a problem `kind` and kind-specific parameters. Unknown keys are rejected.

#include "horizonlab/gammalab.hpp"
#include "horizonlab/pattern.hpp"
#include "horizonlab/serialize.hpp"

#include <optional>
#include <string>
#include <vector>

namespace horizonlab::cli {

struct SolverSettings {
  SingleSwitchOptions single;
  RelaxedOptions relaxed;
  std::size_t relaxed_intervals = 200;  ///< 0 disables the relaxed solve
  SirSolveOptions sir;
  ConditionOptions condition;
  double snap_tol = 0.05;
  double gap_tol = 1e-3;
  double decay_factor = 2.0;
  double divergence_tol = 1e-3;
  double noise_floor = 1e-8;
  bool residuals = true;
};

struct CertifySettings {
  bool enabled = true;
  std::optional<double> T_cert;  ///< default: max(last horizon, 2 max finite tau)
  std::size_t budget = 50;
  CertifyOptions options;
};

struct DictionarySettings {
  double lo = 0.0;
  std::optional<double> hi;  ///< default: the probe horizon
  std::size_t levels = 4;
};

struct TailSettings {
  std::vector<double> horizons;
  double bound = 1.0;
  std::uint64_t seed = 7;
};

struct LiminfSettings {
  std::vector<double> horizons;
  double T_max = 0.0;
  double tol = 1e-6;
};

struct GammaSettings {
  WeakStarSequence generator;
  std::vector<std::size_t> ks{4, 16, 64, 256};
  std::optional<double> T;  ///< default: the spec horizon
  DictionarySettings dictionary;
  std::vector<double> rates{1.0, 0.5, 0.1};
  std::optional<TailSettings> tails;
  std::optional<LiminfSettings> liminf;
};

struct SpecFile {
  std::string kind;  ///< switched, sir_vacc, sir_npi, linear_lqr_probe or blowup
  IntegratorConfig cfg;
  std::optional<Vec> x0;
  std::optional<double> T;
  std::vector<double> horizons;

  // switched
  std::optional<SwitchedPair> pair;
  SwitchType switch_type = SwitchType::OneZero;
  // sir_vacc, sir_npi
  SirParams sir;
  Arc3Mode arc3_mode = Arc3Mode::FeedbackKeepIM;
  // linear_lqr_probe: x' = A x + B u, cost (x'Qx + u'Ru) / 2
  Mat A, B, Q, R;

  std::optional<PiecewiseControl> control;
  SolverSettings solver;
  CertifySettings certify;
  GammaSettings gamma;

  Vec initial_state() const;  ///< x0, or the kind's default
  double horizon() const;     ///< T, required by single-horizon commands
  ControlSystem system() const;
  Problem problem() const;    ///< switched, sir_vacc and sir_npi only
  SweepOptions sweep_options(std::size_t jobs) const;
};

/// Throws ConfigError on malformed JSON, a wrong version, unknown keys or
/// inconsistent dimensions.
SpecFile parse_spec(const Json& j);
SpecFile load_spec(const std::string& path);

Json load_json(const std::string& path);

} // namespace horizonlab::cli
