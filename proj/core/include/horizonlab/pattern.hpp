#pragma once

// Horizon sweeps: solve a family of finite-horizon problems, track the
// switching times of the optimal pattern as T grows, extrapolate the
// infinite-horizon pattern and try to falsify its optimality on a long
// truncation.

#include "horizonlab/pmp.hpp"
#include "horizonlab/sir.hpp"
#include "horizonlab/switched.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace horizonlab {

struct SwitchedProblem {
  SwitchedPair pair;
  SwitchType type = SwitchType::OneZero;
  Vec x0;
};

struct SirVaccProblem {
  SirParams params;
  Vec x0;
};

struct SirNpiProblem {
  SirParams params;
  Vec x0;
  Arc3Mode mode = Arc3Mode::FeedbackKeepIM;
};

using Problem = std::variant<SwitchedProblem, SirVaccProblem, SirNpiProblem>;

/// "switched", "sir_vacc" or "sir_npi".
std::string problem_kind(const Problem& p);

struct PatternRecord {
  double T = 0.0;
  std::vector<double> taus;
  std::vector<std::string> values;  ///< interval value descriptors, one more than taus
  double cost = kInf;
  bool feasible = true;
  bool flat_objective = false;
  std::optional<PmpResiduals> residuals;
  std::optional<double> arc_max_dev;  ///< NPI only
  std::string error;                  ///< solver failure message, empty on success
};

enum class TauClass { Convergent, DivergentToInfinity, Undetermined };
std::string to_string(TauClass c);

struct SweepOptions {
  IntegratorConfig cfg;
  SingleSwitchOptions single;
  SirSolveOptions sir;
  double decay_factor = 2.0;      ///< successive gaps must shrink at least by this factor
  double gap_tol = 1e-3;          ///< last gap must be below this
  double divergence_tol = 1e-3;   ///< tau within divergence_tol T of T counts as tracking T
  double noise_floor = 1e-8;      ///< gaps below this count as zero
  std::size_t jobs = 1;
  bool residuals = true;          ///< PMP residuals for switched records
};

struct SweepResult {
  std::string kind;
  std::vector<PatternRecord> records;  ///< sorted by T
  std::vector<ConvergenceReport> diagnostics;  ///< one per tau_j
  std::vector<TauClass> classes;
  std::vector<double> tau_infinity;  ///< +inf for divergent entries
  bool partial = false;              ///< some horizon failed or was infeasible
};

PatternRecord solve_at(const Problem& p, double T, const SweepOptions& opt);

/// Needs at least three increasing horizons. Horizons are solved in parallel
/// (opt.jobs workers) and merged in T order, so the result does not depend on
/// the worker count.
SweepResult sweep(const Problem& p, std::vector<double> horizons, const SweepOptions& opt);

/// Classification of one switching-time sequence (see SweepOptions).
TauClass classify(std::span<const double> horizons, std::span<const double> taus, const SweepOptions& opt,
                  std::vector<double>* gaps = nullptr);

struct CertifyOptions {
  IntegratorConfig cfg;
  std::uint64_t seed = 1;
  double rtol = 1e-4;
  double atol = 1e-12;
  double relaxed_step = 0.05;       ///< interval length of the relaxed competitor
  double perturbation_radius = 0.5;  ///< random shifts of each tau, times max(1, tau)
  double probe_step = 0.1;           ///< local +- probe around each finite tau
  SirSolveOptions sir;
};

struct Competitor {
  std::string label;
  double cost = kInf;
};

struct CertificationReport {
  std::string kind;
  double T_cert = 0.0;
  std::vector<double> tau_infinity;
  double extrapolated_cost = kInf;
  std::optional<double> tail_bound;
  bool tail_unknown = false;
  std::vector<Competitor> competitors;
  double best_competitor = kInf;
  std::optional<double> relaxed_rel_diff;  ///< switched only
  std::vector<std::pair<double, double>> local_probe;  ///< per tau: costs at tau - step, tau + step
  bool local_minimum = true;
  bool certified = false;
  std::string note = "falsification harness: passing means no tested competitor beat the extrapolated pattern";
};

/// Requires T_cert >= 2 max finite tau.
CertificationReport certify_limit(const Problem& p, const std::vector<double>& tau_infinity, double T_cert,
                                  std::size_t competitor_budget, const CertifyOptions& opt);

struct ExtractedPattern {
  std::vector<double> taus;
  std::vector<double> values;  ///< taus.size() + 1 entries; the last one holds on [taus.back(), inf)
  std::size_t N = 0;
};

/// Canonical pattern of a scalar control with values in [lo, hi]: values
/// within snap_tol (hi - lo) of an extreme are snapped, equal neighbours are
/// merged, a fractional interval between opposite extremes is replaced by a
/// switch that preserves its mass, and other fractional intervals shorter
/// than min_length are absorbed by a neighbour. Idempotent.
ExtractedPattern extract_pattern(const PiecewiseControl& u, double snap_tol = 0.05, double min_length = 0.0,
                                 double lo = 0.0, double hi = 1.0);

/// Grid control: value v[i] on [t[i], t[i+1]), the last value continues.
ExtractedPattern extract_pattern(std::span<const double> t, std::span<const double> v, double snap_tol = 0.05,
                                 double min_length = 0.0, double lo = 0.0, double hi = 1.0);

PiecewiseControl to_control(const ExtractedPattern& p);

} // namespace horizonlab
