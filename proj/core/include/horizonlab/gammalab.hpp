#pragma once

// Probe experiments around Gamma-convergence of the truncated functionals:
// weak-star convergent control sequences, closure of the admissible set,
// tails replacement, blow-up of maximal solutions and liminf spot checks.

#include "horizonlab/costs.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace horizonlab {

enum class GeneratorKind { Chatter, Oscillation, ScaledPulse };
std::string to_string(GeneratorKind k);
GeneratorKind parse_generator_kind(const std::string& s);

/// Scalar control sequences u_k with a known weak-star limit.
///  chatter:      `high` on the first `duty` fraction of each period 1/k, `low` otherwise;
///                limit low + duty (high - low).
///  oscillation:  mean + amplitude sin(2 pi k t), sampled at interval midpoints
///                (`samples_per_period` per period); limit `mean`.
///  scaled_pulse: r_k = 1/k on [0, 1/r_k), 0 after; limit 0.
/// Chatter and oscillation members equal the limit after `horizon`.
struct WeakStarSequence {
  GeneratorKind kind = GeneratorKind::Chatter;
  double low = 0.0;
  double high = 1.0;
  double duty = 0.5;
  double mean = 0.5;
  double amplitude = 0.5;
  std::size_t samples_per_period = 16;
  double horizon = 10.0;

  void validate() const;
  PiecewiseControl member(std::size_t k) const;
  PiecewiseControl limit() const;
};

/// Scaled pulse with an explicit rate: r on [0, 1/r), 0 after.
PiecewiseControl scaled_pulse(double r);

/// Bump functions 16 s^2 (1 - s)^2 on the dyadic subintervals of [lo, hi],
/// levels 0 .. levels-1 (2^levels - 1 functions in total).
struct TestDictionary {
  std::vector<std::pair<double, double>> supports;

  static TestDictionary dyadic(double lo, double hi, std::size_t levels);
  double support_begin() const;
  double support_end() const;
};

/// Exact int u(t) phi(t) dt for a scalar piecewise-constant u and the bump on [a, b].
double bump_pairing(const PiecewiseControl& u, double a, double b);

/// max over the dictionary of |int (u_k - u) phi|.
double weak_star_gap(const PiecewiseControl& uk, const PiecewiseControl& u, const TestDictionary& dict);

struct ClosureReport {
  std::vector<std::size_t> ks;
  std::vector<double> gaps;  ///< sup_{[0,T]} |x^{u_k} - x^u|, +inf if the member escaped
  std::vector<std::optional<double>> escape_times;
  ConvergenceReport report;
};

/// Throws NumericalError when the limit trajectory escapes before T.
ClosureReport closure_probe(const ControlSystem& sys, const WeakStarSequence& seq, const std::vector<std::size_t>& ks,
                            const Vec& x0, double T, const IntegratorConfig& cfg);

struct BlowupEntry {
  double rate = 0.0;
  std::optional<double> escape_time;
  double relative_error = kInf;  ///< |escape r - 1|
};

struct BlowupReport {
  std::vector<BlowupEntry> entries;
  bool limit_global = false;   ///< u = 0 solution reached the horizon
  double limit_max_dev = kInf;  ///< max |x - 1| for u = 0
};

/// x' = x^2 u from x(0) = 1 with u = scaled_pulse(r), integrated on [0, 2/r].
ControlSystem blowup_system();
BlowupReport blowup_probe(const std::vector<double>& rates, const IntegratorConfig& cfg);

/// u on [0, T_cut], w (absolute time) after.
PiecewiseControl replace_tail(const PiecewiseControl& u, double T_cut, const PiecewiseControl& w);

struct TailsEntry {
  double T_k = 0.0;
  double gap_replaced = 0.0;  ///< weak_star_gap(u~_k, u)
  double gap_original = 0.0;  ///< weak_star_gap(u_k, u)
};

struct TailsReport {
  std::vector<TailsEntry> entries;
};

/// Sizes of members, tails and horizons must agree.
TailsReport tails_replacement_probe(const PiecewiseControl& u, const std::vector<PiecewiseControl>& members,
                                    const std::vector<PiecewiseControl>& tails, const std::vector<double>& horizons,
                                    const TestDictionary& dict);

struct LiminfReport {
  std::vector<double> horizons;
  std::vector<double> member_costs;   ///< F_{T_k}(u_k)
  std::vector<bool> admissible;
  std::vector<double> recovery_costs;  ///< F_{T_k}(u)
  double f_infinity = kInf;            ///< truncated at T_max
  std::optional<double> tail_bound;
  double liminf_margin = -kInf;        ///< min_k F_{T_k}(u_k) - F_inf
  bool liminf_holds = false;           ///< margin >= -tol
  bool recovery_holds = false;         ///< recovery costs nondecreasing and <= F_inf + tol
};

LiminfReport liminf_spotcheck(const CostSpec& spec, const ControlSystem& sys, const std::vector<PiecewiseControl>& members,
                              const std::vector<double>& horizons, const PiecewiseControl& limit, const Vec& x0,
                              double T_max, const IntegratorConfig& cfg, double tol = 1e-6);

} // namespace horizonlab
