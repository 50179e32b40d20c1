#pragma once

// Running costs l(t,x,u) = l1(t,x) + l2(t,x,u), the half-line tail term, the
// state/control indicator constraints and the coercivity certificate.

#include "horizonlab/dynamics.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>

namespace horizonlab {

/// lo <= x <= hi componentwise.
struct BoxSet {
  Vec lo;
  Vec hi;
};
/// |x - center| <= radius (Euclidean).
struct BallSet {
  Vec center;
  double radius;
};
/// normal . x <= offset.
struct HalfspaceSet {
  Vec normal;
  double offset;
};
/// x >= 0 componentwise and sum(x) <= 1.
struct SimplexSet {};

using ControlSet = std::variant<BoxSet, BallSet>;
using StateSet = std::variant<BoxSet, HalfspaceSet, SimplexSet>;

/// Membership with slack `margin` (> 0 enlarges the set, < 0 shrinks it).
bool contains(const ControlSet& set, const Vec& u, double margin = 0.0);
bool contains(const StateSet& set, const Vec& x, double margin = 0.0);
/// Compact control sets (boxes with finite bounds, balls) are always compact
/// here; kept as a predicate so callers do not depend on the variant layout.
bool is_compact(const ControlSet& set);

using StateCostFn = std::function<double(double t, const Vec& x)>;
using ControlCostFn = std::function<double(double t, const Vec& x, const Vec& u)>;
using FeedbackFn = std::function<Vec(double t, const Vec& x)>;

/// Certificate l2(t,x,u) >= alpha |u|^p - gamma(t).
struct CoercivityCertificate {
  double alpha = 1.0;
  std::function<double(double)> gamma = [](double) { return 0.0; };
};

struct CostSpec {
  StateCostFn l1 = [](double, const Vec&) { return 0.0; };
  ControlCostFn l2 = [](double, const Vec&, const Vec&) { return 0.0; };
  double p = 2.0;  ///< in (1, inf]
  std::optional<ControlSet> U;
  std::optional<StateSet> X;
  /// Slack used when checking X at grid nodes (negative tightens).
  double state_margin = 0.0;
  std::optional<FeedbackFn> greedy;
  std::optional<CoercivityCertificate> coercivity;

  /// Structural checks: p range, U required for p = inf.
  void validate() const;
};

enum class ViolationKind { None, State, Control, Inadmissible };

struct Violation {
  ViolationKind kind = ViolationKind::None;
  std::optional<double> time;
};

std::string to_string(ViolationKind k);

struct CostBreakdown {
  double running = 0.0;  ///< may be +inf
  double tail = 0.0;     ///< may be +inf
  Violation violation;

  double total() const;
  bool admissible() const { return violation.kind == ViolationKind::None; }
};

/// J_T(u, x^{u,x0}) including the tail term; extended values encode failure.
CostBreakdown evaluate(const CostSpec& spec, const ControlSystem& sys, const PiecewiseControl& u, const Vec& x0,
                       double T, const IntegratorConfig& cfg);

/// Same, on an already-computed trajectory (must reach T unless it escaped).
CostBreakdown evaluate_on(const CostSpec& spec, const Trajectory& x, const PiecewiseControl& u, double T);

/// Running cost integral on [0, T] along x, Simpson per smooth segment.
/// Returns +inf when the integrand is infinite at some node.
double running_cost(const CostSpec& spec, const Trajectory& x, const PiecewiseControl& u, double T);

/// int_T^inf |u|^p in closed form (p < inf); +inf unless u is eventually 0.
double tail_integral(const PiecewiseControl& u, double T, double p);

struct TruncatedInfiniteCost {
  CostBreakdown cost;            ///< running cost on [0, T_max], tail term 0
  std::optional<double> tail_bound;  ///< bound on the neglected int_{T_max}^inf l
  bool tail_unknown = false;     ///< no decaying fit available
  double decay_rate = 0.0;       ///< fitted exponential rate of the integrand
};

/// F_inf approximated by truncation at T_max plus an explicit bound of the
/// neglected tail from an exponential fit of the integrand on the last quarter.
TruncatedInfiniteCost evaluate_truncated_infinite(const CostSpec& spec, const ControlSystem& sys,
                                                  const PiecewiseControl& u, const Vec& x0, double T_max,
                                                  const IntegratorConfig& cfg);

struct ProbeDomain {
  double t_max = 10.0;
  Eigen::Index state_dim = 1;
  double state_radius = 10.0;
  Eigen::Index control_dim = 1;
  double control_radius = 10.0;
};

struct CoercivityReport {
  bool compact_control_set = false;  ///< p = inf with compact U: no certificate needed
  std::size_t samples = 0;
  double worst_margin = kInf;        ///< min of l2 - (alpha |u|^p - gamma(t))
  Vec worst_u;
  bool passed = false;
};

/// Random search for a violation of the coercivity certificate.
CoercivityReport coercivity_probe(const CostSpec& spec, const ProbeDomain& domain, std::size_t sample_count,
                                  std::uint64_t seed);

/// Checks l2(t,x,u_g(t,x)) = 0 on random samples; returns max |l2|.
double greedy_residual(const CostSpec& spec, const ProbeDomain& domain, std::size_t sample_count, std::uint64_t seed);

// Cost specifications of the worked examples.

/// l1 = |x|^2 / 2, l2 = 0, p = inf, U = [0, 1], greedy u_g = 0.
CostSpec switched_quadratic_cost(Eigen::Index n);

} // namespace horizonlab
