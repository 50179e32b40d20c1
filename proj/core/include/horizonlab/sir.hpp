#pragma once

// SIR epidemic with transmission control b in [beta_star, beta] and
// vaccination v in [0, v_max]:
//   s' = -b s i - v s,   i' = b s i - gamma i,
// running cost lambda_b (beta - b) + lambda_v v + lambda_i i and the
// constraint i <= i_max.

#include "horizonlab/costs.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

namespace horizonlab {

struct SirParams {
  double beta_star = 0.1;
  double beta = 0.3;
  double gamma = 0.1;
  double v_max = 0.1;
  double i_max = 1.0;
  double lambda_b = 0.0;
  double lambda_v = 0.0;
  double lambda_i = 0.0;

  void validate() const;
  ControlSystem system() const;
};

/// Throws DomainError unless s >= 0, i >= 0 and s + i <= 1 (to 1e-12).
void check_unit_triangle(const Vec& x0);

/// s + i - (gamma / b) ln s, conserved for v = 0 and constant b.
double sir_first_integral(double s, double i, double gamma, double b);

/// Merges scalar controls b and v into the two-dimensional control (b, v).
PiecewiseControl merge_controls(const PiecewiseControl& b, const PiecewiseControl& v);

/// Trajectory with rows (s, i). Controls must take values in their boxes.
Trajectory sir_simulate(const SirParams& p, const PiecewiseControl& b, const PiecewiseControl& v, const Vec& x0,
                        double T, const IntegratorConfig& cfg);

/// l1 = lambda_i i, l2 = lambda_b (beta - b) + lambda_v v, p = inf,
/// U = [beta_star, beta] x [0, v_max], X = {i <= i_max}.
CostSpec sir_cost_spec(const SirParams& p);

struct TriangleReport {
  std::size_t trials = 0;
  double max_violation = 0.0;     ///< max of -s, -i, s + i - 1 over all nodes (0 if none positive)
  double max_sum_increase = 0.0;  ///< largest node-to-node increase of s + i
  bool sum_nonincreasing = true;  ///< max_sum_increase <= 1e-12
};

TriangleReport triangle_invariance_check(const SirParams& p, std::size_t trials, std::uint64_t seed,
                                         const IntegratorConfig& cfg, double T = 20.0, std::size_t intervals = 6);

/// Simulation with the cost carried as a third state, so non-constant
/// control arcs are integrated with the same accuracy as the dynamics.
struct SirEvaluation {
  Trajectory x;  ///< rows (s, i)
  double cost = 0.0;
  double max_i = 0.0;
  bool feasible = false;  ///< max_i <= i_max + constraint_tol
};

// ---- vaccination: b = beta, v = v_max on [0, tau1), 0 after -------------

struct SirSolveOptions {
  std::size_t coarse_points = 64;
  double xtol = 1e-9;
  double constraint_tol = 1e-9;
  /// Output spacing used inside searches; the returned optimum is re-evaluated
  /// with the spacing of the integrator configuration.
  double search_output_step = 0.01;
};

PiecewiseControl vaccination_control(const SirParams& p, double tau1);

SirEvaluation evaluate_vaccination(const SirParams& p, const Vec& x0, double T, double tau1,
                                   const IntegratorConfig& cfg, double constraint_tol = 1e-9);

struct VaccinationResult {
  double tau1 = 0.0;
  double cost = kInf;
  bool feasible = false;
  double max_i = 0.0;
  double slack = 0.0;  ///< i_max - max i
  std::size_t evaluations = 0;
};

/// Minimizes over tau1 in [0, T]; infeasible candidates score +inf. When no
/// candidate is feasible the result has feasible = false.
VaccinationResult optimize_vaccination(const SirParams& p, const Vec& x0, double T, const IntegratorConfig& cfg,
                                       const SirSolveOptions& opt = {});

// ---- NPI: beta, beta_star, boundary arc, beta -----------------------------

enum class Arc3Mode { FeedbackKeepIM, FormulaAsPrinted };
std::string to_string(Arc3Mode m);
Arc3Mode parse_arc3_mode(const std::string& s);

struct NpiControl {
  double tau1 = 0.0;
  double tau2 = 0.0;
  double tau3 = 0.0;
  Arc3Mode mode = Arc3Mode::FeedbackKeepIM;
};

/// Transmission rate on the third arc, clipped to [beta_star, beta].
/// Feedback: gamma / s. Printed: beta - gamma / (s2 + gamma i_max (tau2 - t)),
/// beta_star when the denominator is not positive.
double arc3_rate(const SirParams& p, Arc3Mode mode, double s2, double tau2, double t, double s);

struct NpiEvaluation : SirEvaluation {
  double arc_max_dev = 0.0;  ///< max |i - i_max| at nodes inside (tau2, tau3)
};

NpiEvaluation evaluate_npi(const SirParams& p, const NpiControl& c, const Vec& x0, double T,
                           const IntegratorConfig& cfg, double constraint_tol = 1e-9);

struct NpiSolution {
  NpiControl control;
  double cost = kInf;
  bool feasible = false;
  double max_i = 0.0;
  double arc_max_dev = 0.0;
  bool saturates = false;  ///< non-empty third arc with arc_max_dev < 1e-4
  std::size_t evaluations = 0;
};

NpiSolution optimize_npi_mode(const SirParams& p, const Vec& x0, double T, Arc3Mode mode,
                              const IntegratorConfig& cfg, const SirSolveOptions& opt = {});

struct NpiReport {
  NpiSolution feedback;
  NpiSolution printed;
  std::optional<Arc3Mode> saturating;  ///< first mode (feedback first) that saturates i = i_max

  const NpiSolution& get(Arc3Mode m) const { return m == Arc3Mode::FeedbackKeepIM ? feedback : printed; }
};

/// Both third-arc modes. Requires lambda_i = 0 and ignores v (v = 0).
NpiReport optimize_npi(const SirParams& p, const Vec& x0, double T, const IntegratorConfig& cfg,
                       const SirSolveOptions& opt = {});

} // namespace horizonlab
