#pragma once

// Two-mode commuting switched linear systems x' = A_1 x or x' = A_2 x with
// running cost 1/2 |x|^2: bang-bang condition checks, exact single-switch
// costs and a relaxed direct solver.

#include "horizonlab/ode.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>

namespace horizonlab {

class SwitchedPair {
public:
  SwitchedPair(Mat A1, Mat A2);

  const Mat& A1() const noexcept { return A1_; }
  const Mat& A2() const noexcept { return A2_; }
  Mat B1() const { return A2_; }
  Mat B2() const { return A1_ - A2_; }
  Eigen::Index dim() const noexcept { return A1_.rows(); }

  /// |A1 A2 - A2 A1| (spectral norm).
  double commutator_norm() const;
  /// commutator_norm <= 1e-10 (1 + |A1| |A2|).
  bool commutes() const;

private:
  Mat A1_, A2_;
};

/// one_zero: u = 1 (mode A1) first, then u = 0. zero_one: the reverse.
enum class SwitchType { OneZero, ZeroOne };
enum class Verdict { Holds, Fails, Vacuous, Inconclusive };

std::string to_string(SwitchType t);
std::string to_string(Verdict v);
SwitchType parse_switch_type(const std::string& s);

struct ConditionOptions {
  std::size_t sphere_samples = 1u << 14;
  double zero_band = 1e-3;       ///< |x^T S x| < band counts as near-null
  std::size_t finsler_grid = 64;  ///< coarse mu points before golden refinement
};

struct ConditionReport {
  SwitchType type = SwitchType::OneZero;
  Verdict verdict = Verdict::Inconclusive;
  Verdict sampling_verdict = Verdict::Inconclusive;
  bool finsler_holds = false;
  std::optional<Vec> witness;
  std::optional<std::pair<double, double>> finsler_mu;
  std::pair<double, double> finsler_lambda{0.0, 0.0};  ///< best lambda_min for i = 1, 2
  std::size_t near_null_samples = 0;
  double min_margin = kInf;  ///< min over near-null samples of the signed quadratic forms
  bool definite_null_form = false;  ///< S(A1 - A2) definite: the null cone is {0}
  double commutator_norm = 0.0;
};

/// Quadratic forms of the condition: S = S(A1 - A2), Q_i = S(S A_i), with the
/// sign flipped for zero_one so that "holds" always means Q_i > 0 on the cone.
struct ConditionForms {
  Mat S;
  Mat Q1, Q2;
};
ConditionForms condition_forms(const SwitchedPair& pair, SwitchType type);

/// Quasi-random points on the unit sphere in R^n (R_d sequence pushed through
/// the inverse normal CDF and normalized). Deterministic.
Mat sphere_points(Eigen::Index n, std::size_t count);

/// Max over mu in [-mu_max, mu_max] of lambda_min(Q + mu S), mu_max = 10 (1 + |S A|).
std::pair<double, double> finsler_search(const Mat& Q, const Mat& S, double mu_max, std::size_t grid);

ConditionReport check_condition(const SwitchedPair& pair, SwitchType type, const ConditionOptions& opt = {});

/// Gramian int_0^L e^{A^T s} e^{A s} ds via one block matrix exponential.
Mat gramian(const Mat& A, double L);

/// Exact 1/2 int_0^T |x|^2 for the single-switch control of `type` at tau.
double single_switch_cost(const SwitchedPair& pair, SwitchType type, const Vec& x0, double T, double tau);
/// d/dtau of single_switch_cost.
double single_switch_cost_derivative(const SwitchedPair& pair, SwitchType type, const Vec& x0, double T, double tau);

/// Control of the pattern: first-mode value on [0, tau), second-mode value
/// after (tail included). tau = +inf gives the constant first-mode control.
PiecewiseControl single_switch_control(SwitchType type, double tau);

struct SingleSwitchOptions {
  std::size_t coarse_points = 257;
  double xtol = 1e-10;
};

struct SingleSwitchResult {
  double tau = 0.0;
  double cost = 0.0;
  bool flat_objective = false;
  std::size_t evaluations = 0;
};

/// argmin over tau in [0, T] (both constant controls included) of the exact
/// single-switch cost: coarse grid, golden section, then a bisection polish
/// on the derivative when the minimizer is interior.
SingleSwitchResult optimize_single_switch(const SwitchedPair& pair, SwitchType type, const Vec& x0, double T,
                                          const SingleSwitchOptions& opt = {});

/// Exact cost of a control that is constant on each of the N equal intervals.
double piecewise_cost(const SwitchedPair& pair, const Vec& x0, double T, const std::vector<double>& values);

struct RelaxedOptions {
  std::size_t max_iterations = 3000;
  double tol = 1e-9;  ///< on the projected-gradient norm, relative to (1 + J)
};

struct RelaxedResult {
  PiecewiseControl control;
  std::vector<double> values;
  double cost = 0.0;
  double gradient_norm = 0.0;  ///< projected gradient norm of the returned iterate
  std::size_t iterations = 0;
  bool converged = false;
};

/// dJ/du_j = int_{I_j} phi dt, phi from the costate.
std::vector<double> relaxed_gradient(const SwitchedPair& pair, const Vec& x0, double T, const std::vector<double>& values,
                                     const IntegratorConfig& cfg);

/// Projected gradient descent (Barzilai-Borwein steps with Armijo backtracking)
/// on the N interval values in [0, 1], started from u = 1/2.
RelaxedResult relaxed_direct_solve(const SwitchedPair& pair, const Vec& x0, double T, std::size_t N,
                                   const IntegratorConfig& cfg, const RelaxedOptions& opt = {});

} // namespace horizonlab
