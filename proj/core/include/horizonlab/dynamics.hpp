#pragma once

// Control-affine systems x' = a(t, x) + b(t, x) u and the exact linear-system
// machinery (matrix exponential, state-transition matrix, variation of
// constants) used as independent oracles for the integrator.

#include "horizonlab/ode.hpp"
#include "horizonlab/trajectory.hpp"

#include <functional>
#include <span>
#include <string>
#include <variant>

namespace horizonlab {

using DriftFn = std::function<Vec(double t, const Vec& x)>;
using InputMapFn = std::function<Mat(double t, const Vec& x)>;
using MatrixFn = std::function<Mat(double t)>;

struct GenericSystem {};

/// x' = (B1 + u B2) x, i.e. u A1 + (1-u) A2 with A1 = B1 + B2, A2 = B1.
struct SwitchedLinearSystem {
  Mat B1;
  Mat B2;
  Mat A1() const { return B1 + B2; }
  Mat A2() const { return B1; }
};

/// s' = -b s i - v s,  i' = b s i - gamma i,  control u = (b, v).
struct SirSystem {
  double beta_star;
  double beta;
  double gamma;
  double v_max;
};

/// x' = A(t) x + B(t) u.
struct LinearTvSystem {
  MatrixFn A;
  MatrixFn B;
};

using SystemStructure = std::variant<GenericSystem, SwitchedLinearSystem, SirSystem, LinearTvSystem>;

class ControlSystem {
public:
  static ControlSystem generic(Eigen::Index n, Eigen::Index m, DriftFn drift, InputMapFn input_map);
  static ControlSystem switched_linear(const Mat& B1, const Mat& B2);
  /// Builds from the subsystem matrices: B1 = A2, B2 = A1 - A2.
  static ControlSystem switched_from_pair(const Mat& A1, const Mat& A2);
  static ControlSystem sir(double beta_star, double beta, double gamma, double v_max);
  static ControlSystem linear_tv(Eigen::Index n, Eigen::Index m, MatrixFn A, MatrixFn B);

  Eigen::Index state_dim() const noexcept { return n_; }
  Eigen::Index control_dim() const noexcept { return m_; }
  const SystemStructure& structure() const noexcept { return structure_; }

  Vec drift(double t, const Vec& x) const { return drift_(t, x); }
  Mat input_map(double t, const Vec& x) const { return input_(t, x); }
  /// f(t, x, u) = a(t, x) + b(t, x) u.
  Vec rhs(double t, const Vec& x, const Vec& u) const;

private:
  ControlSystem(Eigen::Index n, Eigen::Index m, DriftFn drift, InputMapFn input, SystemStructure s);

  Eigen::Index n_;
  Eigen::Index m_;
  DriftFn drift_;
  InputMapFn input_;
  SystemStructure structure_;
};

/// Maximal solution on [0, min(T, escape)] with restarts at control breakpoints.
/// `restarts` adds further restart times; two runs given the same set share
/// one output grid and can be compared node by node.
Trajectory integrate(const ControlSystem& sys, const PiecewiseControl& u, const Vec& x0, double T,
                     const IntegratorConfig& cfg, std::span<const double> restarts = {});

/// Scaling-and-squaring Pade matrix exponential.
Mat expm(const Mat& A);

/// exp(B1 t + B2 int_0^t u) x0; exact for commuting B1, B2 and scalar u.
Vec commuting_switched_solution(const Mat& B1, const Mat& B2, const PiecewiseControl& u, const Vec& x0, double t);

/// int_0^t u(s) ds for a scalar piecewise control (first component).
double control_integral(const PiecewiseControl& u, double t);

/// Phi(t1, t0) with M' = A(t) M, M(t0) = I, integrated column-wise.
Mat state_transition(const MatrixFn& A, Eigen::Index n, double t0, double t1, const IntegratorConfig& cfg);

/// x(t) = Phi(t,0) x0 + int_0^t Phi(t,s) B(s) u(s) ds, with Phi(t,0) cached on
/// the output grid and the convolution evaluated by composite Simpson.
Trajectory variation_of_constants(const MatrixFn& A, const MatrixFn& B, const PiecewiseControl& u, const Vec& x0,
                                  double T, const IntegratorConfig& cfg);

struct TransitionBoundReport {
  double lambda_T = 0.0;     ///< grid max of the operator 2-norm of A(t)
  double max_ratio = 0.0;    ///< max |Phi(t,s)| / exp(lambda_T (t - s))
  std::size_t pairs_checked = 0;
  bool holds = false;        ///< max_ratio <= 1 + tol
};

/// Checks |Phi(t,s)| <= exp(lambda_T (t-s)) on `samples` x `samples` grid pairs s <= t.
TransitionBoundReport transition_bound_check(const MatrixFn& A, Eigen::Index n, double T, std::size_t samples,
                                             const IntegratorConfig& cfg, double tol = 1e-8);

} // namespace horizonlab
