#pragma once

// Costate, switching function and optimality residuals for the switched
// problem x' = (B1 + u B2) x, u in [0, 1], J = 1/2 int |x|^2.

#include "horizonlab/ode.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace horizonlab {

/// p on the grid of the state trajectory it was solved against.
struct CostateTrajectory {
  TimeGrid grid;
  Mat costates;  ///< one column per node
  std::vector<std::size_t> breaks;

  Vec p(std::size_t i) const { return costates.col(static_cast<Eigen::Index>(i)); }
  std::size_t size() const noexcept { return grid.size(); }
};

/// Backward solve of p' = -x - B1^T p - u B2^T p, p(T) = 0, on the nodes of x.
/// Between nodes x is replaced by its cubic Hermite interpolant built from the
/// exact one-sided derivatives (B1 + u B2) x.
CostateTrajectory costate_solve(const Mat& B1, const Mat& B2, const Trajectory& x, const PiecewiseControl& u,
                                const IntegratorConfig& cfg);

struct SwitchingSamples {
  std::vector<double> t;
  std::vector<double> phi;   ///< p^T B2 x
  std::vector<double> dphi;  ///< -x^T S(B2) x
};

SwitchingSamples switching_function(const Mat& B2, const Trajectory& x, const CostateTrajectory& p);

/// H = 1/2 x^T x + p^T B1 x + u phi per node. At a jump node the value of the
/// segment to the left is used (the last node always uses u(T-)).
std::vector<double> hamiltonian_samples(const Mat& B1, const Mat& B2, const Trajectory& x, const CostateTrajectory& p,
                                        const PiecewiseControl& u);

struct PmpResiduals {
  double weierstrass_violation = 0.0;  ///< fraction of [0, T]
  double hamiltonian_rel_var = 0.0;
  std::size_t phi_zero_crossings = 0;
  double delta = 0.0;  ///< band used for sign decisions
};

/// delta defaults to 1e-6 (1 + max |phi|).
PmpResiduals residuals(const SwitchingSamples& phi, const PiecewiseControl& u, const std::vector<double>& H,
                       std::optional<double> delta = std::nullopt);

/// Sign changes of phi outside the band |phi| <= delta.
std::size_t sign_changes(const std::vector<double>& phi, double delta);

/// Convenience: simulate, solve the costate and compute the residuals.
struct PmpAnalysis {
  Trajectory x;
  CostateTrajectory p;
  SwitchingSamples phi;
  std::vector<double> H;
  PmpResiduals residuals;
};

PmpAnalysis analyze_switched(const Mat& B1, const Mat& B2, const PiecewiseControl& u, const Vec& x0, double T,
                             const IntegratorConfig& cfg);

} // namespace horizonlab
