#pragma once

// Shared instances and small builders for the test programs.

#include "horizonlab/dynamics.hpp"
#include "horizonlab/switched.hpp"
#include "horizonlab/trajectory.hpp"

#include <algorithm>
#include <functional>
#include <random>
#include <vector>

namespace horizonlab::testing {

/// Stable diagonal pair with a Finsler certificate for one_zero.
inline SwitchedPair certified_pair() {
  Mat A1(2, 2), A2(2, 2);
  A1 << -0.1, 0.0, 0.0, -0.8;
  A2 << -0.2, 0.0, 0.0, -0.6;
  return SwitchedPair(A1, A2);
}

inline Vec certified_x0() {
  Vec x0(2);
  x0 << 1.0, 2.0;
  return x0;
}

inline Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

/// Trajectory sampled from a closed form on n equispaced nodes of [0, T].
inline Trajectory sampled(const std::function<Vec(double)>& f, double T, std::size_t intervals) {
  TimeGrid g = TimeGrid::uniform(T, intervals);
  const Vec first = f(0.0);
  Mat states(first.size(), static_cast<Eigen::Index>(g.size()));
  for (std::size_t i = 0; i < g.size(); ++i) states.col(static_cast<Eigen::Index>(i)) = f(g[i]);
  return Trajectory{std::move(g), std::move(states), std::nullopt, {}};
}

/// Commuting pair A_i = V D_i V^{-1} with a well-conditioned random V.
inline SwitchedPair random_commuting_pair(Eigen::Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> eig(-1.0, 0.3);
  std::uniform_real_distribution<double> off(-0.5, 0.5);
  Mat V = Mat::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j) V(i, j) = off(rng);
  Vec d1(n), d2(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d1(i) = eig(rng);
    d2(i) = eig(rng);
  }
  const Mat Vinv = V.inverse();
  return SwitchedPair(V * d1.asDiagonal() * Vinv, V * d2.asDiagonal() * Vinv);
}

/// Bang control on four random intervals of [0, T] (values 0/1, tail random).
inline PiecewiseControl random_bang_control(double T, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(0.0, T);
  std::bernoulli_distribution coin(0.5);
  std::vector<double> cuts{pos(rng), pos(rng), pos(rng)};
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> bp{0.0, cuts[0], cuts[1], cuts[2], T};
  std::vector<Vec> values;
  for (int k = 0; k < 4; ++k) values.push_back(Vec::Constant(1, coin(rng) ? 1.0 : 0.0));
  return PiecewiseControl(bp, values, Vec::Constant(1, coin(rng) ? 1.0 : 0.0));
}

} // namespace horizonlab::testing
