#include "fixtures.hpp"

#include "horizonlab/trajectory.hpp"
#include "horizonlab/types.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace horizonlab;
using horizonlab::testing::sampled;
using horizonlab::testing::vec;

namespace {

PiecewiseControl abc() {
  return PiecewiseControl({0.0, 1.0, 2.0}, {vec({1.0}), vec({2.0})}, vec({3.0}));
}

} // namespace

TEST(PiecewiseControl, EvaluatesInsideFirstInterval) { EXPECT_DOUBLE_EQ(abc().eval_scalar(0.5), 1.0); }

TEST(PiecewiseControl, IntervalsAreLeftClosed) {
  EXPECT_DOUBLE_EQ(abc().eval_scalar(1.0), 2.0);
  EXPECT_DOUBLE_EQ(abc().eval_left(1.0)(0), 1.0);
}

TEST(PiecewiseControl, TailExtendsPastLastBreakpoint) {
  EXPECT_DOUBLE_EQ(abc().eval_scalar(2.0), 3.0);
  EXPECT_DOUBLE_EQ(abc().eval_scalar(5.0), 3.0);
}

TEST(PiecewiseControl, EmptyIntervalsAreNeverSelected) {
  PiecewiseControl u({0.0, 1.0, 1.0, 2.0}, {vec({1.0}), vec({9.0}), vec({2.0})}, vec({0.0}));
  EXPECT_DOUBLE_EQ(u.eval_scalar(1.0), 2.0);
  EXPECT_DOUBLE_EQ(u.eval_left(1.0)(0), 1.0);
}

TEST(PiecewiseControl, RejectsMalformedInput) {
  EXPECT_THROW(PiecewiseControl({0.5, 1.0}, {vec({1.0})}, vec({0.0})), ConfigError);
  EXPECT_THROW(PiecewiseControl({0.0, 2.0, 1.0}, {vec({1.0}), vec({1.0})}, vec({0.0})), ConfigError);
  EXPECT_THROW(PiecewiseControl({0.0, 1.0}, {vec({1.0}), vec({1.0})}, vec({0.0})), ConfigError);
  EXPECT_THROW(PiecewiseControl({0.0, 1.0}, {vec({1.0, 2.0})}, vec({0.0})), ConfigError);
}

TEST(PiecewiseControl, SpliceSwitchesToShiftedTail) {
  const auto u = PiecewiseControl::constant(1.0);
  const auto w = PiecewiseControl({0.0, 1.0}, {vec({5.0})}, vec({7.0}));
  const auto s = u.splice(2.0, w);
  EXPECT_DOUBLE_EQ(s.eval_scalar(1.9), 1.0);
  EXPECT_DOUBLE_EQ(s.eval_scalar(2.5), 5.0);
  EXPECT_DOUBLE_EQ(s.eval_scalar(3.5), 7.0);
}

TEST(PiecewiseControl, JumpsInListsInteriorBreakpoints) {
  const auto j = abc().jumps_in(0.0, 2.0);
  ASSERT_EQ(j.size(), 1u);
  EXPECT_DOUBLE_EQ(j[0], 1.0);
}

TEST(TimeGrid, LocateClampsToLastInterval) {
  const auto g = TimeGrid::uniform(1.0, 4);
  EXPECT_EQ(g.locate(0.3), 1u);
  EXPECT_EQ(g.locate(1.0), 3u);
  EXPECT_THROW(TimeGrid({0.0, 0.0}), ConfigError);
}

TEST(SupDistance, IdenticalTrajectoriesAreAtDistanceZero) {
  const auto x = sampled([](double t) { return vec({std::sin(t), t}); }, 2.0, 50);
  EXPECT_EQ(sup_distance(x, x, 2.0), 0.0);
}

TEST(SupDistance, ConstantsGiveNormOfDifference) {
  const auto x = sampled([](double) { return vec({1.0, 2.0}); }, 1.0, 10);
  const auto y = sampled([](double) { return vec({4.0, 6.0}); }, 1.0, 10);
  EXPECT_NEAR(sup_distance(x, y, 1.0), 5.0, 1e-14);
}

TEST(SupDistance, LinearFunctionsOnUnitInterval) {
  const auto x = sampled([](double t) { return vec({t}); }, 1.0, 7);
  const auto y = sampled([](double t) { return vec({2.0 * t}); }, 1.0, 13);
  EXPECT_NEAR(sup_distance(x, y, 1.0), 1.0, 1e-14);
}

TEST(SupDistance, EscapedTrajectoryIsNotComparable) {
  auto x = sampled([](double t) { return vec({t}); }, 0.5, 10);
  x.escape_time = 0.5;
  const auto y = sampled([](double t) { return vec({t}); }, 1.0, 10);
  EXPECT_THROW(sup_distance(x, y, 1.0), NonComparableError);
}

TEST(Sobolev, ZeroFunctionHasZeroNorm) {
  const auto x = sampled([](double) { return vec({0.0}); }, 1.0, 10);
  EXPECT_EQ(sobolev_seminorm(x, 1.0, 0, 2.0), 0.0);
  EXPECT_EQ(sobolev_seminorm(x, 1.0, 1, 2.0), 0.0);
}

TEST(Sobolev, IdentityOrderZero) {
  const auto x = sampled([](double t) { return vec({t}); }, 1.0, 100);
  EXPECT_NEAR(sobolev_seminorm(x, 1.0, 0, 2.0), std::sqrt(1.0 / 3.0), 1e-10);
}

TEST(Sobolev, IdentityOrderOne) {
  const auto x = sampled([](double t) { return vec({t}); }, 1.0, 100);
  EXPECT_NEAR(sobolev_seminorm(x, 1.0, 1, 2.0), std::sqrt(4.0 / 3.0), 1e-10);
}

TEST(Sobolev, SupNormUsesGridMaxima) {
  const auto x = sampled([](double t) { return vec({3.0 * t - 2.5}); }, 1.0, 10);
  EXPECT_NEAR(sobolev_seminorm(x, 1.0, 0, kInf), 2.5, 1e-14);
  EXPECT_NEAR(sobolev_seminorm(x, 1.0, 1, kInf), 3.0, 1e-12);
}

TEST(Sobolev, RejectsBadOrderAndExponent) {
  const auto x = sampled([](double t) { return vec({t}); }, 1.0, 10);
  EXPECT_THROW(sobolev_seminorm(x, 1.0, 2, 2.0), ConfigError);
  EXPECT_THROW(sobolev_seminorm(x, 1.0, 0, 1.0), ConfigError);
}

TEST(LfMetric, IdenticalTrajectoriesGiveZero) {
  const auto x = sampled([](double t) { return vec({t}); }, 8.0, 80);
  const std::vector<double> Tk{1, 2, 4, 8};
  EXPECT_EQ(lf_metric(x, x, Tk), 0.0);
}

TEST(LfMetric, UnitGapsGiveOneHalf) {
  const auto x = sampled([](double) { return vec({0.0}); }, 8.0, 80);
  const auto y = sampled([](double) { return vec({1.0}); }, 8.0, 80);
  const std::vector<double> Tk{1, 2, 4, 8};
  EXPECT_NEAR(lf_metric(x, y, Tk), 0.5, 1e-15);
}

TEST(LfMetricProperty, AlwaysBelowOne) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 100.0);
  const std::vector<double> Tk{1, 2, 4};
  for (int trial = 0; trial < 50; ++trial) {
    const double a = g(rng), b = g(rng);
    const auto x = sampled([a](double t) { return vec({a * t}); }, 4.0, 40);
    const auto y = sampled([b](double t) { return vec({b * t * t}); }, 4.0, 40);
    const double d = lf_metric(x, y, Tk);
    EXPECT_GE(d, 0.0);
    EXPECT_LT(d, 1.0);
  }
}

TEST(SupDistanceProperty, TriangleInequalityAndSymmetry) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> c(-3.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    const double a = c(rng), b = c(rng), d = c(rng);
    const auto x = sampled([a](double t) { return vec({std::sin(a * t)}); }, 2.0, 37);
    const auto y = sampled([b](double t) { return vec({b * t}); }, 2.0, 53);
    const auto z = sampled([d](double t) { return vec({std::cos(d * t)}); }, 2.0, 29);
    EXPECT_DOUBLE_EQ(sup_distance(x, y, 2.0), sup_distance(y, x, 2.0));
    EXPECT_LE(sup_distance(x, z, 2.0), sup_distance(x, y, 2.0) + sup_distance(y, z, 2.0) + 1e-12);
  }
}

TEST(ConvergenceReport, FlagsStrictDecrease) {
  EXPECT_TRUE(make_convergence_report({1, 2, 3}, {3.0, 2.0, 1.0}).monotone_decreasing);
  EXPECT_FALSE(make_convergence_report({1, 2, 3}, {3.0, 3.0, 1.0}).monotone_decreasing);
}

TEST(FiniteDifference, ExactForLinearStates) {
  const auto x = sampled([](double t) { return vec({2.0 * t + 1.0}); }, 1.0, 20);
  const Mat d = finite_difference_derivative(x);
  for (Eigen::Index i = 0; i < d.cols(); ++i) EXPECT_NEAR(d(0, i), 2.0, 1e-12);
}
