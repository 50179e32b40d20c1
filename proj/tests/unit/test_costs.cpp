#include "fixtures.hpp"

#include "horizonlab/costs.hpp"
#include "horizonlab/sir.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace horizonlab;
using horizonlab::testing::vec;

namespace {

CostSpec quadratic_control_cost(double alpha) {
  CostSpec c;
  c.l2 = [](double, const Vec&, const Vec& u) { return u.squaredNorm(); };
  c.p = 2.0;
  c.coercivity = CoercivityCertificate{alpha, [](double) { return 0.0; }};
  return c;
}

ControlSystem integrator1() {
  return ControlSystem::generic(
      1, 1, [](double, const Vec&) { return Vec::Zero(1); }, [](double, const Vec&) { return Mat::Identity(1, 1); });
}

} // namespace

TEST(Sets, Membership) {
  EXPECT_TRUE(contains(ControlSet{BoxSet{vec({0.0}), vec({1.0})}}, vec({1.0})));
  EXPECT_FALSE(contains(ControlSet{BoxSet{vec({0.0}), vec({1.0})}}, vec({1.1})));
  EXPECT_TRUE(contains(ControlSet{BoxSet{vec({0.0}), vec({1.0})}}, vec({1.05}), 0.1));
  EXPECT_TRUE(contains(ControlSet{BallSet{vec({0.0, 0.0}), 1.0}}, vec({0.6, 0.8})));
  EXPECT_FALSE(contains(StateSet{SimplexSet{}}, vec({0.6, 0.5})));
  EXPECT_TRUE(contains(StateSet{HalfspaceSet{vec({0.0, 1.0}), 0.2}}, vec({0.9, 0.2})));
}

TEST(Evaluate, ZeroCostGivesZero) {
  CostSpec c;
  c.p = 2.0;
  const auto u = PiecewiseControl({0.0, 2.0}, {vec({1.0})}, vec({0.0}));
  const auto r = evaluate(c, integrator1(), u, vec({0.0}), 3.0, IntegratorConfig{});
  EXPECT_TRUE(r.admissible());
  EXPECT_EQ(r.total(), 0.0);
}

TEST(Evaluate, NonzeroTailDivergesForFiniteExponent) {
  const auto u = PiecewiseControl({0.0, 1.0}, {vec({0.0})}, vec({0.5}));
  const auto r = evaluate(quadratic_control_cost(1.0), integrator1(), u, vec({0.0}), 2.0, IntegratorConfig{});
  EXPECT_TRUE(std::isinf(r.tail));
  EXPECT_TRUE(std::isinf(r.total()));
}

TEST(Evaluate, SwitchedCostVanishesFromOrigin) {
  const auto pair = horizonlab::testing::certified_pair();
  const auto sys = ControlSystem::switched_from_pair(pair.A1(), pair.A2());
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    const auto u = horizonlab::testing::random_bang_control(6.0, rng);
    const auto r = evaluate(switched_quadratic_cost(2), sys, u, Vec::Zero(2), 6.0, IntegratorConfig{});
    EXPECT_EQ(r.total(), 0.0);
  }
}

TEST(Evaluate, ControlOutsideBoxIsInadmissibleForInfiniteExponent) {
  const auto pair = horizonlab::testing::certified_pair();
  const auto sys = ControlSystem::switched_from_pair(pair.A1(), pair.A2());
  const auto u = PiecewiseControl({0.0, 1.0}, {vec({1.5})}, vec({0.0}));
  const auto r = evaluate(switched_quadratic_cost(2), sys, u, vec({1.0, 1.0}), 2.0, IntegratorConfig{});
  EXPECT_EQ(r.violation.kind, ViolationKind::Control);
  EXPECT_TRUE(std::isinf(r.total()));
}

TEST(Evaluate, EscapeIsInadmissible) {
  const auto sys = ControlSystem::generic(
      1, 1, [](double, const Vec&) { return Vec::Zero(1); },
      [](double, const Vec& x) { return Mat::Constant(1, 1, x(0) * x(0)); });
  CostSpec c;
  c.l1 = [](double, const Vec& x) { return x.squaredNorm(); };
  c.p = 2.0;
  const auto r = evaluate(c, sys, PiecewiseControl({0.0, 3.0}, {vec({1.0})}, vec({0.0})), vec({1.0}), 3.0,
                          IntegratorConfig{});
  EXPECT_EQ(r.violation.kind, ViolationKind::Inadmissible);
  EXPECT_TRUE(std::isinf(r.total()));
}

TEST(Evaluate, RunningCostMatchesClosedForm) {
  // x' = u with u = 1 on [0, 2): x = t, int x^2 = 8/3, int u^2 = 2
  CostSpec c = quadratic_control_cost(1.0);
  c.l1 = [](double, const Vec& x) { return x.squaredNorm(); };
  const auto u = PiecewiseControl({0.0, 2.0}, {vec({1.0})}, vec({0.0}));
  const auto r = evaluate(c, integrator1(), u, vec({0.0}), 3.0, IntegratorConfig{});
  EXPECT_NEAR(r.running, 8.0 / 3.0 + 4.0 + 2.0, 1e-9);  // x = 2 on [2, 3]
  EXPECT_EQ(r.tail, 0.0);
}

TEST(TailIntegral, ClosedFormForCompactSupport) {
  const auto u = PiecewiseControl({0.0, 1.0, 4.0}, {vec({1.0}), vec({-2.0})}, vec({0.0}));
  EXPECT_DOUBLE_EQ(tail_integral(u, 2.0, 2.0), 8.0);
  EXPECT_DOUBLE_EQ(tail_integral(u, 0.5, 3.0), 0.5 + 24.0);
  EXPECT_EQ(tail_integral(u, 5.0, 2.0), 0.0);
  EXPECT_TRUE(std::isinf(tail_integral(PiecewiseControl::constant(0.1), 5.0, 2.0)));
}

TEST(TruncatedInfinite, ZeroCostHasZeroTailBound) {
  CostSpec c;
  c.p = 2.0;
  const auto r = evaluate_truncated_infinite(c, integrator1(), PiecewiseControl::constant(0.0), vec({1.0}), 10.0,
                                             IntegratorConfig{});
  EXPECT_EQ(r.cost.total(), 0.0);
  ASSERT_TRUE(r.tail_bound.has_value());
  EXPECT_EQ(*r.tail_bound, 0.0);
}

TEST(TruncatedInfinite, StableSwitchedTailIsNegligible) {
  const auto pair = horizonlab::testing::certified_pair();
  const auto sys = ControlSystem::switched_from_pair(pair.A1(), pair.A2());
  const auto u = PiecewiseControl({0.0, 0.7}, {vec({1.0})}, vec({0.0}));
  const auto r = evaluate_truncated_infinite(switched_quadratic_cost(2), sys, u, horizonlab::testing::certified_x0(),
                                             80.0, IntegratorConfig{});
  ASSERT_TRUE(std::isfinite(r.cost.total()));
  ASSERT_TRUE(r.tail_bound.has_value());
  EXPECT_LT(*r.tail_bound, 1e-6 * r.cost.total());
  EXPECT_NEAR(r.decay_rate, 0.4, 1e-3);  // slowest mode e^{-0.2 t}, squared
}

TEST(TruncatedInfinite, SirInfectionTailDecays) {
  SirParams p;
  p.beta = 0.3;
  p.gamma = 0.1;
  p.lambda_i = 1.0;
  const auto b = PiecewiseControl::constant(p.beta);
  const auto v = PiecewiseControl::constant(0.0);
  const auto r = evaluate_truncated_infinite(sir_cost_spec(p), p.system(), merge_controls(b, v), vec({0.9, 0.01}),
                                             200.0, IntegratorConfig{});
  ASSERT_TRUE(std::isfinite(r.cost.total()));
  ASSERT_TRUE(r.tail_bound.has_value());
  EXPECT_GT(r.decay_rate, 0.0);
  EXPECT_LT(*r.tail_bound, 1e-3 * r.cost.total());
}

TEST(Coercivity, ExactCertificateHasZeroMargin) {
  const auto r = coercivity_probe(quadratic_control_cost(1.0), ProbeDomain{}, 1000, 1);
  EXPECT_NEAR(r.worst_margin, 0.0, 1e-10);
}

TEST(Coercivity, TooStrongCertificateIsFalsified) {
  const auto r = coercivity_probe(quadratic_control_cost(2.0), ProbeDomain{}, 1000, 1);
  EXPECT_LT(r.worst_margin, 0.0);
  EXPECT_FALSE(r.passed);
}

TEST(Coercivity, CompactControlSetNeedsNoCertificate) {
  SirParams p;
  p.lambda_b = 1.0;
  const auto r = coercivity_probe(sir_cost_spec(p), ProbeDomain{}, 10, 1);
  EXPECT_TRUE(r.compact_control_set);
  EXPECT_TRUE(r.passed);
}

TEST(Coercivity, MissingCertificateIsAnError) {
  CostSpec c;
  c.p = 2.0;
  EXPECT_THROW(coercivity_probe(c, ProbeDomain{}, 10, 1), ConfigError);
}

TEST(Greedy, SwitchedGreedyAnnihilatesControlCost) {
  ProbeDomain d;
  d.state_dim = 2;
  EXPECT_EQ(greedy_residual(switched_quadratic_cost(2), d, 100, 3), 0.0);
}

TEST(CostSpec, InfiniteExponentNeedsControlSet) {
  CostSpec c;
  c.p = kInf;
  EXPECT_THROW(c.validate(), ConfigError);
  c.p = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
}
