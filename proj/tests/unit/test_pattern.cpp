#include "fixtures.hpp"

#include "horizonlab/pattern.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace horizonlab;
using horizonlab::testing::certified_pair;
using horizonlab::testing::certified_x0;
using horizonlab::testing::vec;

namespace {

bool same_pattern(const ExtractedPattern& a, const ExtractedPattern& b) {
  return a.N == b.N && a.taus == b.taus && a.values == b.values;
}

PiecewiseControl scalar_steps(std::vector<double> bp, const std::vector<double>& v, double tail) {
  std::vector<Vec> values;
  for (double x : v) values.push_back(vec({x}));
  return PiecewiseControl(std::move(bp), std::move(values), vec({tail}));
}

} // namespace

TEST(Classify, ConvergentNeedsHalvingGaps) {
  const std::vector<double> T{5, 10, 20, 40};
  SweepOptions opt;
  std::vector<double> gaps;
  EXPECT_EQ(classify(T, std::vector<double>{1.0, 1.4, 1.5, 1.5004}, opt, &gaps), TauClass::Convergent);
  EXPECT_EQ(gaps.size(), 3u);
  EXPECT_EQ(classify(T, std::vector<double>{1.0, 1.4, 1.7, 1.7004}, opt), TauClass::Undetermined);
  EXPECT_EQ(classify(T, std::vector<double>{1.0, 1.4, 1.5, 1.52}, opt), TauClass::Undetermined);
}

TEST(Classify, GapsBelowNoiseFloorCountAsZero) {
  const std::vector<double> T{5, 10, 20, 40};
  EXPECT_EQ(classify(T, std::vector<double>{0.0, 0.0, 1e-10, 0.0}, SweepOptions{}), TauClass::Convergent);
}

TEST(Classify, TrackingTheHorizonIsDivergent) {
  const std::vector<double> T{5, 10, 20, 40};
  EXPECT_EQ(classify(T, std::vector<double>{5.0, 10.0, 20.0, 40.0}, SweepOptions{}), TauClass::DivergentToInfinity);
  EXPECT_EQ(classify(T, std::vector<double>{1.0, 2.0, 20.0, 40.0}, SweepOptions{}), TauClass::DivergentToInfinity);
}

TEST(Sweep, FasterSecondModeSwitchesAtZero) {
  const SwitchedProblem p{SwitchedPair(-Mat::Identity(2, 2), -2.0 * Mat::Identity(2, 2)), SwitchType::OneZero,
                          certified_x0()};
  const auto r = sweep(p, {5, 10, 20, 40}, SweepOptions{});
  for (const auto& rec : r.records) EXPECT_EQ(rec.taus.at(0), 0.0);
  EXPECT_EQ(r.classes.at(0), TauClass::Convergent);
  EXPECT_EQ(r.tau_infinity.at(0), 0.0);
  EXPECT_FALSE(r.partial);
}

TEST(Sweep, NeverSwitchingIsDivergent) {
  const SwitchedProblem p{SwitchedPair(Mat::Zero(2, 2), 0.5 * Mat::Identity(2, 2)), SwitchType::OneZero,
                          certified_x0()};
  const auto r = sweep(p, {5, 10, 20, 40}, SweepOptions{});
  for (const auto& rec : r.records) EXPECT_EQ(rec.taus.at(0), rec.T);
  EXPECT_EQ(r.classes.at(0), TauClass::DivergentToInfinity);
  EXPECT_TRUE(std::isinf(r.tau_infinity.at(0)));
}

TEST(Sweep, CertifiedPairConverges) {
  const SwitchedProblem p{certified_pair(), SwitchType::OneZero, certified_x0()};
  const auto r = sweep(p, {5, 10, 20, 40, 80}, SweepOptions{});
  ASSERT_EQ(r.classes.at(0), TauClass::Convergent);
  const auto& g = r.diagnostics.at(0).gaps;
  ASSERT_EQ(g.size(), 4u);
  for (std::size_t k = 0; k + 1 < g.size(); ++k) EXPECT_LE(2.0 * g[k + 1], g[k]);
  EXPECT_LT(g.back(), 1e-3);
  for (const auto& rec : r.records) {
    ASSERT_TRUE(rec.residuals.has_value());
    EXPECT_LT(rec.residuals->hamiltonian_rel_var, 1e-3);
  }
}

TEST(Sweep, ZeroStateIsFlatEverywhere) {
  const SwitchedProblem p{certified_pair(), SwitchType::OneZero, Vec::Zero(2)};
  const auto r = sweep(p, {5, 10, 20}, SweepOptions{});
  for (const auto& rec : r.records) {
    EXPECT_EQ(rec.cost, 0.0);
    EXPECT_TRUE(rec.flat_objective);
  }
}

TEST(Sweep, SubcriticalSirCollapses) {
  SirParams sp;
  sp.beta_star = 0.15;
  sp.beta = 0.4;
  sp.gamma = 0.1;
  sp.i_max = 1.0;
  sp.lambda_b = 1.0;
  const SirNpiProblem p{sp, vec({0.2, 0.01}), Arc3Mode::FeedbackKeepIM};
  const auto r = sweep(p, {20, 40, 80}, SweepOptions{});
  for (const auto& rec : r.records) {
    ASSERT_EQ(rec.taus.size(), 3u);
    EXPECT_EQ(rec.taus[0], r.records[0].taus[0]);
    EXPECT_EQ(rec.taus[0], rec.taus[1]);
    EXPECT_EQ(rec.taus[1], rec.taus[2]);
  }
}

TEST(SweepProperty, WorkerCountDoesNotChangeResults) {
  const SwitchedProblem p{certified_pair(), SwitchType::OneZero, certified_x0()};
  SweepOptions one, three;
  three.jobs = 3;
  const auto a = sweep(p, {5, 10, 20, 40}, one);
  const auto b = sweep(p, {40, 20, 10, 5}, three);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t k = 0; k < a.records.size(); ++k) {
    EXPECT_EQ(a.records[k].T, b.records[k].T);
    EXPECT_EQ(a.records[k].taus, b.records[k].taus);
    EXPECT_EQ(a.records[k].cost, b.records[k].cost);
  }
}

TEST(Sweep, RejectsTooFewHorizons) {
  const SwitchedProblem p{certified_pair(), SwitchType::OneZero, certified_x0()};
  EXPECT_THROW(sweep(p, {5, 10}, SweepOptions{}), ConfigError);
  EXPECT_THROW(sweep(p, {5, 10, 10}, SweepOptions{}), ConfigError);
}

TEST(Certify, ZeroStateIsTriviallyCertified) {
  const SwitchedProblem p{certified_pair(), SwitchType::OneZero, Vec::Zero(2)};
  const auto c = certify_limit(p, {0.0}, 20.0, 10, CertifyOptions{});
  EXPECT_TRUE(c.certified);
  EXPECT_EQ(c.extrapolated_cost, 0.0);
  for (const auto& comp : c.competitors) EXPECT_EQ(comp.cost, 0.0);
}

TEST(Certify, CertifiedPairAgainstRelaxedAndPerturbations) {
  const SwitchedProblem p{certified_pair(), SwitchType::OneZero, certified_x0()};
  const auto r = sweep(p, {5, 10, 20, 40, 80}, SweepOptions{});
  const auto c = certify_limit(p, r.tau_infinity, 80.0, 50, CertifyOptions{});
  EXPECT_TRUE(c.certified);
  EXPECT_TRUE(c.local_minimum);
  ASSERT_TRUE(c.relaxed_rel_diff.has_value());
  EXPECT_LT(*c.relaxed_rel_diff, 1e-4);
  EXPECT_GE(c.competitors.size(), 50u);
}

TEST(Certify, RequiresLongEnoughHorizon) {
  const SwitchedProblem p{certified_pair(), SwitchType::OneZero, certified_x0()};
  EXPECT_THROW(certify_limit(p, {30.0}, 40.0, 5, CertifyOptions{}), ConfigError);
}

TEST(Certify, WorsePatternIsRejected) {
  const SwitchedProblem p{certified_pair(), SwitchType::OneZero, certified_x0()};
  const auto c = certify_limit(p, {3.0}, 40.0, 20, CertifyOptions{});
  EXPECT_FALSE(c.certified);
}

TEST(Extract, BangBangInputIsUnchanged) {
  const auto u = scalar_steps({0.0, 1.5, 4.0}, {1.0, 0.0}, 1.0);
  const auto e = extract_pattern(u);
  EXPECT_EQ(e.N, 3u);
  EXPECT_EQ(e.taus, (std::vector<double>{1.5, 4.0}));
  EXPECT_EQ(e.values, (std::vector<double>{1.0, 0.0, 1.0}));
}

TEST(Extract, SnapsChatterNearTheUpperBound) {
  std::vector<double> bp{0.0};
  std::vector<double> v;
  for (int k = 1; k <= 20; ++k) {
    bp.push_back(0.1 * k);
    v.push_back(k % 2 ? 0.97 : 0.995);
  }
  const auto e = extract_pattern(scalar_steps(bp, v, 0.0));
  EXPECT_EQ(e.N, 2u);
  ASSERT_EQ(e.taus.size(), 1u);
  EXPECT_NEAR(e.taus[0], 2.0, 1e-14);
  EXPECT_EQ(e.values, (std::vector<double>{1.0, 0.0}));
}

TEST(Extract, FractionalTransitionPreservesMass) {
  const auto e = extract_pattern(scalar_steps({0.0, 1.0, 1.5}, {1.0, 0.4}, 0.0));
  ASSERT_EQ(e.taus.size(), 1u);
  EXPECT_NEAR(e.taus[0], 1.2, 1e-14);
}

TEST(Extract, GridOverloadTreatsLastValueAsTail) {
  const std::vector<double> t{0.0, 1.0, 2.0, 3.0};
  const std::vector<double> v{0.0, 0.0, 1.0, 1.0};
  const auto e = extract_pattern(t, v);
  EXPECT_EQ(e.N, 2u);
  EXPECT_EQ(e.taus, (std::vector<double>{2.0}));
  EXPECT_EQ(e.values, (std::vector<double>{0.0, 1.0}));
}

TEST(Extract, RelaxedSolutionHasSingleSwitchNearParametric) {
  const auto pair = certified_pair();
  const double T = 10.0;
  const std::size_t N = 200;
  const auto rx = relaxed_direct_solve(pair, certified_x0(), T, N, IntegratorConfig{});
  const auto e = extract_pattern(rx.control, 0.05, 2.0 * T / N);
  const auto par = optimize_single_switch(pair, SwitchType::OneZero, certified_x0(), T);
  ASSERT_EQ(e.N, 2u);
  EXPECT_EQ(e.values, (std::vector<double>{1.0, 0.0}));
  EXPECT_LE(std::abs(e.taus[0] - par.tau), T / N);
}

TEST(ExtractProperty, Idempotent) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> bp{0.0};
    std::vector<double> v;
    const int n = 1 + static_cast<int>(unit(rng) * 12);
    for (int k = 0; k < n; ++k) {
      bp.push_back(bp.back() + 0.01 + unit(rng));
      const double r = unit(rng);
      v.push_back(r < 0.3 ? 0.0 : r < 0.6 ? 1.0 : unit(rng));
    }
    const double tail = unit(rng) < 0.5 ? 0.0 : 1.0;
    const auto e = extract_pattern(scalar_steps(bp, v, tail), 0.05, 0.2);
    const auto again = extract_pattern(to_control(e), 0.05, 0.2);
    EXPECT_TRUE(same_pattern(e, again)) << "trial " << trial;
    EXPECT_EQ(e.values.size(), e.taus.size() + 1);
    EXPECT_TRUE(std::is_sorted(e.taus.begin(), e.taus.end()));
  }
}

TEST(ProblemKind, Names) {
  EXPECT_EQ(problem_kind(SwitchedProblem{certified_pair(), SwitchType::OneZero, certified_x0()}), "switched");
  EXPECT_EQ(problem_kind(SirVaccProblem{SirParams{}, vec({0.9, 0.1})}), "sir_vacc");
  EXPECT_EQ(to_string(TauClass::DivergentToInfinity), "divergent");
}
