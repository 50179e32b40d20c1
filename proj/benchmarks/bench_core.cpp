#include "horizonlab/dynamics.hpp"
#include "horizonlab/switched.hpp"

#include <benchmark/benchmark.h>

using namespace horizonlab;

namespace {

SwitchedPair pair2() {
  Mat A1(2, 2), A2(2, 2);
  A1 << -0.1, 0.0, 0.0, -0.8;
  A2 << -0.2, 0.0, 0.0, -0.6;
  return SwitchedPair(A1, A2);
}

Vec x0() {
  Vec x(2);
  x << 1.0, 2.0;
  return x;
}

} // namespace

static void BM_Expm(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const Mat A = Mat::Random(n, n);
  for (auto _ : state) benchmark::DoNotOptimize(expm(A));
}
BENCHMARK(BM_Expm)->Arg(2)->Arg(8)->Arg(32);

static void BM_IntegrateChatter(benchmark::State& state) {
  const auto p = pair2();
  const auto sys = ControlSystem::switched_from_pair(p.A1(), p.A2());
  const auto k = static_cast<std::size_t>(state.range(0));
  std::vector<double> v(2 * k);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = i % 2 == 0 ? 1.0 : 0.0;
  const auto u = PiecewiseControl::uniform(5.0, v, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(integrate(sys, u, x0(), 5.0, IntegratorConfig{}));
}
BENCHMARK(BM_IntegrateChatter)->Arg(4)->Arg(64);

static void BM_SingleSwitch(benchmark::State& state) {
  const auto p = pair2();
  for (auto _ : state)
    benchmark::DoNotOptimize(optimize_single_switch(p, SwitchType::OneZero, x0(), static_cast<double>(state.range(0))));
}
BENCHMARK(BM_SingleSwitch)->Arg(5)->Arg(40);

static void BM_RelaxedSolve(benchmark::State& state) {
  const auto p = pair2();
  const auto N = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(relaxed_direct_solve(p, x0(), 10.0, N, IntegratorConfig{}));
}
BENCHMARK(BM_RelaxedSolve)->Arg(20)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
