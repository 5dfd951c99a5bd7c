#include <benchmark/benchmark.h>

#include "traction/galerkin.hpp"
#include "traction/loads.hpp"

using namespace traction;

static void BM_BuildSpace(benchmark::State& state) {
  const SpaceSpec spec{SpaceKind::Full, static_cast<int>(state.range(0)), 4};
  for (auto _ : state) benchmark::DoNotOptimize(build_space(spec, Domain::cylinder()));
}
BENCHMARK(BM_BuildSpace)->Arg(2)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

static void BM_Assemble(benchmark::State& state) {
  const auto space = build_space({SpaceKind::Full, static_cast<int>(state.range(0)), 4}, Domain::cylinder());
  const auto spec = LoadSpec::cylinder_counterexample(0.01);
  for (auto _ : state) benchmark::DoNotOptimize(assemble(space, spec));
  state.counters["dim"] = space.dim();
}
BENCHMARK(BM_Assemble)->Arg(2)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

static void BM_ProjectedCG(benchmark::State& state) {
  const auto space = build_space({SpaceKind::Full, static_cast<int>(state.range(0)), 4}, Domain::cylinder());
  const auto sys = assemble(space, LoadSpec::cylinder_counterexample(0.01));
  for (auto _ : state) benchmark::DoNotOptimize(solve_for_rotation(sys, Mat3::Identity()));
  state.counters["dim"] = sys.dim();
}
BENCHMARK(BM_ProjectedCG)->Arg(2)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);
