#include <benchmark/benchmark.h>

#include "traction/domains.hpp"

using namespace traction;

static void BM_CylinderRule(benchmark::State& state) {
  const int order = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(volume_quadrature(Domain::cylinder(), order));
}
BENCHMARK(BM_CylinderRule)->Arg(8)->Arg(16)->Arg(32);

static void BM_IntegrateScalar(benchmark::State& state) {
  const auto rule = volume_quadrature(Domain::cylinder(), static_cast<int>(state.range(0)));
  const ScalarField f = [](const Vec3& x) { return x.x() * x.x() * x.y() * x.y() + x.z(); };
  for (auto _ : state) benchmark::DoNotOptimize(integrate_scalar(f, rule));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rule.size()));
}
BENCHMARK(BM_IntegrateScalar)->Arg(8)->Arg(16)->Arg(32);
