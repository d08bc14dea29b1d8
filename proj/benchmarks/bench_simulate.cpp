#include <benchmark/benchmark.h>

#include "wavechaos/asymptotics.hpp"
#include "wavechaos/simulate.hpp"

namespace {

using namespace wavechaos;

void BM_ProjectKernel(benchmark::State& state) {
  const simulate::BoxBasis basis{1.0, static_cast<int>(state.range(1))};
  for (auto _ : state)
    benchmark::DoNotOptimize(simulate::project_kernel(static_cast<int>(state.range(0)), 1.0, basis).entries.size());
}
BENCHMARK(BM_ProjectKernel)->Args({2, 64})->Args({3, 32})->Args({3, 64})->Unit(benchmark::kMillisecond);

void BM_SampleTruncated(benchmark::State& state) {
  simulate::SimConfig c;
  c.truncation = static_cast<int>(state.range(0));
  c.replicates = 10000;
  c.modes = 32;
  c.bootstrap_resamples = 2;
  for (auto _ : state) benchmark::DoNotOptimize(simulate::sample_uN(c).mean);
  state.SetItemsProcessed(state.iterations() * static_cast<long>(c.replicates));
}
BENCHMARK(BM_SampleTruncated)->DenseRange(1, 3)->Unit(benchmark::kMillisecond);

void BM_LogMittagLeffler(benchmark::State& state) {
  const double t = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(asymptotics::log_mittag_leffler(1.5, t));
}
BENCHMARK(BM_LogMittagLeffler)->Arg(10)->Arg(1000)->Arg(100000);

}  // namespace
