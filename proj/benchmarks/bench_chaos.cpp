#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "wavechaos/chain.hpp"
#include "wavechaos/chaos.hpp"

namespace {

using namespace wavechaos;

void BM_CosineSum(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const chaos::SubsetChains chains(n);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z;
  std::vector<double> xi(static_cast<std::size_t>(n)), x;
  for (double& v : xi) v = 3.0 * z(rng);
  chaos::subset_square_norms(xi, n, 1, x);
  chaos::PrecisionStats stats;
  for (auto _ : state) benchmark::DoNotOptimize(chains.cosine_sum(x, 1.0, stats));
  state.counters["extended_share"] =
      stats.evaluations ? static_cast<double>(stats.extended + stats.quad) / static_cast<double>(stats.evaluations)
                        : 0.0;
}
BENCHMARK(BM_CosineSum)->DenseRange(2, 10, 2);

void BM_ChaosNormMonteCarlo(benchmark::State& state) {
  chaos::SamplingOptions o;
  o.samples = 2000;
  const auto spec = kernels::NoiseSpec::white(static_cast<int>(state.range(1)));
  for (auto _ : state)
    benchmark::DoNotOptimize(
        chaos::chaos_norm(spec, static_cast<int>(state.range(0)), 1.0, chaos::Method::fourier_mc, o).value);
  state.SetItemsProcessed(state.iterations() * static_cast<long>(o.samples));
}
BENCHMARK(BM_ChaosNormMonteCarlo)->Args({2, 1})->Args({4, 1})->Args({4, 3})->Unit(benchmark::kMillisecond);

void BM_RealspaceQuadrature(benchmark::State& state) {
  const auto spec = kernels::NoiseSpec::white(1);
  for (auto _ : state)
    benchmark::DoNotOptimize(chaos::chaos_norm(spec, 2, 1.0, chaos::Method::realspace_quadrature).value);
}
BENCHMARK(BM_RealspaceQuadrature)->Unit(benchmark::kMillisecond);

}  // namespace
