#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "wavechaos/variational.hpp"

namespace {

using namespace wavechaos::variational;

VariationalProblem problem(Interaction f, int d) {
  VariationalProblem p;
  p.f = std::move(f);
  p.d = d;
  return p;
}

template <class Obj>
std::vector<double> bump(const Obj& obj, int axes, int m) {
  std::vector<double> g(obj.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    std::size_t rest = i;
    double r2 = 0.0;
    for (int a = 0; a < axes; ++a) {
      const double x = obj.coordinate(static_cast<int>(rest % static_cast<std::size_t>(m)));
      rest /= static_cast<std::size_t>(m);
      r2 += x * x;
    }
    g[i] = std::exp(-r2 / 4.0);
  }
  return g;
}

// Objective and gradient on an m^d grid.
void BM_GridObjective(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0)), m = static_cast<int>(state.range(1));
  const bool delta = state.range(2) == 0;
  const auto f = delta ? Interaction::delta() : Interaction::noise(NoiseSpec::riesz(d, 0.5 * d));
  const GridObjective obj(problem(f, d), m, 10.0);
  const auto g = bump(obj, d, m);
  std::vector<double> grad(g.size());
  for (auto _ : state) benchmark::DoNotOptimize(obj.value(g, grad));
  state.SetComplexityN(static_cast<long>(g.size()));
}
BENCHMARK(BM_GridObjective)
    ->Args({1, 512, 0})
    ->Args({1, 512, 1})
    ->Args({2, 64, 0})
    ->Args({2, 64, 1})
    ->Args({3, 24, 0})
    ->Args({3, 24, 1});

void BM_SolveDelta1D(benchmark::State& state) {
  auto p = problem(Interaction::delta(), 1);
  p.grid = {16.0, static_cast<int>(state.range(0))};
  p.optimizer.restarts = 1;
  for (auto _ : state) benchmark::DoNotOptimize(solve_M(p).value);
}
BENCHMARK(BM_SolveDelta1D)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

}  // namespace
