#include <benchmark/benchmark.h>

#include "ergodens/model.hpp"
#include "ergodens/simulate.hpp"

using namespace ergodens;

static void BM_EulerMaruyama(benchmark::State& state) {
  const GaussianProductModel ou(static_cast<int>(state.range(0)), 0.5);
  SimConfig cfg;
  cfg.T = 100.0;
  cfg.dt = 0.01;
  cfg.burn_in = 1.0;
  cfg.seed = 1;
  for (auto _ : state) {
    const PathGrid p = euler_maruyama(ou, cfg);
    benchmark::DoNotOptimize(p.states.data());
  }
  state.SetItemsProcessed(state.iterations() * cfg.n_steps());
}
BENCHMARK(BM_EulerMaruyama)->Arg(1)->Arg(2)->Arg(3);
