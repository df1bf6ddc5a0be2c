#include <benchmark/benchmark.h>

#include <vector>

#include "ergodens/estimator.hpp"
#include "ergodens/kernel.hpp"
#include "ergodens/model.hpp"
#include "ergodens/simulate.hpp"

using namespace ergodens;

namespace {

PathGrid bench_path(int d, double T) {
  const GaussianProductModel ou(d, 0.5);
  SimConfig cfg;
  cfg.T = T;
  cfg.dt = 0.005;
  cfg.burn_in = 5.0;
  cfg.seed = 17;
  return euler_maruyama(ou, cfg);
}

}  // namespace

static void BM_KdePointwise(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const PathGrid p = bench_path(d, 100.0);
  const Kernel1D K = make_order_kernel(3);
  const std::vector<double> h(d, 0.25);
  const std::vector<double> x(d, 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(kde_pointwise(p, K, h, x));
  state.SetItemsProcessed(state.iterations() * p.n_steps());
}
BENCHMARK(BM_KdePointwise)->Arg(2)->Arg(3);

static void BM_GridEstimate(benchmark::State& state) {
  const int d = 3;
  const PathGrid p = bench_path(d, 200.0);
  const Kernel1D K = make_order_kernel(3);
  const std::vector<double> h(d, 0.25);
  const EvalRegion region = EvalRegion::centered_box(d, 0.75, 0.0625);
  const GridEstimator engine(p, region, std::vector<double>(d, 0.5));
  for (auto _ : state) {
    const auto grid = engine.density(K, h);
    benchmark::DoNotOptimize(grid.data());
  }
  state.SetItemsProcessed(state.iterations() * region.total_nodes());
}
BENCHMARK(BM_GridEstimate);

static void BM_GridEstimateConvolved(benchmark::State& state) {
  const int d = 3;
  const PathGrid p = bench_path(d, 200.0);
  const Kernel1D K = make_order_kernel(3);
  const std::vector<double> h(d, 0.25);
  const std::vector<double> eta(d, 0.5);
  const EvalRegion region = EvalRegion::centered_box(d, 0.75, 0.0625);
  const GridEstimator engine(p, region, std::vector<double>(d, 1.0));
  for (auto _ : state) {
    const auto grid = engine.density_convolved(K, h, eta);
    benchmark::DoNotOptimize(grid.data());
  }
  state.SetItemsProcessed(state.iterations() * region.total_nodes());
}
BENCHMARK(BM_GridEstimateConvolved);
