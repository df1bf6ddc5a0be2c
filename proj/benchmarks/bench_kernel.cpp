#include <benchmark/benchmark.h>

#include <vector>

#include "ergodens/kernel.hpp"

using namespace ergodens;

static void BM_KernelEval(benchmark::State& state) {
  const Kernel1D K = make_order_kernel(static_cast<int>(state.range(0)));
  double x = -1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(K(x));
    x += 1e-4;
    if (x > 1.0) x = -1.0;
  }
}
BENCHMARK(BM_KernelEval)->Arg(1)->Arg(3)->Arg(7);

static void BM_ConvolutionTableBuild(benchmark::State& state) {
  const Kernel1D K = make_order_kernel(3);
  for (auto _ : state) {
    ConvolvedKernel1D conv(K, 0.3, 0.2);
    benchmark::DoNotOptimize(conv(0.1));
  }
}
BENCHMARK(BM_ConvolutionTableBuild);

static void BM_ProductKernelEval(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  ProductKernel PK(make_order_kernel(3), std::vector<double>(d, 0.3));
  const std::vector<double> x(d, 0.05);
  const std::vector<double> center(d, 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(eval_product(PK, x, center));
}
BENCHMARK(BM_ProductKernelEval)->Arg(2)->Arg(3)->Arg(5);
