#include <doctest.h>

#include <cmath>
#include <vector>

#include "ergodens/errors.hpp"
#include "ergodens/estimator.hpp"
#include "ergodens/kernel.hpp"
#include "ergodens/model.hpp"
#include "ergodens/philox.hpp"
#include "ergodens/quadrature.hpp"
#include "ergodens/simulate.hpp"

using namespace ergodens;

namespace {

PathGrid constant_path(std::span<const double> x, std::int64_t n, double dt) {
  PathGrid p;
  p.dt = dt;
  p.d = static_cast<int>(x.size());
  p.states.reserve(n * x.size());
  for (std::int64_t k = 0; k < n; ++k)
    p.states.insert(p.states.end(), x.begin(), x.end());
  return p;
}

PathGrid random_path(int d, std::int64_t n, double scale, std::uint64_t seed) {
  const Philox4x32 rng(seed);
  PathGrid p;
  p.dt = 0.01;
  p.d = d;
  p.states.resize(n * d);
  for (std::int64_t k = 0; k < n; ++k)
    for (int j = 0; j < d; ++j)
      p.states[k * d + j] =
          scale * (2.0 * rng.uniform(k, static_cast<std::uint32_t>(j), 9) - 1.0);
  return p;
}

// No-early-out brute-force summation in extended precision.
long double kde_brute_force(const PathGrid& path, const Kernel1D& K,
                            std::span<const double> h,
                            std::span<const double> x) {
  long double acc = 0.0L;
  const std::int64_t n = path.n_steps();
  for (std::int64_t k = 0; k < n; ++k) {
    long double prod = 1.0L;
    for (int j = 0; j < path.d; ++j) {
      const double u = (x[j] - path.states[k * path.d + j]) / h[j];
      prod *= static_cast<long double>(K(u)) / h[j];
    }
    acc += prod;
  }
  return acc / static_cast<long double>(n);
}

}  // namespace

TEST_SUITE_BEGIN("estimator");

TEST_CASE("kde on a constant path") {
  const Kernel1D uniform = make_order_kernel(1);
  const std::vector<double> x{0.4, -0.2};
  const PathGrid p = constant_path(x, 500, 0.01);
  const std::vector<double> h{0.5, 0.5};
  CHECK(kde_pointwise(p, uniform, h, x) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("kde vanishes outside the occupied region") {
  const Kernel1D K = make_order_kernel(3);
  const PathGrid p = constant_path(std::vector<double>{5.0, 5.0}, 200, 0.01);
  CHECK(kde_pointwise(p, K, std::vector<double>{0.3, 0.3},
                      std::vector<double>{0.0, 0.0}) == 0.0);
}

TEST_CASE("kde matches brute force to 1e-12 relative") {
  const Kernel1D K = make_order_kernel(3);
  const PathGrid p = random_path(3, 1000, 0.8, 77);
  const std::vector<double> h{0.3, 0.25, 0.2};
  const std::vector<double> x{0.1, -0.05, 0.0};
  const double fast = kde_pointwise(p, K, h, x);
  const long double brute = kde_brute_force(p, K, h, x);
  REQUIRE(brute != 0.0L);
  CHECK(std::abs(static_cast<double>((fast - brute) / brute)) <= 1e-12);
}

TEST_CASE("convolved kde: swap symmetry and center value") {
  const Kernel1D K = make_order_kernel(3);
  const PathGrid p = random_path(2, 400, 0.5, 11);
  const std::vector<double> h{0.4, 0.3};
  const std::vector<double> eta{0.2, 0.35};
  const std::vector<double> x{0.05, -0.1};
  CHECK(kde_convolved(p, K, h, eta, x) == kde_convolved(p, K, eta, h, x));

  const std::vector<double> c{0.2, 0.1};
  const PathGrid cp = constant_path(c, 100, 0.01);
  std::vector<ConvolvedKernel1D> axes;
  axes.emplace_back(K, h[0], eta[0]);
  axes.emplace_back(K, h[1], eta[1]);
  CHECK(kde_convolved(cp, K, h, eta, c) ==
        doctest::Approx(axes[0](0.0) * axes[1](0.0)).epsilon(1e-14));
}

TEST_CASE("convolved kde against the direct double integral") {
  // Same object two ways: tabulated per-axis convolution versus adaptive
  // quadrature of the defining integral, on a tiny path.
  const Kernel1D K = make_order_kernel(3);
  const PathGrid p = random_path(2, 5, 0.3, 5);
  const std::vector<double> h{0.35, 0.3};
  const std::vector<double> eta{0.2, 0.25};
  const std::vector<double> x{0.02, -0.03};
  double direct = 0.0;
  for (std::int64_t k = 0; k < p.n_steps(); ++k) {
    double prod = 1.0;
    for (int j = 0; j < 2; ++j) {
      const double t = p.states[k * 2 + j] - x[j];
      prod *= adaptive_quadrature(
          [&](double u) {
            return K(u / h[j]) * K((t - u) / eta[j]) / (h[j] * eta[j]);
          },
          std::max(-h[j], t - eta[j]), std::min(h[j], t + eta[j]), 1e-12);
    }
    direct += prod;
  }
  direct /= static_cast<double>(p.n_steps());
  const double tabulated = kde_convolved(p, K, h, eta, x);
  const double scale = 1.0 / (h[0] * h[1]);
  CHECK(std::abs(tabulated - direct) <= 2e-3 * scale);
}

TEST_CASE("convolved kde approaches the plain kde as eta shrinks") {
  const GaussianProductModel ou(2, 0.5);
  SimConfig cfg;
  cfg.T = 200.0;
  cfg.dt = 0.005;
  cfg.burn_in = 5.0;
  cfg.seed = 21;
  const PathGrid p = euler_maruyama(ou, cfg);
  const Kernel1D K = make_order_kernel(3);
  const std::vector<double> h{0.3, 0.3};
  const std::vector<double> eta{1e-3, 1e-3};
  const std::vector<double> x{0.0, 0.0};
  const double plain = kde_pointwise(p, K, h, x);
  const double conv = kde_convolved(p, K, h, eta, x);
  CHECK(conv == doctest::Approx(plain).epsilon(0.05));
}

TEST_CASE("L2 norm on region") {
  SUBCASE("constant function") {
    EvalRegion r;
    r.lo = {0.0, 0.0};
    r.hi = {1.0, 1.0};
    r.nodes = {33, 33};
    CHECK(l2_norm_sq_on_region([](std::span<const double>) { return 1.0; },
                               r) == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("linear function against the analytic integral") {
    EvalRegion r;
    r.lo = {0.0, 0.0};
    r.hi = {1.0, 1.0};
    r.nodes = {601, 601};
    CHECK(l2_norm_sq_on_region(
              [](std::span<const double> x) { return x[0]; }, r) ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-6));
  }
  SUBCASE("grid refinement oracle on an estimator difference") {
    const GaussianProductModel ou(2, 0.5);
    SimConfig cfg;
    cfg.T = 50.0;
    cfg.dt = 0.01;
    cfg.burn_in = 2.0;
    cfg.seed = 4;
    const PathGrid p = euler_maruyama(ou, cfg);
    const Kernel1D K = make_order_kernel(3);
    auto f = [&](std::span<const double> x) {
      return kde_pointwise(p, K, std::vector<double>{0.4, 0.4}, x) -
             kde_pointwise(p, K, std::vector<double>{0.45, 0.45}, x);
    };
    EvalRegion coarse;
    coarse.lo = {-0.5, -0.5};
    coarse.hi = {0.5, 0.5};
    coarse.nodes = {11, 11};
    EvalRegion fine = coarse;
    fine.nodes = {101, 101};
    const double a = l2_norm_sq_on_region(f, coarse);
    const double b = l2_norm_sq_on_region(f, fine);
    CHECK(a == doctest::Approx(b).epsilon(1e-3));
  }
}

TEST_CASE("enlarged region carries the 2 sqrt(d) margin") {
  EvalRegion r;
  r.lo = {-1.0, -1.0};
  r.hi = {1.0, 1.0};
  r.nodes = {41, 41};
  const EvalRegion big = r.enlarged();
  const double margin = 2.0 * std::sqrt(2.0);
  for (int j = 0; j < 2; ++j) {
    CHECK(big.lo[j] <= r.lo[j] - margin);
    CHECK(big.hi[j] >= r.hi[j] + margin);
    CHECK(big.spacing(j) == doctest::Approx(r.spacing(j)).epsilon(1e-14));
  }
}

TEST_CASE("region resolution guard") {
  EvalRegion r;
  r.lo = {-1.0};
  r.hi = {1.0};
  r.nodes = {11};  // spacing 0.2
  CHECK_THROWS_AS(r.require_resolves(std::vector<double>{0.5}), ConfigError);
  CHECK_NOTHROW(r.require_resolves(std::vector<double>{0.8}));
}

TEST_CASE("grid estimator agrees with per-point evaluation") {
  const GaussianProductModel ou(2, 0.5);
  SimConfig cfg;
  cfg.T = 100.0;
  cfg.dt = 0.01;
  cfg.burn_in = 5.0;
  cfg.seed = 31;
  const PathGrid p = euler_maruyama(ou, cfg);
  const Kernel1D K = make_order_kernel(3);
  const std::vector<double> h{0.32, 0.32};
  EvalRegion r;
  r.lo = {-0.64, -0.64};
  r.hi = {0.64, 0.64};
  r.nodes = {17, 17};  // spacing 0.08 = h/4
  auto sup_deviation = [&](const EvalRegion& region) {
    GridEstimator engine(p, region, h);
    const auto grid = engine.density(K, h);
    double max_exact = 0.0, max_diff = 0.0;
    std::vector<double> x(2);
    std::int64_t flat = 0;
    for (int i = 0; i < region.nodes[0]; ++i)
      for (int j = 0; j < region.nodes[1]; ++j, ++flat) {
        x[0] = region.node_coord(0, i);
        x[1] = region.node_coord(1, j);
        const double exact = kde_pointwise(p, K, h, x);
        max_exact = std::max(max_exact, std::abs(exact));
        max_diff = std::max(max_diff, std::abs(exact - grid[flat]));
      }
    return max_diff / max_exact;
  };
  // Linear binning at the coarsest admissible spacing (h/4) stays within a
  // few percent of the exact estimate in sup norm. Refinement improves it
  // only slowly: the polynomial kernel jumps at its support edge and the
  // cell-averaged taps smear that jump over one cell.
  const double coarse = sup_deviation(r);
  EvalRegion fine = r;
  fine.nodes = {33, 33};  // spacing h/8
  const double refined = sup_deviation(fine);
  CHECK(coarse <= 0.05);
  CHECK(refined <= coarse);
}

TEST_CASE("estimate mass is close to one on a long OU path") {
  const GaussianProductModel ou(2, 0.5);
  SimConfig cfg;
  cfg.T = 2000.0;
  cfg.dt = 0.005;
  cfg.burn_in = 20.0;
  cfg.seed = 9;
  const PathGrid p = euler_maruyama(ou, cfg);
  const Kernel1D K = make_order_kernel(3);
  const std::vector<double> h{0.25, 0.25};
  EvalRegion r;
  r.lo = {-3.5, -3.5};
  r.hi = {3.5, 3.5};
  r.nodes = {113, 113};  // spacing 0.0625 = h/4
  GridEstimator engine(p, r, h);
  const auto grid = engine.density(K, h);
  double mass = 0.0;
  for (std::int64_t i = 0; i < r.total_nodes(); ++i)
    mass += r.quad_weight(i) * grid[i];
  CHECK(mass == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("Riemann sum refines monotonically on a frozen driver") {
  // Coupled OU paths driven by the same Brownian increments at three step
  // sizes; the kde at a fixed point changes less under each halving.
  const Philox4x32 rng(123);
  const double T = 50.0;
  const double dt_fine = 0.0025;
  const auto n_fine = static_cast<std::int64_t>(std::llround(T / dt_fine));
  std::vector<double> dw(n_fine);
  const double sq = std::sqrt(dt_fine);
  for (std::int64_t k = 0; k < n_fine; ++k)
    dw[k] = sq * rng.normal_pair(k, 0, 0)[0];

  auto euler_at = [&](int stride) {
    const double dt = dt_fine * stride;
    PathGrid p;
    p.dt = dt;
    p.d = 1;
    double x = 0.0;
    for (std::int64_t k = 0; k + stride <= n_fine; k += stride) {
      double inc = 0.0;
      for (int s = 0; s < stride; ++s) inc += dw[k + s];
      x += -x * dt + inc;
      p.states.push_back(x);
    }
    return p;
  };

  const Kernel1D K = make_order_kernel(3);
  const std::vector<double> h{0.3};
  const std::vector<double> x{0.1};
  double avg1 = 0.0, avg2 = 0.0;
  const PathGrid p4 = euler_at(4), p2 = euler_at(2), p1 = euler_at(1);
  avg1 = std::abs(kde_pointwise(p4, K, h, x) - kde_pointwise(p2, K, h, x));
  avg2 = std::abs(kde_pointwise(p2, K, h, x) - kde_pointwise(p1, K, h, x));
  CHECK(avg2 <= avg1 + 1e-12);
}

TEST_CASE("bias proxy") {
  const GaussianProductModel ou(2, 0.5);
  const Kernel1D K = make_order_kernel(3);
  EvalRegion r;
  r.lo = {-1.0, -1.0};
  r.hi = {1.0, 1.0};
  r.nodes = {41, 41};

  SUBCASE("vanishes as h -> 0 and decreases under halving") {
    const double b_small =
        bias_proxy(ou, K, std::vector<double>{1e-3, 1e-3}, r);
    CHECK(b_small <= 1e-6);
    const double b1 = bias_proxy(ou, K, std::vector<double>{0.2, 0.2}, r);
    const double b2 = bias_proxy(ou, K, std::vector<double>{0.1, 0.1}, r);
    CHECK(b2 < b1);
  }
  SUBCASE("order-3 kernel reproduces a quadratic patch") {
    const LambdaModel quad(2, "quadratic-patch",
                           [](std::span<const double> x) {
                             return 0.5 + 0.1 * x[0] - 0.05 * x[1] +
                                    0.04 * x[0] * x[0] +
                                    0.03 * x[0] * x[1];
                           });
    EvalRegion small;
    small.lo = {-0.5, -0.5};
    small.hi = {0.5, 0.5};
    small.nodes = {21, 21};
    const double b = bias_proxy(quad, K, std::vector<double>{0.1, 0.1}, small);
    CHECK(b <= 1e-12);
  }
  SUBCASE("doubling h scales the bias by about 2^8") {
    const double b1 = bias_proxy(ou, K, std::vector<double>{0.1, 0.1}, r);
    const double b2 = bias_proxy(ou, K, std::vector<double>{0.2, 0.2}, r);
    CHECK(b2 / b1 == doctest::Approx(256.0).epsilon(0.2));
  }
  SUBCASE("separable route equals the generic route") {
    EvalRegion small;
    small.lo = {-0.5, -0.5};
    small.hi = {0.5, 0.5};
    small.nodes = {15, 15};
    const std::vector<double> h{0.25, 0.2};
    const double fast = bias_proxy(ou, K, h, small);
    const LambdaModel generic(2, "ou-generic",
                              [&](std::span<const double> x) {
                                return ou.density(x);
                              });
    const double slow = bias_proxy(generic, K, h, small);
    CHECK(fast == doctest::Approx(slow).epsilon(1e-9));
  }
}

TEST_SUITE_END();
