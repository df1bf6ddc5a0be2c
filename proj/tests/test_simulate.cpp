#include <doctest.h>

#include <cmath>
#include <memory>
#include <sstream>
#include <vector>

#include "ergodens/errors.hpp"
#include "ergodens/model.hpp"
#include "ergodens/philox.hpp"
#include "ergodens/simulate.hpp"

using namespace ergodens;

namespace {

LambdaModel brownian(int d) {
  return LambdaModel(
      d, "brownian", [](std::span<const double>) { return 1.0; }, nullptr,
      nullptr,
      [](std::span<const double>, std::span<double> out) {
        for (auto& v : out) v = 0.0;
      });
}

}  // namespace

TEST_SUITE_BEGIN("simulate");

TEST_CASE("config validation") {
  SimConfig cfg;
  cfg.T = 1.0;
  cfg.dt = 0.5;  // dt > T/100
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.dt = 0.01;
  cfg.burn_in = 0.015;  // not a multiple of dt
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.burn_in = 0.02;
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("determinism: same seed, same path") {
  const GaussianProductModel ou(2, 0.5);
  SimConfig cfg;
  cfg.T = 10.0;
  cfg.dt = 0.01;
  cfg.burn_in = 1.0;
  cfg.seed = 42;
  const PathGrid a = euler_maruyama(ou, cfg);
  const PathGrid b = euler_maruyama(ou, cfg);
  REQUIRE(a.states.size() == b.states.size());
  for (std::size_t i = 0; i < a.states.size(); ++i)
    CHECK(a.states[i] == b.states[i]);
}

TEST_CASE("brownian motion variance at t=1") {
  const LambdaModel bm = brownian(1);
  SimConfig cfg;
  cfg.T = 1.0;
  cfg.dt = 0.01;
  double sum = 0.0, sum2 = 0.0;
  const int reps = 10000;
  for (int r = 0; r < reps; ++r) {
    cfg.seed = 1000 + r;
    const PathGrid p = euler_maruyama(bm, cfg);
    const double x = p.states.back();
    sum += x;
    sum2 += x * x;
  }
  const double var = sum2 / reps - (sum / reps) * (sum / reps);
  CHECK(var == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("OU long-run variance is 1/2") {
  const GaussianProductModel ou(1, 0.5);
  SimConfig cfg;
  cfg.T = 500.0;
  cfg.dt = 0.01;
  cfg.burn_in = 10.0;
  cfg.seed = 7;
  const PathGrid p = euler_maruyama(ou, cfg);
  double sum = 0.0, sum2 = 0.0;
  for (std::int64_t k = 0; k < p.n_steps(); ++k) {
    sum += p.states[k];
    sum2 += p.states[k] * p.states[k];
  }
  const double n = static_cast<double>(p.n_steps());
  const double var = sum2 / n - (sum / n) * (sum / n);
  CHECK(var == doctest::Approx(0.5).epsilon(0.06));
}

TEST_CASE("weak-order check: OU second moment at dt and dt/2") {
  const GaussianProductModel ou(1, 0.5);
  const int reps = 10000;
  auto second_moment = [&](double dt, double& se) {
    SimConfig cfg;
    cfg.T = 1.0;
    cfg.dt = dt;
    double sum = 0.0, sum2 = 0.0;
    for (int r = 0; r < reps; ++r) {
      cfg.seed = 900000 + r;
      const PathGrid p = euler_maruyama(ou, cfg);
      const double v = p.states.back() * p.states.back();
      sum += v;
      sum2 += v * v;
    }
    const double mean = sum / reps;
    se = std::sqrt((sum2 / reps - mean * mean) / reps);
    return mean;
  };
  double se1 = 0.0, se2 = 0.0;
  const double m1 = second_moment(0.01, se1);
  const double m2 = second_moment(0.005, se2);
  CHECK(std::abs(m1 - m2) <= 3.0 * std::sqrt(se1 * se1 + se2 * se2));
}

TEST_CASE("distinct seeds are uncorrelated") {
  const GaussianProductModel ou(1, 0.5);
  SimConfig cfg;
  cfg.T = 1000.0;
  cfg.dt = 0.01;
  cfg.burn_in = 5.0;
  std::vector<PathGrid> paths;
  for (int s = 0; s <= 100; ++s) {
    cfg.seed = 5000 + s;
    paths.push_back(euler_maruyama(ou, cfg));
  }
  double mean_abs_rho = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto& a = paths[i].states;
    const auto& b = paths[i + 1].states;
    double ma = 0.0, mb = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      ma += a[k];
      mb += b[k];
    }
    ma /= a.size();
    mb /= b.size();
    double cab = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      cab += (a[k] - ma) * (b[k] - mb);
      va += (a[k] - ma) * (a[k] - ma);
      vb += (b[k] - mb) * (b[k] - mb);
    }
    mean_abs_rho += std::abs(cab / std::sqrt(va * vb));
  }
  mean_abs_rho /= 100.0;
  CHECK(mean_abs_rho <= 0.05);
}

TEST_CASE("stationary start") {
  const GaussianProductModel ou(2, 0.5);
  SUBCASE("zero burn-in returns the mode") {
    SimConfig cfg;
    cfg.T = 10.0;
    cfg.dt = 0.01;
    cfg.burn_in = 0.0;
    const auto x = stationary_start(ou, cfg);
    CHECK(x == std::vector<double>{0.0, 0.0});
  }
  SUBCASE("burn-in of 20 forgets the start") {
    SimConfig cfg;
    cfg.T = 25.0;
    cfg.dt = 0.01;
    cfg.burn_in = 20.0;
    double mean0 = 0.0, mean1 = 0.0;
    const int reps = 2000;
    for (int r = 0; r < reps; ++r) {
      cfg.seed = 300000 + r;
      const auto x = stationary_start(ou, cfg);
      mean0 += x[0];
      mean1 += x[1];
    }
    CHECK(std::abs(mean0 / reps) <= 0.05);
    CHECK(std::abs(mean1 / reps) <= 0.05);
  }
}

TEST_CASE("divergence raises with a step index") {
  // Cubic outward drift explodes from the noise alone.
  const LambdaModel unstable(
      1, "cubic", [](std::span<const double>) { return 1.0; }, nullptr,
      nullptr,
      [](std::span<const double> x, std::span<double> out) {
        out[0] = x[0] * x[0] * x[0];
      });
  SimConfig cfg;
  cfg.T = 50.0;
  cfg.dt = 0.02;
  cfg.seed = 3;
  bool thrown = false;
  try {
    euler_maruyama(unstable, cfg);
  } catch (const DivergenceError& e) {
    thrown = true;
    CHECK(e.step() >= 0);
  }
  CHECK(thrown);
}

TEST_CASE("default burn-in rule") {
  CoefficientClassParams params;
  params.C_tilde = 0.5;
  CHECK(default_burn_in(1000.0, &params) == doctest::Approx(40.0));
  CHECK(default_burn_in(1000.0) == doctest::Approx(100.0));
}

TEST_CASE("path dump round-trips") {
  const GaussianProductModel ou(3, 0.5);
  SimConfig cfg;
  cfg.T = 5.0;
  cfg.dt = 0.01;
  cfg.seed = 11;
  const PathGrid p = euler_maruyama(ou, cfg);
  std::stringstream buf;
  dump_path(p, buf);
  CHECK(buf.str().size() == 32 + p.states.size() * 8);
  const PathGrid q = load_path(buf);
  CHECK(q.dt == p.dt);
  CHECK(q.d == p.d);
  CHECK(q.states == p.states);
}

TEST_SUITE_END();
