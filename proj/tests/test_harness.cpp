#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "ergodens/errors.hpp"
#include "ergodens/harness.hpp"
#include "ergodens/philox.hpp"
#include "ergodens/quadrature.hpp"

using namespace ergodens;

namespace {

RateExperimentConfig small_ou_config() {
  RateExperimentConfig cfg;
  cfg.model = std::make_shared<GaussianProductModel>(2, 0.5);
  cfg.beta.beta = {2.0, 2.0};
  cfg.beta.L = {1.0, 1.0};
  cfg.T_ladder = {};
  cfg.replicates = 20;
  cfg.point = {0.0, 0.0};
  cfg.seed_base = 17;
  return cfg;
}

std::vector<MseRow> synthetic_table(const std::vector<double>& Ts,
                                    const std::function<double(double)>& f) {
  std::vector<MseRow> rows;
  for (double T : Ts) rows.push_back({T, f(T), 0.0, 0, 1});
  return rows;
}

}  // namespace

TEST_SUITE_BEGIN("harness");

TEST_CASE("empty ladder gives an empty table") {
  const auto table = mse_experiment(small_ou_config());
  CHECK(table.empty());
}

TEST_CASE("mse experiment is reproducible") {
  RateExperimentConfig cfg = small_ou_config();
  cfg.T_ladder = {100.0, 200.0};
  const auto a = mse_experiment(cfg);
  const auto b = mse_experiment(cfg);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].mse == b[i].mse);
    CHECK(a[i].se == b[i].se);
  }
}

TEST_CASE("MSE decreases along the ladder for most seed bases") {
  int improved = 0;
  const int bases = 20;
  for (int s = 0; s < bases; ++s) {
    RateExperimentConfig cfg = small_ou_config();
    cfg.T_ladder = {500.0, 1000.0};
    cfg.replicates = 50;
    cfg.seed_base = 1000 + s;
    const auto table = mse_experiment(cfg);
    if (table[1].mse < table[0].mse) ++improved;
  }
  CHECK(improved >= 19);  // >= 95%
}

TEST_CASE("doubling replicates halves the variance of the MSE estimate") {
  // The standard-error column is itself an estimate of sd(MSE_hat); with
  // twice the replicates its square should drop by half within Monte Carlo
  // slack, averaged over seed bases.
  double var_small = 0.0, var_large = 0.0;
  const int bases = 12;
  for (int s = 0; s < bases; ++s) {
    RateExperimentConfig cfg = small_ou_config();
    cfg.T_ladder = {300.0};
    cfg.policy = BandwidthPolicy::kFixed;
    cfg.fixed_h = {0.3, 0.3};
    cfg.seed_base = 5000 + s;
    cfg.replicates = 40;
    const double se_small = mse_experiment(cfg)[0].se;
    var_small += se_small * se_small;
    cfg.replicates = 80;
    const double se_large = mse_experiment(cfg)[0].se;
    var_large += se_large * se_large;
  }
  const double ratio = var_small / var_large;
  CHECK(ratio > 2.0 - 1.3);
  CHECK(ratio < 2.0 + 1.3);
}

TEST_CASE("fit_rate recovers noiseless synthetic laws") {
  const std::vector<double> Ts{1e3, 1e4, 1e5, 1e6};
  SUBCASE("pure power law") {
    const auto table =
        synthetic_table(Ts, [](double T) { return std::pow(T, -0.8); });
    const RateFit fit = fit_rate(table, 0.8);
    CHECK(fit.slope == doctest::Approx(-0.8).epsilon(1e-10));
    CHECK(fit.residual_power <= 1e-20);
    CHECK(fit.preferred_model == RateModel::kPower);
  }
  SUBCASE("log-power law") {
    const auto table = synthetic_table(
        Ts, [](double T) { return std::pow(std::log(T) / T, 0.8); });
    const RateFit fit = fit_rate(table, 0.8);
    CHECK(fit.residual_logpower <= 1e-20);
    CHECK(fit.preferred_model == RateModel::kLogPower);
  }
  SUBCASE("data validation") {
    auto table = synthetic_table(Ts, [](double T) { return std::pow(T, -1.0); });
    table[1].mse = 0.0;
    CHECK_THROWS_AS(fit_rate(table, 0.8), DataError);
    table.resize(3);
    CHECK_THROWS_AS(fit_rate(table, 0.8), DataError);
  }
}

TEST_CASE("covariance probe") {
  const GaussianProductModel ou(2, 0.5);
  SimConfig sim;
  sim.T = 400.0;
  sim.dt = 0.01;
  sim.burn_in = 10.0;
  sim.seed = 2;
  const Kernel1D K = make_order_kernel(3);
  const std::vector<double> h{0.5, 0.5};
  const std::vector<double> x{0.0, 0.0};

  SUBCASE("lag zero equals the direct variance") {
    const auto rows = covariance_probe(ou, sim, K, h, x,
                                       std::vector<double>{0.0}, 4);
    // Direct recomputation: replicate 0 path, variance of kernel values.
    SimConfig rep = sim;
    rep.seed = derive_seed(sim.seed, 0, 0);
    const PathGrid p = euler_maruyama(ou, rep);
    std::vector<double> y(p.n_steps());
    for (std::int64_t t = 0; t < p.n_steps(); ++t) {
      const auto s = p.state(t);
      y[t] = K((x[0] - s[0]) / h[0]) * K((x[1] - s[1]) / h[1]) /
             (h[0] * h[1]);
    }
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= y.size();
    double var = 0.0;
    for (double v : y) var += (v - mean) * (v - mean);
    var /= y.size();
    CHECK(rows[0].per_replicate[0] ==
          doctest::Approx(var).epsilon(1e-12));
    CHECK(rows[0].k >= 0.0);
  }

  SUBCASE("exponential decay: negative slope of log |k|") {
    // Short lags only; beyond s ~ 2 the covariance is noise-level.
    const std::vector<double> lags{0.1, 0.4, 0.8, 1.2, 1.6};
    const auto rows = covariance_probe(ou, sim, K, h, x, lags, 20);
    std::vector<double> s(lags.begin(), lags.end()), logk(lags.size());
    for (std::size_t i = 0; i < lags.size(); ++i) {
      REQUIRE(rows[i].k != 0.0);
      logk[i] = std::log(std::abs(rows[i].k));
    }
    const LineFit fit = fit_line(s, logk);
    CHECK(fit.slope < 0.0);
  }

  SUBCASE("shuffled paths are white") {
    const std::vector<double> lags{0.5, 1.0, 2.0};
    const auto rows =
        covariance_probe(ou, sim, K, h, x, lags, 20, /*shuffle=*/true);
    for (const auto& row : rows)
      CHECK(std::abs(row.k) <= 3.0 * row.se);
  }
}

TEST_CASE("oracle check on degenerate grids") {
  const GaussianProductModel ou(3, 0.5);
  SimConfig sim;
  sim.T = 150.0;
  sim.dt = 0.005;
  sim.burn_in = 10.0;
  sim.seed = 77;
  const Kernel1D K = make_order_kernel(3);
  EvalRegion region = EvalRegion::centered_box(3, 0.5, 0.25 / 4.0);

  SUBCASE("single member: ratio is exactly one") {
    const CandidateGrid grid =
        candidate_grid_from_ladder(sim.T, 3, std::vector<long>{4});
    const auto rows = oracle_check(ou, sim, K, grid, region, 2.0, 3);
    for (const auto& row : rows) {
      CHECK(row.ratio == 1.0);
      CHECK(row.h_tilde == grid.members[0]);
    }
  }
}

TEST_SUITE_END();
