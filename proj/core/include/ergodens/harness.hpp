#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ergodens/bandwidth.hpp"
#include "ergodens/estimator.hpp"
#include "ergodens/model.hpp"
#include "ergodens/simulate.hpp"

namespace ergodens {

enum class BandwidthPolicy { kRateOptimal, kFixed, kAdaptive };

/// Monte Carlo rate experiment: a geometric T ladder, replicated
/// stationary-start paths per T, and the pointwise (or L2(A)) squared error
/// of the estimator against the analytic density.
struct RateExperimentConfig {
  std::shared_ptr<const AnalyticModel> model;
  SmoothnessSpec beta;              // nominal smoothness for bandwidth policy
  std::vector<double> T_ladder;
  int replicates = 50;
  std::vector<double> point;        // evaluation point, used unless region set
  std::optional<EvalRegion> region; // L2(A) error instead of pointwise
  BandwidthPolicy policy = BandwidthPolicy::kRateOptimal;
  std::vector<double> fixed_h;      // for kFixed
  std::optional<CandidateGrid> grid;// for kAdaptive (built against each T)
  double penalty_k = 2.0;           // for kAdaptive
  int kernel_order = 3;
  double dt_factor = 0.1;           // dt = dt_factor * (min_l h_l)^2
  double max_dt = 0.05;
  std::uint64_t seed_base = 1;
  double burn_in = 0.0;             // 0 -> default_burn_in(T)
  int threads = 0;

  void validate() const;
};

struct MseRow {
  double T = 0.0;
  double mse = 0.0;
  double se = 0.0;  // Monte Carlo standard error of the MSE estimate
  int excluded = 0;
  int total = 0;
};

/// Per-T mean squared error with Monte Carlo standard errors. Divergent
/// replicates are excluded; more than 1% of them fails the run loudly.
std::vector<MseRow> mse_experiment(const RateExperimentConfig& config);

enum class RateModel { kPower, kLogPower };

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual_power = 0.0;
  double residual_logpower = 0.0;
  RateModel preferred_model = RateModel::kPower;
  double gamma = 0.0;
};

/// Free least-squares fit of log MSE against log T plus the two constrained
/// one-parameter fits MSE = c T^{-gamma} and MSE = c (log T / T)^{gamma} at
/// the hypothesized gamma; the preferred model minimizes the residual sum of
/// squares.
RateFit fit_rate(std::span<const MseRow> table, double gamma_hypothesis);

struct CovarianceRow {
  double s = 0.0;       // lag in time units
  double k = 0.0;       // mean empirical covariance across replicates
  double se = 0.0;      // standard error across replicates
  std::vector<double> per_replicate;
};

/// Empirical k(s) = Cov(K_h(x - X_t), K_h(x - X_{t+s})) by time averaging
/// over one long path per replicate. With shuffle=true the states of each
/// path are permuted first (white-noise surrogate).
std::vector<CovarianceRow> covariance_probe(const AnalyticModel& model,
                                            const SimConfig& sim,
                                            const Kernel1D& K,
                                            std::span<const double> h,
                                            std::span<const double> x,
                                            std::span<const double> lags,
                                            int replicates,
                                            bool shuffle = false);

struct OracleRow {
  std::uint64_t seed = 0;
  std::vector<double> h_tilde;
  double selected_bv = 0.0;  // B(h~) + V(h~)
  double best_bv = 0.0;      // min_h B(h) + V(h)
  double ratio = 0.0;
};

/// Per-seed oracle ratios (B(h~)+V(h~)) / min_h (B(h)+V(h)) with B from
/// bias_proxy on the analytic model.
std::vector<OracleRow> oracle_check(const AnalyticModel& model,
                                    const SimConfig& base_sim,
                                    const Kernel1D& K,
                                    const CandidateGrid& grid,
                                    const EvalRegion& region, double penalty_k,
                                    int n_seeds, int threads = 0);

}  // namespace ergodens
