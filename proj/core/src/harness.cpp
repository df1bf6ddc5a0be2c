#include "ergodens/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>

#include "ergodens/errors.hpp"
#include "ergodens/parallel.hpp"
#include "ergodens/philox.hpp"
#include "ergodens/quadrature.hpp"

namespace ergodens {

void RateExperimentConfig::validate() const {
  if (!model) throw ConfigError("rate experiment needs a model");
  for (std::size_t i = 1; i < T_ladder.size(); ++i)
    if (!(T_ladder[i] > T_ladder[i - 1]))
      throw ConfigError("T ladder must be strictly increasing");
  if (replicates < 20) throw ConfigError("need at least 20 replicates");
  if (!region && static_cast<int>(point.size()) != model->dim())
    throw ConfigError("evaluation point dimension mismatch");
  if (policy == BandwidthPolicy::kFixed &&
      static_cast<int>(fixed_h.size()) != model->dim())
    throw ConfigError("fixed bandwidth dimension mismatch");
  if (policy == BandwidthPolicy::kAdaptive && (!grid || !region))
    throw ConfigError("adaptive policy needs a candidate grid and a region");
  if (!(dt_factor > 0.0 && dt_factor <= 1.0))
    throw ConfigError("dt factor must lie in (0,1]");
}

namespace {

std::vector<double> policy_bandwidth(const RateExperimentConfig& cfg,
                                     double T) {
  switch (cfg.policy) {
    case BandwidthPolicy::kFixed:
      return cfg.fixed_h;
    case BandwidthPolicy::kRateOptimal:
    case BandwidthPolicy::kAdaptive:
      return rate_optimal_bandwidth(cfg.beta.beta, T, cfg.model->dim());
  }
  throw ConfigError("unknown bandwidth policy");
}

}  // namespace

std::vector<MseRow> mse_experiment(const RateExperimentConfig& cfg) {
  cfg.validate();
  const Kernel1D K = make_order_kernel(cfg.kernel_order);
  std::vector<MseRow> table;
  table.reserve(cfg.T_ladder.size());

  for (std::size_t ti = 0; ti < cfg.T_ladder.size(); ++ti) {
    const double T = cfg.T_ladder[ti];
    const std::vector<double> h = policy_bandwidth(cfg, T);
    const double min_h = *std::min_element(h.begin(), h.end());
    SimConfig sim;
    sim.T = T;
    sim.dt = std::min(cfg.max_dt, cfg.dt_factor * min_h * min_h);
    sim.burn_in = cfg.burn_in > 0.0 ? cfg.burn_in : default_burn_in(T);
    sim.burn_in = std::round(sim.burn_in / sim.dt) * sim.dt;

    std::vector<double> sq_err(cfg.replicates);
    std::vector<char> diverged(cfg.replicates, 0);
    parallel_for(
        cfg.replicates,
        [&](std::int64_t rb, std::int64_t re) {
          for (std::int64_t r = rb; r < re; ++r) {
            SimConfig rep = sim;
            rep.seed = derive_seed(cfg.seed_base, ti, r);
            try {
              const PathGrid path = euler_maruyama(*cfg.model, rep);
              double err2 = 0.0;
              std::vector<double> use_h = h;
              if (cfg.policy == BandwidthPolicy::kAdaptive) {
                AdaptiveSelector sel(path, K, *cfg.grid, *cfg.region,
                                     cfg.penalty_k, 1);
                use_h = sel.select().h_tilde;
              }
              if (cfg.region) {
                GridEstimator engine(path, *cfg.region, use_h, 1);
                const std::vector<double> est = engine.density(K, use_h);
                std::vector<double> truth(est.size());
                std::vector<int> idx(cfg.region->dim(), 0);
                std::vector<double> x(cfg.region->dim());
                for (std::int64_t flat = 0; flat < cfg.region->total_nodes();
                     ++flat) {
                  for (int j = 0; j < cfg.region->dim(); ++j)
                    x[j] = cfg.region->node_coord(j, idx[j]);
                  truth[flat] = cfg.model->density(x);
                  for (int j = cfg.region->dim() - 1; j >= 0; --j) {
                    if (++idx[j] < cfg.region->nodes[j]) break;
                    idx[j] = 0;
                  }
                }
                err2 = l2_distance_sq_on_region(est, truth, *cfg.region);
              } else {
                const double est = kde_pointwise(path, K, use_h, cfg.point);
                const double truth = cfg.model->density(cfg.point);
                err2 = (est - truth) * (est - truth);
              }
              sq_err[r] = err2;
            } catch (const DivergenceError&) {
              diverged[r] = 1;
            }
          }
        },
        cfg.threads);

    MseRow row;
    row.T = T;
    row.total = cfg.replicates;
    std::vector<double> kept;
    kept.reserve(cfg.replicates);
    for (int r = 0; r < cfg.replicates; ++r) {
      if (diverged[r])
        ++row.excluded;
      else
        kept.push_back(sq_err[r]);
    }
    if (row.excluded > 0.01 * cfg.replicates)
      throw DivergenceError("more than 1% of replicates diverged at T = " +
                                std::to_string(T),
                            row.excluded);
    const double n = static_cast<double>(kept.size());
    double mean = 0.0;
    for (double v : kept) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : kept) var += (v - mean) * (v - mean);
    var = kept.size() > 1 ? var / (n - 1.0) : 0.0;
    row.mse = mean;
    row.se = std::sqrt(var / n);
    table.push_back(row);
  }
  return table;
}

RateFit fit_rate(std::span<const MseRow> table, double gamma_hypothesis) {
  if (table.size() < 4) throw DataError("fit_rate needs at least 4 ladder points");
  std::vector<double> x(table.size()), y(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (!(table[i].mse > 0.0))
      throw DataError("fit_rate: MSE entries must be positive");
    x[i] = std::log(table[i].T);
    y[i] = std::log(table[i].mse);
  }
  RateFit fit;
  fit.gamma = gamma_hypothesis;
  const LineFit free = fit_line(x, y);
  fit.slope = free.slope;
  fit.intercept = free.intercept;

  std::vector<double> power_part(table.size()), logpower_part(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    power_part[i] = -gamma_hypothesis * x[i];
    logpower_part[i] = gamma_hypothesis * (std::log(x[i]) - x[i]);
  }
  fit.residual_power = fit_intercept(power_part, y).rss;
  fit.residual_logpower = fit_intercept(logpower_part, y).rss;
  fit.preferred_model = fit.residual_power <= fit.residual_logpower
                            ? RateModel::kPower
                            : RateModel::kLogPower;
  return fit;
}

std::vector<CovarianceRow> covariance_probe(
    const AnalyticModel& model, const SimConfig& sim, const Kernel1D& K,
    std::span<const double> h, std::span<const double> x,
    std::span<const double> lags, int replicates, bool shuffle) {
  if (replicates < 2) throw ConfigError("covariance probe needs >= 2 replicates");
  const int d = model.dim();
  if (static_cast<int>(h.size()) != d || static_cast<int>(x.size()) != d)
    throw ConfigError("covariance probe: dimension mismatch");
  for (double s : lags) {
    if (s < 0.0) throw ConfigError("lags must be nonnegative");
    if (s > sim.T / 10.0) throw ConfigError("lags must not exceed T/10");
  }

  std::vector<std::vector<double>> per_rep(lags.size(),
                                           std::vector<double>(replicates));
  parallel_for(
      replicates,
      [&](std::int64_t rb, std::int64_t re) {
        std::vector<double> y;
        for (std::int64_t r = rb; r < re; ++r) {
          SimConfig rep = sim;
          rep.seed = derive_seed(sim.seed, 0, r);
          const PathGrid path = euler_maruyama(model, rep);
          const std::int64_t n = path.n_steps();
          y.resize(n);
          double inv_h = 1.0;
          for (double hl : h) inv_h /= hl;
          for (std::int64_t t = 0; t < n; ++t) {
            const auto s = path.state(t);
            double prod = 1.0;
            for (int j = 0; j < d; ++j) {
              const double u = (x[j] - s[j]) / h[j];
              if (u < -1.0 || u > 1.0) {
                prod = 0.0;
                break;
              }
              prod *= K(u);
            }
            y[t] = prod * inv_h;
          }
          if (shuffle) {
            // Fisher-Yates keyed by the replicate seed, stream 1.
            const Philox4x32 rng(rep.seed);
            for (std::int64_t i = n - 1; i > 0; --i) {
              const double u = rng.uniform(static_cast<std::uint64_t>(i), 0, 1);
              const std::int64_t j = static_cast<std::int64_t>(u * (i + 1));
              std::swap(y[i], y[std::min(j, i)]);
            }
          }
          double mean = 0.0;
          for (double v : y) mean += v;
          mean /= static_cast<double>(n);
          for (std::size_t li = 0; li < lags.size(); ++li) {
            const auto m = static_cast<std::int64_t>(
                std::llround(lags[li] / path.dt));
            if (m >= n) throw ConfigError("lag exceeds the path length");
            double acc = 0.0;
            for (std::int64_t t = 0; t + m < n; ++t)
              acc += (y[t] - mean) * (y[t + m] - mean);
            per_rep[li][r] = acc / static_cast<double>(n - m);
          }
        }
      },
      0);

  std::vector<CovarianceRow> rows(lags.size());
  for (std::size_t li = 0; li < lags.size(); ++li) {
    CovarianceRow& row = rows[li];
    row.s = lags[li];
    row.per_replicate = per_rep[li];
    double mean = 0.0;
    for (double v : per_rep[li]) mean += v;
    mean /= replicates;
    double var = 0.0;
    for (double v : per_rep[li]) var += (v - mean) * (v - mean);
    var /= (replicates - 1.0);
    row.k = mean;
    row.se = std::sqrt(var / replicates);
  }
  return rows;
}

std::vector<OracleRow> oracle_check(const AnalyticModel& model,
                                    const SimConfig& base_sim,
                                    const Kernel1D& K,
                                    const CandidateGrid& grid,
                                    const EvalRegion& region, double penalty_k,
                                    int n_seeds, int threads) {
  if (n_seeds < 1) throw ConfigError("oracle check needs at least one seed");
  // B(h) and V(h) depend only on (model, K, h, region, T); computed once.
  std::vector<double> bv(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    bv[i] = bias_proxy(model, K, grid.members[i], region) +
            penalty_V(grid.members[i], base_sim.T, penalty_k);
  const double best = *std::min_element(bv.begin(), bv.end());

  std::vector<OracleRow> rows(n_seeds);
  for (int s = 0; s < n_seeds; ++s) {
    SimConfig sim = base_sim;
    sim.seed = derive_seed(base_sim.seed, 1, s);
    const PathGrid path = euler_maruyama(model, sim);
    AdaptiveSelector selector(path, K, grid, region, penalty_k, threads);
    const SelectionResult sel = selector.select();
    OracleRow& row = rows[s];
    row.seed = sim.seed;
    row.h_tilde = sel.h_tilde;
    row.selected_bv = bv[sel.argmin_index];
    row.best_bv = best;
    row.ratio = row.selected_bv / row.best_bv;
  }
  return rows;
}

}  // namespace ergodens
