#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "ergodens/bandwidth.hpp"
#include "ergodens/errors.hpp"
#include "ergodens/estimator.hpp"
#include "ergodens/harness.hpp"
#include "ergodens/kernel.hpp"
#include "ergodens/model.hpp"
#include "ergodens/parallel.hpp"
#include "ergodens/quadrature.hpp"
#include "ergodens/simulate.hpp"
#include "model_factory.hpp"
#include "run_config.hpp"

namespace ergodens::cli {
namespace {

using nlohmann::json;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  if (const auto dir = std::filesystem::path(path).parent_path();
      !dir.empty())
    std::filesystem::create_directories(dir);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file '" + path + "'");
  return out;
}

SimConfig sim_from(const RunConfig& cfg, double default_dt = 0.01) {
  SimConfig sim;
  sim.T = cfg.get_double("T", 100.0);
  sim.dt = cfg.get_double("dt", default_dt);
  sim.burn_in = cfg.get_double("burn_in", default_burn_in(sim.T));
  sim.burn_in = std::round(sim.burn_in / sim.dt) * sim.dt;
  sim.seed = cfg.get_seed("seed", 1);
  return sim;
}

EvalRegion region_from(const RunConfig& cfg, int d, double min_h) {
  const double half = cfg.get_double("region_half", 0.75);
  const double spacing = cfg.get_double("region_spacing", min_h / 4.0);
  return EvalRegion::centered_box(d, half, spacing);
}

int kernel_order_for(const RunConfig& cfg) {
  if (cfg.has("M")) return static_cast<int>(cfg.get_long("M"));
  if (cfg.has("beta")) {
    const auto beta = cfg.get_doubles("beta");
    double max_b = 0.0;
    for (double b : beta) max_b = std::max(max_b, b);
    return std::max(1, static_cast<int>(std::ceil(max_b)));
  }
  return 3;
}

std::vector<double> bandwidth_for(const RunConfig& cfg, int d, double T) {
  const std::string spec = cfg.get_string("h", std::string("auto"));
  if (spec == "auto") {
    const auto beta = cfg.get_doubles("beta");
    return rate_optimal_bandwidth(beta, T, d);
  }
  const auto h = RunConfig::parse_doubles(spec, "h");
  if (static_cast<int>(h.size()) != d)
    throw ConfigError("bandwidth list must have one entry per axis");
  return h;
}

void warn_dt_rule(double dt, std::span<const double> h) {
  double min_h = 1.0;
  for (double v : h) min_h = std::min(min_h, v);
  if (dt > min_h * min_h / 10.0)
    std::cerr << "warning: dt = " << dt
              << " violates the dt <= (min h)^2/10 rule (threshold "
              << min_h * min_h / 10.0 << "); grid error may not be negligible\n";
}

// ---------------------------------------------------------------------------

int cmd_kernel_check(const RunConfig& cfg, const std::string& dump_coeffs) {
  std::vector<long> orders{1, 3, 5, 7};
  if (cfg.has("orders")) orders = cfg.get_longs("orders");
  write_provenance(std::cout, cfg, "kernel-check");
  std::cout << "order,l,moment,abs_error,ok\n";
  bool all_ok = true;
  for (long M : orders) {
    const Kernel1D K = make_order_kernel(static_cast<int>(M));
    for (long l = 0; l <= M; ++l) {
      const double m = gl_integrate(
          [&](double x) { return std::pow(x, static_cast<double>(l)) * K(x); },
          -1.0, 1.0, 64);
      const double err = std::abs(l == 0 ? m - 1.0 : m);
      const bool ok = err <= 1e-8;
      all_ok = all_ok && ok;
      std::cout << M << "," << l << "," << num(m) << "," << num(err) << ","
                << (ok ? 1 : 0) << "\n";
    }
    if (!dump_coeffs.empty()) {
      auto out = open_out(dump_coeffs);
      write_provenance(out, cfg, "kernel-check");
      out << "order,power,coefficient\n";
      for (std::size_t i = 0; i < K.coefficients().size(); ++i)
        out << M << "," << i << "," << num(K.coefficients()[i]) << "\n";
    }
  }
  return all_ok ? 0 : 4;
}

int cmd_simulate(const RunConfig& cfg, const std::string& dump) {
  const auto model = make_model(cfg);
  const SimConfig sim = sim_from(cfg);
  const PathGrid path = euler_maruyama(*model, sim);
  if (!dump.empty()) {
    auto out = open_out(dump);
    dump_path(path, out);
  }
  write_provenance(std::cout, cfg, "simulate");
  std::cout << "axis,mean,variance\n";
  const int d = path.d;
  for (int j = 0; j < d; ++j) {
    double mean = 0.0, var = 0.0;
    for (std::int64_t k = 0; k < path.n_steps(); ++k)
      mean += path.states[k * d + j];
    mean /= static_cast<double>(path.n_steps());
    for (std::int64_t k = 0; k < path.n_steps(); ++k) {
      const double dev = path.states[k * d + j] - mean;
      var += dev * dev;
    }
    var /= static_cast<double>(path.n_steps());
    std::cout << j + 1 << "," << num(mean) << "," << num(var) << "\n";
  }
  if (cfg.has("beta")) {
    SmoothnessSpec spec;
    spec.beta = cfg.get_doubles("beta");
    spec.L.assign(spec.beta.size(), 1.0);
    if (auto bumped = dynamic_cast<const BumpedDensity*>(model.get())) {
      std::cout << "# holder_budget";
      for (double r : bumped->holder_budget(spec)) std::cout << " " << num(r);
      std::cout << "\n";
    } else if (auto cyl =
                   dynamic_cast<const CylindricalBumpDensity*>(model.get())) {
      std::cout << "# holder_budget";
      for (double r : cyl->holder_budget(spec)) std::cout << " " << num(r);
      std::cout << "\n";
    }
  }
  return 0;
}

int cmd_estimate(const RunConfig& cfg, const std::string& path_file,
                 const std::string& out_file) {
  const Kernel1D K = make_order_kernel(kernel_order_for(cfg));
  std::shared_ptr<const AnalyticModel> model;
  PathGrid path;
  if (!path_file.empty()) {
    std::ifstream in(path_file, std::ios::binary);
    if (!in) throw ConfigError("cannot open path file '" + path_file + "'");
    path = load_path(in);
    if (cfg.has("family")) model = make_model(cfg);
  } else {
    model = make_model(cfg);
    const SimConfig sim = sim_from(cfg);
    path = euler_maruyama(*model, sim);
  }
  const int d = path.d;
  const std::vector<double> h = bandwidth_for(cfg, d, path.time_horizon());
  warn_dt_rule(path.dt, h);

  std::ostringstream body;
  body << "# h_effective =";
  for (double v : h) body << " " << num(v);
  body << "\n";
  for (int j = 0; j < d; ++j) body << "x" << j + 1 << ",";
  body << "estimate" << (model ? ",analytic" : "") << "\n";

  if (cfg.has("point")) {
    const auto x = cfg.get_doubles("point");
    if (static_cast<int>(x.size()) != d)
      throw ConfigError("point dimension mismatch");
    const double est = kde_pointwise(path, K, h, x);
    for (double v : x) body << num(v) << ",";
    body << num(est);
    if (model) body << "," << num(model->density(x));
    body << "\n";
  } else {
    double min_h = 1.0;
    for (double v : h) min_h = std::min(min_h, v);
    const EvalRegion region = region_from(cfg, d, min_h);
    GridEstimator engine(path, region, h,
                         static_cast<int>(cfg.get_long("threads", 0)));
    const auto grid = engine.density(K, h);
    std::vector<int> idx(d, 0);
    std::vector<double> x(d);
    for (std::int64_t flat = 0; flat < region.total_nodes(); ++flat) {
      for (int j = 0; j < d; ++j) x[j] = region.node_coord(j, idx[j]);
      for (double v : x) body << num(v) << ",";
      body << num(grid[flat]);
      if (model) body << "," << num(model->density(x));
      body << "\n";
      for (int j = d - 1; j >= 0; --j) {
        if (++idx[j] < region.nodes[j]) break;
        idx[j] = 0;
      }
    }
  }
  if (out_file.empty()) {
    write_provenance(std::cout, cfg, "estimate");
    std::cout << body.str();
  } else {
    auto out = open_out(out_file);
    write_provenance(out, cfg, "estimate");
    out << body.str();
  }
  return 0;
}

CandidateGrid grid_from(const RunConfig& cfg, double T, int d) {
  if (cfg.has("grid_zs")) {
    const auto zs = cfg.get_longs("grid_zs");
    return candidate_grid_from_ladder(T, d, zs, cfg.get_double("grid_a", 1.1),
                                      cfg.get_double("grid_b", 2.0),
                                      cfg.get_double("grid_c", 0.01));
  }
  return build_candidate_grid(
      T, d, cfg.get_double("grid_a", 1.1), cfg.get_double("grid_b", 2.0),
      cfg.get_double("grid_c", 0.01),
      static_cast<int>(cfg.get_long("grid_cap", 8)));
}

json selection_to_json(const SelectionResult& sel, const CandidateGrid& grid) {
  json j;
  j["grid"] = {{"T", grid.T},       {"a", grid.a},     {"b", grid.b},
               {"c", grid.c},       {"h_lo", grid.h_lo},
               {"h_hi", grid.h_hi}, {"members", grid.size()}};
  j["table"] = json::array();
  for (const auto& row : sel.table)
    j["table"].push_back(
        {{"h", row.h}, {"V", row.V}, {"A", row.A}, {"A_plus_V", row.AV}});
  j["h_tilde"] = sel.h_tilde;
  j["argmin_index"] = sel.argmin_index;
  j["tie_break"] = sel.tie_break_note;
  return j;
}

int cmd_adapt(const RunConfig& cfg, const std::string& out_file) {
  const auto model = make_model(cfg);
  if (model->dim() < 3)
    throw ConfigError("the adaptive procedure requires d >= 3");
  const Kernel1D K = make_order_kernel(kernel_order_for(cfg));
  const SimConfig sim = sim_from(cfg);
  const PathGrid path = euler_maruyama(*model, sim);
  const CandidateGrid grid = grid_from(cfg, sim.T, model->dim());
  double min_h = 1.0;
  for (const auto& h : grid.members)
    for (double v : h) min_h = std::min(min_h, v);
  warn_dt_rule(path.dt, std::vector<double>(model->dim(), min_h));
  const EvalRegion region = region_from(cfg, model->dim(), min_h);
  const double k_pen = cfg.get_double("k", 2.0);
  AdaptiveSelector selector(path, K, grid, region, k_pen,
                            static_cast<int>(cfg.get_long("threads", 0)));
  const SelectionResult sel = selector.select();

  write_provenance(std::cout, cfg, "adapt");
  std::cout << "rank,h,V,A,A_plus_V\n";
  std::vector<std::size_t> order(sel.table.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return sel.table[a].AV < sel.table[b].AV;
                   });
  for (std::size_t r = 0; r < order.size(); ++r) {
    const auto& row = sel.table[order[r]];
    std::cout << r + 1 << ",";
    for (std::size_t j = 0; j < row.h.size(); ++j)
      std::cout << (j ? "|" : "") << num(row.h[j]);
    std::cout << "," << num(row.V) << "," << num(row.A) << "," << num(row.AV)
              << "\n";
  }
  std::cout << "# h_tilde =";
  for (double v : sel.h_tilde) std::cout << " " << num(v);
  std::cout << "\n";

  if (!out_file.empty()) {
    auto out = open_out(out_file);
    write_provenance(out, cfg, "adapt");
    out << selection_to_json(sel, grid).dump(2) << "\n";
  }
  return 0;
}

int cmd_rate(const RunConfig& cfg, const std::string& out_prefix,
             bool plot_data) {
  RateExperimentConfig rc;
  rc.model = make_model(cfg);
  rc.beta.beta = cfg.get_doubles("beta");
  rc.beta.L.assign(rc.beta.beta.size(), 1.0);
  rc.T_ladder = cfg.get_doubles("Ts");
  rc.replicates = static_cast<int>(cfg.get_long("replicates", 50));
  rc.point = cfg.get_doubles(
      "point",
      std::vector<double>(static_cast<std::size_t>(rc.model->dim()), 0.0));
  const std::string policy =
      cfg.get_string("policy", std::string("rate-optimal"));
  if (policy == "rate-optimal") {
    rc.policy = BandwidthPolicy::kRateOptimal;
  } else if (policy == "fixed") {
    rc.policy = BandwidthPolicy::kFixed;
    rc.fixed_h = cfg.get_doubles("h");
  } else {
    throw ConfigError("rate: policy must be rate-optimal or fixed");
  }
  rc.kernel_order = kernel_order_for(cfg);
  rc.seed_base = cfg.get_seed("seed", 1);
  rc.threads = static_cast<int>(cfg.get_long("threads", 0));
  const auto table = mse_experiment(rc);

  std::ostringstream csv;
  csv << "T,mse,mc_se,excluded,total\n";
  for (const auto& row : table)
    csv << num(row.T) << "," << num(row.mse) << "," << num(row.se) << ","
        << row.excluded << "," << row.total << "\n";

  json fit_json;
  std::ostringstream fit_text;
  if (table.size() >= 4) {
    const double gamma = cfg.get_double(
        "gamma", predicted_rate(rc.beta.beta, rc.model->dim()).gamma);
    const RateFit fit = fit_rate(table, gamma);
    fit_json = {{"slope", fit.slope},
                {"intercept", fit.intercept},
                {"gamma", fit.gamma},
                {"residual_power", fit.residual_power},
                {"residual_logpower", fit.residual_logpower},
                {"preferred_model", fit.preferred_model == RateModel::kPower
                                        ? "POWER"
                                        : "LOG_POWER"}};
    fit_text << "# slope=" << num(fit.slope)
             << " residual_power=" << num(fit.residual_power)
             << " residual_logpower=" << num(fit.residual_logpower)
             << " preferred="
             << (fit.preferred_model == RateModel::kPower ? "POWER"
                                                          : "LOG_POWER")
             << "\n";
  }

  write_provenance(std::cout, cfg, "rate");
  std::cout << csv.str() << fit_text.str();

  if (!out_prefix.empty()) {
    {
      auto out = open_out(out_prefix + "_mse.csv");
      write_provenance(out, cfg, "rate");
      out << csv.str();
    }
    if (!fit_json.is_null()) {
      auto out = open_out(out_prefix + "_fit.json");
      write_provenance(out, cfg, "rate");
      out << fit_json.dump(2) << "\n";
    }
    if (plot_data) {
      auto out = open_out(out_prefix + "_points.dat");
      write_provenance(out, cfg, "rate");
      for (const auto& row : table)
        out << num(std::log(row.T)) << " " << num(std::log(row.mse)) << "\n";
      if (!fit_json.is_null()) {
        auto lines = open_out(out_prefix + "_fitlines.dat");
        write_provenance(lines, cfg, "rate");
        const double slope = fit_json["slope"].get<double>();
        const double intercept = fit_json["intercept"].get<double>();
        for (const auto& row : table) {
          const double lx = std::log(row.T);
          lines << num(lx) << " " << num(intercept + slope * lx) << "\n";
        }
      }
    }
  }
  return 0;
}

int cmd_mixing(const RunConfig& cfg, const std::string& out_file,
               bool shuffle) {
  const auto model = make_model(cfg);
  const SimConfig sim = sim_from(cfg);
  const Kernel1D K = make_order_kernel(kernel_order_for(cfg));
  const auto h = cfg.get_doubles("h");
  const auto x = cfg.get_doubles(
      "point",
      std::vector<double>(static_cast<std::size_t>(model->dim()), 0.0));
  const auto lags = cfg.get_doubles("lags");
  const int reps = static_cast<int>(cfg.get_long("replicates", 20));
  const auto rows = covariance_probe(*model, sim, K, h, x, lags, reps, shuffle);

  std::ostringstream body;
  body << "s,k,se\n";
  for (const auto& row : rows)
    body << num(row.s) << "," << num(row.k) << "," << num(row.se) << "\n";
  write_provenance(std::cout, cfg, "mixing");
  std::cout << body.str();
  if (!out_file.empty()) {
    auto out = open_out(out_file);
    write_provenance(out, cfg, "mixing");
    out << body.str();
  }
  return 0;
}

int cmd_calibrate_penalty(const RunConfig& cfg, const std::string& out_file) {
  const auto model = make_model(cfg);
  if (model->dim() < 3)
    throw ConfigError("penalty calibration requires d >= 3");
  const Kernel1D K = make_order_kernel(kernel_order_for(cfg));
  const SimConfig sim = sim_from(cfg);
  const CandidateGrid grid = grid_from(cfg, sim.T, model->dim());
  double min_h = 1.0;
  for (const auto& h : grid.members)
    for (double v : h) min_h = std::min(min_h, v);
  const EvalRegion region = region_from(cfg, model->dim(), min_h);
  const auto ks =
      cfg.get_doubles("ks", std::vector<double>{0.5, 1.0, 2.0, 4.0, 8.0});
  const int n_seeds = static_cast<int>(cfg.get_long("seeds", 10));

  std::ostringstream body;
  body << "k,mean_ratio,max_ratio,frac_within_5\n";
  for (double k : ks) {
    const auto rows =
        oracle_check(*model, sim, K, grid, region, k, n_seeds,
                     static_cast<int>(cfg.get_long("threads", 0)));
    double mean = 0.0, worst = 0.0;
    int within = 0;
    for (const auto& row : rows) {
      mean += row.ratio;
      worst = std::max(worst, row.ratio);
      if (row.ratio <= 5.0) ++within;
    }
    mean /= static_cast<double>(rows.size());
    body << num(k) << "," << num(mean) << "," << num(worst) << ","
         << num(static_cast<double>(within) / rows.size()) << "\n";
  }
  write_provenance(std::cout, cfg, "calibrate-penalty");
  std::cout << body.str();
  if (!out_file.empty()) {
    auto out = open_out(out_file);
    write_provenance(out, cfg, "calibrate-penalty");
    out << body.str();
  }
  return 0;
}

int dispatch(int argc, char** argv) {
  CLI::App app{"ergodens: invariant-density estimation for ergodic diffusions"};
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand name

  std::string config_path, out_path, dump_path_file;
  std::vector<std::string> overrides;
  long threads = 0;
  bool plot_data = false, shuffle = false;

  app.add_option("--config", config_path,
                 "run configuration file (key = value)");
  app.add_option("--set", overrides, "override config entries, key=value");
  app.add_option("--threads", threads, "worker thread cap (ERGODENS_THREADS)");

  auto* kernel_check =
      app.add_subcommand("kernel-check", "kernel moment report");
  std::string dump_coeffs;
  kernel_check->add_option("--dump-coeffs", dump_coeffs,
                           "write kernel coefficients to CSV");

  auto* simulate = app.add_subcommand("simulate", "sample a trajectory");
  simulate->add_option("--dump-path", dump_path_file,
                       "write the binary trajectory dump here");

  auto* estimate = app.add_subcommand("estimate", "kernel density estimate");
  std::string path_file;
  estimate->add_option("--path", path_file, "binary trajectory dump to reuse");
  estimate->add_option("--out", out_path, "output CSV file");

  auto* adapt = app.add_subcommand("adapt", "Goldenshluger-Lepski selection");
  adapt->add_option("--out", out_path, "selection result JSON file");

  auto* rate = app.add_subcommand("rate", "Monte Carlo rate experiment");
  rate->add_option("--out", out_path, "output prefix for CSV/JSON artifacts");
  rate->add_flag("--plot-data", plot_data, "emit gnuplot-ready .dat files");

  auto* mixing = app.add_subcommand("mixing", "covariance decay probe");
  mixing->add_option("--out", out_path, "output CSV file");
  mixing->add_flag("--shuffle", shuffle,
                   "white-noise surrogate (shuffled path)");

  auto* calibrate =
      app.add_subcommand("calibrate-penalty", "sweep the penalty constant");
  calibrate->add_option("--out", out_path, "output CSV file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // usage problems are configuration errors
  }

  RunConfig cfg;
  if (!config_path.empty()) cfg.load_file(config_path);
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw ConfigError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (threads > 0) cfg.set("threads", std::to_string(threads));

  if (kernel_check->parsed()) return cmd_kernel_check(cfg, dump_coeffs);
  if (simulate->parsed()) return cmd_simulate(cfg, dump_path_file);
  if (estimate->parsed()) return cmd_estimate(cfg, path_file, out_path);
  if (adapt->parsed()) return cmd_adapt(cfg, out_path);
  if (rate->parsed()) return cmd_rate(cfg, out_path, plot_data);
  if (mixing->parsed()) return cmd_mixing(cfg, out_path, shuffle);
  if (calibrate->parsed()) return cmd_calibrate_penalty(cfg, out_path);
  return 2;
}

}  // namespace
}  // namespace ergodens::cli

int main(int argc, char** argv) {
  try {
    return ergodens::cli::dispatch(argc, argv);
  } catch (const ergodens::DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return 3;
  } catch (const ergodens::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
