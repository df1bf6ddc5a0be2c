#pragma once

#include <memory>
#include <string>

#include "ergodens/model.hpp"
#include "run_config.hpp"

namespace ergodens::cli {

/// Builds a model from the declarative config: family plus parameters.
/// Families: ou | gaussian | product_exp | bumped | cylindrical.
inline std::shared_ptr<const AnalyticModel> make_model(const RunConfig& cfg) {
  const std::string family = cfg.get_string("family", std::string("ou"));
  const int d = static_cast<int>(cfg.get_long("d", 2));
  if (family == "ou")
    return std::make_shared<GaussianProductModel>(d, 0.5);
  if (family == "gaussian")
    return std::make_shared<GaussianProductModel>(d,
                                                  cfg.get_double("sigma2", 0.5));
  if (family == "product_exp")
    return std::make_shared<ProductExpDensity>(cfg.get_double("eta", 0.1), d);
  if (family == "bumped") {
    auto base =
        std::make_shared<ProductExpDensity>(cfg.get_double("eta", 0.1), d);
    return std::make_shared<BumpedDensity>(
        base, cfg.get_double("M_T"), cfg.get_doubles("bump_h"),
        cfg.get_doubles("bump_center",
                        std::vector<double>(static_cast<std::size_t>(d), 0.0)));
  }
  if (family == "cylindrical") {
    auto base =
        std::make_shared<RadialExpDensity>(cfg.get_double("eta", 0.1), d);
    return std::make_shared<CylindricalBumpDensity>(
        base, cfg.get_double("M_T"), cfg.get_double("r_min"),
        cfg.get_double("r_max"), cfg.get_doubles("tail_h"));
  }
  throw ConfigError("unknown model family '" + family + "'");
}

}  // namespace ergodens::cli
