#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ergodens/model.hpp"

namespace ergodens {

/// Horizon, Euler step, discarded initial span and the replicate seed.
struct SimConfig {
  double T = 100.0;
  double dt = 0.01;
  double burn_in = 0.0;
  std::uint64_t seed = 1;

  void validate() const;
  std::int64_t n_steps() const;
  std::int64_t burn_steps() const;
};

/// Default burn-in: 20/C_tilde when class parameters are available, else 10%
/// of the horizon.
double default_burn_in(double T, const CoefficientClassParams* params = nullptr);

/// Discretized trajectory standing in for the continuous record on [0,T]:
/// n_steps x d states at uniform spacing dt, starting after burn-in.
struct PathGrid {
  double dt = 0.0;
  int d = 0;
  std::vector<double> states;  // row-major, n_steps x d
  std::uint64_t seed = 0;
  std::string model_id;

  std::int64_t n_steps() const {
    return d == 0 ? 0 : static_cast<std::int64_t>(states.size()) / d;
  }
  double time_horizon() const { return static_cast<double>(n_steps()) * dt; }
  std::span<const double> state(std::int64_t k) const {
    return {states.data() + k * d, static_cast<std::size_t>(d)};
  }
};

/// Euler-Maruyama: X_{k+1} = X_k + b(X_k) dt + a sqrt(dt) xi_k with xi_k
/// standard normal from a counter-based generator keyed by (seed, step).
/// Starts at the density's mode, simulates the burn-in span, discards it and
/// records n_steps states. Throws DivergenceError on a non-finite state.
PathGrid euler_maruyama(const AnalyticModel& model, const SimConfig& config);

/// Terminal state of a burn-in run started at the density's mode.
std::vector<double> stationary_start(const AnalyticModel& model,
                                     const SimConfig& config);

/// Binary trajectory dump: 32-byte header (magic, version, d, n_steps, dt)
/// followed by little-endian 64-bit float rows, d values per step.
void dump_path(const PathGrid& path, std::ostream& os);
PathGrid load_path(std::istream& is);

}  // namespace ergodens
