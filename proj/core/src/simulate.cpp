#include "ergodens/simulate.hpp"

#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

#include "ergodens/errors.hpp"
#include "ergodens/philox.hpp"

namespace ergodens {

namespace {

constexpr std::uint32_t kNoiseStream = 0;
constexpr double kDivergenceRadius = 1e8;
constexpr char kPathMagic[8] = {'E', 'R', 'G', 'O', 'P', 'A', 'T', 'H'};

}  // namespace

void SimConfig::validate() const {
  if (!(T > 0.0) || !(dt > 0.0)) throw ConfigError("T and dt must be positive");
  if (dt > T / 100.0) throw ConfigError("need dt <= T/100");
  if (burn_in < 0.0) throw ConfigError("burn-in must be nonnegative");
  const double ratio = burn_in / dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * (1.0 + ratio))
    throw ConfigError("burn-in must be an integer multiple of dt");
}

std::int64_t SimConfig::n_steps() const {
  return static_cast<std::int64_t>(std::llround(T / dt));
}

std::int64_t SimConfig::burn_steps() const {
  return static_cast<std::int64_t>(std::llround(burn_in / dt));
}

double default_burn_in(double T, const CoefficientClassParams* params) {
  if (params) return 20.0 / params->C_tilde;
  return 0.1 * T;
}

namespace {

// Runs `steps` Euler steps in place, global step counter starting at
// `step0`. Throws on divergence.
void run_steps(const AnalyticModel& model, const Philox4x32& rng, double dt,
               std::int64_t step0, std::int64_t steps, std::vector<double>& x,
               std::vector<double>& drift, std::vector<double>& noise,
               double* record, int d) {
  const double sqrt_dt = std::sqrt(dt);
  const double a = model.diffusion_scale();
  for (std::int64_t k = 0; k < steps; ++k) {
    model.drift(x, drift);
    rng.normals(static_cast<std::uint64_t>(step0 + k), kNoiseStream, noise);
    bool finite = true;
    for (int j = 0; j < d; ++j) {
      x[j] += drift[j] * dt + a * sqrt_dt * noise[j];
      if (!std::isfinite(x[j]) || std::abs(x[j]) > kDivergenceRadius)
        finite = false;
    }
    if (!finite)
      throw DivergenceError("trajectory diverged", step0 + k);
    if (record) std::memcpy(record + k * d, x.data(), d * sizeof(double));
  }
}

}  // namespace

PathGrid euler_maruyama(const AnalyticModel& model, const SimConfig& config) {
  config.validate();
  const int d = model.dim();
  const Philox4x32 rng(config.seed);
  std::vector<double> x = model.mode();
  std::vector<double> drift(d), noise(d);

  const std::int64_t burn = config.burn_steps();
  run_steps(model, rng, config.dt, 0, burn, x, drift, noise, nullptr, d);

  PathGrid path;
  path.dt = config.dt;
  path.d = d;
  path.seed = config.seed;
  path.model_id = model.id();
  const std::int64_t n = config.n_steps();
  path.states.resize(static_cast<std::size_t>(n) * d);
  run_steps(model, rng, config.dt, burn, n, x, drift, noise,
            path.states.data(), d);
  return path;
}

std::vector<double> stationary_start(const AnalyticModel& model,
                                     const SimConfig& config) {
  config.validate();
  const int d = model.dim();
  const Philox4x32 rng(config.seed);
  std::vector<double> x = model.mode();
  std::vector<double> drift(d), noise(d);
  run_steps(model, rng, config.dt, 0, config.burn_steps(), x, drift, noise,
            nullptr, d);
  return x;
}

void dump_path(const PathGrid& path, std::ostream& os) {
  char header[32] = {};
  std::memcpy(header, kPathMagic, 8);
  const std::uint32_t version = 1;
  const std::uint32_t d = static_cast<std::uint32_t>(path.d);
  const std::uint64_t n = static_cast<std::uint64_t>(path.n_steps());
  std::memcpy(header + 8, &version, 4);
  std::memcpy(header + 12, &d, 4);
  std::memcpy(header + 16, &n, 8);
  std::memcpy(header + 24, &path.dt, 8);
  os.write(header, sizeof(header));
  os.write(reinterpret_cast<const char*>(path.states.data()),
           static_cast<std::streamsize>(path.states.size() * sizeof(double)));
}

PathGrid load_path(std::istream& is) {
  char header[32];
  is.read(header, sizeof(header));
  if (!is || std::memcmp(header, kPathMagic, 8) != 0)
    throw ConfigError("not a trajectory dump (bad magic)");
  std::uint32_t version = 0, d = 0;
  std::uint64_t n = 0;
  PathGrid path;
  std::memcpy(&version, header + 8, 4);
  std::memcpy(&d, header + 12, 4);
  std::memcpy(&n, header + 16, 8);
  std::memcpy(&path.dt, header + 24, 8);
  if (version != 1) throw ConfigError("unsupported trajectory dump version");
  path.d = static_cast<int>(d);
  path.states.resize(n * d);
  is.read(reinterpret_cast<char*>(path.states.data()),
          static_cast<std::streamsize>(path.states.size() * sizeof(double)));
  if (!is) throw ConfigError("truncated trajectory dump");
  return path;
}

}  // namespace ergodens
