#include "ergodens/bandwidth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ergodens/errors.hpp"

namespace ergodens {

SortedIndex SortedIndex::of(std::span<const double> h) {
  SortedIndex s;
  s.k.resize(h.size());
  std::iota(s.k.begin(), s.k.end(), 0);
  std::stable_sort(s.k.begin(), s.k.end(),
                   [&](int a, int b) { return h[a] < h[b]; });
  return s;
}

namespace {

void require_dim_at_least_3(std::size_t d, const char* who) {
  if (d < 3)
    throw ConfigError(std::string(who) + " requires dimension >= 3, got " +
                      std::to_string(d));
}

std::vector<double> sorted_values(std::span<const double> v) {
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  return s;
}

}  // namespace

double harmonic_mean_tail(std::span<const double> beta) {
  require_dim_at_least_3(beta.size(), "harmonic_mean_tail");
  const std::vector<double> s = sorted_values(beta);
  double inv_sum = 0.0;
  for (std::size_t l = 2; l < s.size(); ++l) inv_sum += 1.0 / s[l];
  return static_cast<double>(s.size() - 2) / inv_sum;
}

RatePrediction predicted_rate(std::span<const double> beta, int d) {
  if (static_cast<int>(beta.size()) != d)
    throw ConfigError("predicted_rate: beta length must equal d");
  if (d < 1) throw ConfigError("predicted_rate: d must be >= 1");
  if (d == 1) return {1.0, false};
  if (d == 2) return {1.0, true};
  const double b3 = harmonic_mean_tail(beta);
  const std::vector<double> s = sorted_values(beta);
  RatePrediction r;
  r.gamma = 2.0 * b3 / (2.0 * b3 + d - 2.0);
  r.has_log = s[1] < s[2];
  return r;
}

RegimeTag classify_regime(std::span<const double> beta) {
  require_dim_at_least_3(beta.size(), "classify_regime");
  const std::vector<double> s = sorted_values(beta);
  int k0 = 1;
  while (k0 < static_cast<int>(s.size()) && s[k0] == s[0]) ++k0;
  if (k0 >= 3) return {VarianceRegime::kPowerK0, k0};
  if (k0 == 2) return {VarianceRegime::kLog, k0};
  return {s[1] < s[2] ? VarianceRegime::kLog : VarianceRegime::kSqrt, 1};
}

double variance_bound(std::span<const double> h, double T, RegimeTag tag,
                      double c) {
  require_dim_at_least_3(h.size(), "variance_bound");
  for (double hl : h)
    if (!(hl > 0.0 && hl < 1.0))
      throw ConfigError("variance_bound: bandwidths must lie in (0,1)");
  const std::vector<double> hs = sorted_values(h);
  const std::size_t d = hs.size();
  switch (tag.regime) {
    case VarianceRegime::kLog: {
      double logs = 0.0;
      for (double hl : h) logs += std::abs(std::log(hl));
      double prod = 1.0;
      for (std::size_t l = 2; l < d; ++l) prod *= hs[l];
      return c / T * logs / prod;
    }
    case VarianceRegime::kPowerK0: {
      const int k0 = tag.k0;
      if (k0 < 3 || k0 > static_cast<int>(d))
        throw ConfigError("variance_bound: POWER_K0 needs 3 <= k0 <= d");
      double head = 1.0;
      for (int l = 0; l < k0; ++l) head *= hs[l];
      double rest = 1.0;
      for (std::size_t l = k0; l < d; ++l) rest *= hs[l];
      return c / T / (std::pow(head, 1.0 - 2.0 / k0) * rest);
    }
    case VarianceRegime::kSqrt: {
      double rest = 1.0;
      for (std::size_t l = 3; l < d; ++l) rest *= hs[l];
      return c / T / (std::sqrt(hs[1] * hs[2]) * rest);
    }
  }
  throw ConfigError("variance_bound: unknown regime");
}

std::vector<double> rate_optimal_bandwidth(std::span<const double> beta,
                                           double T, int d) {
  if (static_cast<int>(beta.size()) != d)
    throw ConfigError("rate_optimal_bandwidth: beta length must equal d");
  if (d == 1)
    throw ConfigError(
        "rate_optimal_bandwidth: d=1 achieves the parametric rate with any "
        "fixed bandwidth and is out of scope");
  if (!(T >= 3.0)) throw ConfigError("rate_optimal_bandwidth: need T >= 3");
  for (double b : beta)
    if (!(b > 0.0)) throw ConfigError("smoothness exponents must be positive");

  std::vector<double> h(d);
  if (d == 2) {
    const double base = std::log(T) / T;
    for (int l = 0; l < d; ++l) h[l] = std::pow(base, 1.0 / (2.0 * beta[l]));
    return h;
  }
  const double b3 = harmonic_mean_tail(beta);
  const std::vector<double> s = sorted_values(beta);
  const double base = s[1] < s[2] ? std::log(T) / T : 1.0 / T;
  const double denom = 2.0 * b3 + d - 2.0;
  for (int l = 0; l < d; ++l) h[l] = std::pow(base, b3 / (beta[l] * denom));
  return h;
}

double penalty_V(std::span<const double> h, double T, double k) {
  require_dim_at_least_3(h.size(), "penalty_V");
  if (!(k > 0.0)) throw ConfigError("penalty_V: calibration constant must be > 0");
  for (double hl : h)
    if (!(hl > 0.0 && hl < 1.0))
      throw ConfigError("penalty_V: bandwidths must lie in (0,1)");
  const SortedIndex order = SortedIndex::of(h);
  const std::size_t d = h.size();
  double logs = 0.0;
  for (double hl : h) logs += std::abs(std::log(hl));
  double prod_tail2 = 1.0;  // l not in {k1,k2}
  for (std::size_t l = 2; l < d; ++l) prod_tail2 *= h[order.k[l]];
  double prod_tail3 = 1.0;  // l not in {k1,k2,k3}
  for (std::size_t l = 3; l < d; ++l) prod_tail3 *= h[order.k[l]];
  const double branch1 = logs / prod_tail2;
  const double branch2 =
      1.0 / (std::sqrt(h[order.k[1]] * h[order.k[2]]) * prod_tail3);
  return k / T * std::min(branch1, branch2);
}

// ---------------------------------------------------------------------------
// Candidate grid

double CandidateGrid::constraint_floor() const {
  return c * std::pow(std::log(T), 2.0 + a) / std::sqrt(T);
}

bool CandidateGrid::member_satisfies(std::span<const double> h) const {
  if (static_cast<int>(h.size()) != d) return false;
  const double tol = 1e-12;
  for (double hl : h)
    if (hl < h_lo * (1.0 - tol) || hl > h_hi * (1.0 + tol)) return false;
  const SortedIndex order = SortedIndex::of(h);
  double logs = 0.0;
  for (double hl : h) logs += std::abs(std::log(hl));
  const double hk1 = h[order.k[0]], hk2 = h[order.k[1]], hk3 = h[order.k[2]];
  const double branch1 = std::sqrt(logs * hk1 * hk2);
  const double branch2 = std::sqrt(hk1) * std::pow(hk2 * hk3, 0.25);
  return std::min(branch1, branch2) >= constraint_floor() * (1.0 - tol);
}

std::size_t CandidateGrid::find(std::span<const double> h) const {
  for (std::size_t i = 0; i < members.size(); ++i) {
    bool eq = true;
    for (int j = 0; j < d; ++j)
      if (members[i][j] != h[j]) {
        eq = false;
        break;
      }
    if (eq) return i;
  }
  return npos;
}

namespace {

CandidateGrid assemble_grid(double T, int d, double a, double b, double c,
                            int cap, const std::vector<long>& ladder,
                            double h_lo, double h_hi) {
  CandidateGrid grid;
  grid.T = T;
  grid.d = d;
  grid.a = a;
  grid.b = b;
  grid.c = c;
  grid.h_lo = h_lo;
  grid.h_hi = h_hi;
  grid.per_axis_cap = cap;

  if (ladder.empty())
    throw ConfigError(
        "candidate grid is empty: no integer reciprocal bandwidth fits the "
        "box constraint (1/T)^b <= h <= h_max");

  std::size_t rejected_floor = 0;
  std::vector<std::size_t> idx(d, 0);
  const std::size_t n_axis = ladder.size();
  std::size_t total = 1;
  for (int j = 0; j < d; ++j) total *= n_axis;
  std::vector<double> h(d);
  std::vector<long> z(d);
  for (std::size_t flat = 0; flat < total; ++flat) {
    for (int j = 0; j < d; ++j) {
      z[j] = ladder[idx[j]];
      h[j] = 1.0 / static_cast<double>(z[j]);
    }
    if (grid.member_satisfies(h)) {
      grid.zs.push_back(z);
      grid.members.push_back(h);
    } else {
      ++rejected_floor;
    }
    for (int j = d - 1; j >= 0; --j) {
      if (++idx[j] < n_axis) break;
      idx[j] = 0;
    }
  }
  if (grid.members.empty())
    throw ConfigError(
        "candidate grid is empty: all " + std::to_string(rejected_floor) +
        " box-feasible members fall below the floor constraint "
        "min(...) >= c (log T)^{2+a} / sqrt(T)");
  return grid;
}

}  // namespace

CandidateGrid build_candidate_grid(double T, int d, double a, double b,
                                   double c, int per_axis_cap) {
  require_dim_at_least_3(static_cast<std::size_t>(d), "build_candidate_grid");
  if (!(T > std::exp(1.0))) throw ConfigError("need T > e so log T > 1");
  if (!(a > 1.0)) throw ConfigError("candidate grid requires a > 1");
  if (!(b > 0.0 && c > 0.0)) throw ConfigError("candidate grid requires b, c > 0");
  if (per_axis_cap < 1) throw ConfigError("per-axis cap must be >= 1");

  const double h_hi = std::pow(1.0 / std::log(T), 1.0 / (d - 2.0) + a);
  const double h_lo = std::pow(1.0 / T, b);
  if (h_lo > h_hi)
    throw ConfigError("candidate grid: admissible interval is empty");

  // Geometric ladder z, 2z, 4z, ... of integer reciprocals inside the box.
  const double z_min = std::ceil(1.0 / h_hi - 1e-9);
  const double z_cap = std::min(std::floor(std::pow(T, b)), std::floor(T));
  std::vector<long> ladder;
  for (double z = std::max(1.0, z_min);
       z <= z_cap && static_cast<int>(ladder.size()) < per_axis_cap; z *= 2.0)
    ladder.push_back(static_cast<long>(std::llround(std::ceil(z - 1e-9))));
  return assemble_grid(T, d, a, b, c, per_axis_cap, ladder, h_lo, h_hi);
}

CandidateGrid candidate_grid_from_ladder(double T, int d,
                                         std::span<const long> ladder,
                                         double a, double b, double c) {
  require_dim_at_least_3(static_cast<std::size_t>(d),
                         "candidate_grid_from_ladder");
  if (!(T > std::exp(1.0))) throw ConfigError("need T > e so log T > 1");
  if (ladder.empty()) throw ConfigError("explicit ladder must be nonempty");
  std::vector<long> zs(ladder.begin(), ladder.end());
  std::sort(zs.begin(), zs.end());
  zs.erase(std::unique(zs.begin(), zs.end()), zs.end());
  for (long z : zs)
    if (z < 1 || static_cast<double>(z) > std::floor(T))
      throw ConfigError("ladder entries must be integers in [1, floor(T)]");
  const double h_hi = 1.0 / static_cast<double>(zs.front());
  const double h_lo = 1.0 / static_cast<double>(zs.back());
  return assemble_grid(T, d, a, b, c, static_cast<int>(zs.size()), zs, h_lo,
                       h_hi);
}

// ---------------------------------------------------------------------------
// AdaptiveSelector

namespace {

std::vector<double> selector_support(const CandidateGrid& grid) {
  // Largest per-axis reach of any (h, eta) pair.
  std::vector<double> reach(grid.d, 0.0);
  for (const auto& h : grid.members)
    for (int j = 0; j < grid.d; ++j) reach[j] = std::max(reach[j], h[j]);
  for (int j = 0; j < grid.d; ++j) reach[j] *= 2.0;
  return reach;
}

}  // namespace

AdaptiveSelector::AdaptiveSelector(const PathGrid& path, const Kernel1D& K,
                                   const CandidateGrid& grid,
                                   const EvalRegion& region, double k_penalty,
                                   int threads)
    : kernel_(&K),
      grid_(&grid),
      region_(region),
      k_penalty_(k_penalty),
      threads_(threads),
      engine_(path, region, selector_support(grid), threads) {
  if (grid_->size() == 0) throw ConfigError("selection needs a nonempty grid");
  const std::size_t n = grid_->size();
  V_.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    V_[i] = penalty_V(grid_->members[i], path.time_horizon(), k_penalty_);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  pair_norm_.assign(n, std::vector<double>(n, nan));
  A_cache_.assign(n, nan);
}

void AdaptiveSelector::ensure_singles() {
  if (singles_ready_) return;
  singles_.resize(grid_->size());
  for (std::size_t i = 0; i < grid_->size(); ++i)
    singles_[i] = engine_.density(*kernel_, grid_->members[i]);
  singles_ready_ = true;
}

void AdaptiveSelector::fill_pair_column(std::size_t eta_index) {
  // One padded eta-field serves the whole column of (h, eta) pairs.
  const std::vector<double> field =
      engine_.padded_field(*kernel_, grid_->members[eta_index]);
  for (std::size_t i = 0; i < grid_->size(); ++i) {
    double& norm = pair_norm_[i][eta_index];
    if (!std::isnan(norm)) continue;
    const std::vector<double> pair =
        engine_.smooth_field(field, *kernel_, grid_->members[i]);
    norm = l2_distance_sq_on_region(pair, singles_[eta_index], region_);
  }
}

double AdaptiveSelector::compute_A(std::size_t member_index) {
  if (member_index >= grid_->size())
    throw ConfigError("compute_A: member index out of range");
  if (!std::isnan(A_cache_[member_index])) return A_cache_[member_index];
  ensure_singles();
  double best = 0.0;
  for (std::size_t j = 0; j < grid_->size(); ++j) {
    if (std::isnan(pair_norm_[member_index][j])) fill_pair_column(j);
    best = std::max(best, pair_norm_[member_index][j] - V_[j]);
  }
  A_cache_[member_index] = best;
  return best;
}

double AdaptiveSelector::compute_A(std::span<const double> h) {
  const std::size_t idx = grid_->find(h);
  if (idx == CandidateGrid::npos)
    throw ConfigError("compute_A: bandwidth is not a grid member");
  return compute_A(idx);
}

SelectionResult AdaptiveSelector::select() {
  SelectionResult result;
  result.table.resize(grid_->size());
  std::size_t best = 0;
  double best_av = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid_->size(); ++i) {
    MemberScore& row = result.table[i];
    row.h = grid_->members[i];
    row.V = V_[i];
    row.A = compute_A(i);
    row.AV = row.A + row.V;
    if (row.AV < best_av) {
      best_av = row.AV;
      best = i;
    }
  }
  result.argmin_index = best;
  result.h_tilde = grid_->members[best];
  result.tie_break_note =
      "ties resolved to the first minimizer in lexicographic (z_1..z_d) order";
  return result;
}

double compute_A(std::span<const double> h, const PathGrid& path,
                 const Kernel1D& K, const CandidateGrid& grid,
                 const EvalRegion& region, double k_penalty) {
  AdaptiveSelector selector(path, K, grid, region, k_penalty);
  return selector.compute_A(h);
}

SelectionResult select_bandwidth(const PathGrid& path, const Kernel1D& K,
                                 const CandidateGrid& grid,
                                 const EvalRegion& region, double k_penalty) {
  AdaptiveSelector selector(path, K, grid, region, k_penalty);
  return selector.select();
}

}  // namespace ergodens
