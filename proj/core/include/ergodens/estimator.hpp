#pragma once

#include <functional>
#include <span>
#include <vector>

#include "ergodens/kernel.hpp"
#include "ergodens/model.hpp"
#include "ergodens/simulate.hpp"

namespace ergodens {

/// Compact evaluation box A with a tensor grid, plus the enlarged box used
/// for bias norms (margin 2 sqrt(d) per axis, spacing preserved).
struct EvalRegion {
  std::vector<double> lo;
  std::vector<double> hi;
  std::vector<int> nodes;

  int dim() const { return static_cast<int>(lo.size()); }
  void validate() const;
  double spacing(int j) const { return (hi[j] - lo[j]) / (nodes[j] - 1); }
  std::int64_t total_nodes() const;
  double node_coord(int j, int i) const { return lo[j] + i * spacing(j); }

  /// Uniform region over a centered box [-half, half]^d with spacing <= sp.
  static EvalRegion centered_box(int d, double half, double max_spacing);

  EvalRegion enlarged() const;

  /// Grid must resolve the bandwidths used against it: spacing <= h_l / 4.
  void require_resolves(std::span<const double> h) const;

  /// Tensor trapezoid weight of flat node index `idx`.
  double quad_weight(std::int64_t idx) const;
};

/// Invariant-density estimate at one point: left Riemann sum of the product
/// kernel along the path, (1/T) sum_k K_h(x - X_k) dt with support early-out.
double kde_pointwise(const PathGrid& path, const Kernel1D& K,
                     std::span<const double> h, std::span<const double> x);

/// Convolved-kernel variant: (1/T) sum_k prod_j (K_{h_j} * K_{eta_j})(X_k^j -
/// x_j) dt using tabulated per-axis convolutions. Symmetric in (h, eta).
double kde_convolved(const PathGrid& path, const Kernel1D& K,
                     std::span<const double> h, std::span<const double> eta,
                     std::span<const double> x);
double kde_convolved(const PathGrid& path,
                     std::span<const ConvolvedKernel1D> axes,
                     std::span<const double> x);

/// Tensor trapezoid of f^2 over the region box.
double l2_norm_sq_on_region(
    const std::function<double(std::span<const double>)>& f,
    const EvalRegion& region);
double l2_norm_sq_on_region(std::span<const double> grid_values,
                            const EvalRegion& region);
/// || a - b ||^2 over the region for two grids of node values.
double l2_distance_sq_on_region(std::span<const double> a,
                                std::span<const double> b,
                                const EvalRegion& region);

/// Grid-evaluation engine: the path is linearly binned once onto the region
/// grid padded by the maximum kernel reach, and estimates are separable
/// discrete convolutions of the bins with cell-averaged kernel taps. This is
/// the standard fast path for kernel estimates over tensor grids; values
/// agree with the per-point definition up to the kernel-sampling resolution
/// (spacing <= h/4), and the deposited mass is conserved exactly.
class GridEstimator {
public:
  GridEstimator(const PathGrid& path, const EvalRegion& region,
                std::vector<double> max_support, int threads = 0);

  const EvalRegion& region() const { return region_; }
  /// Total binned weight; below 1 when the path leaves the padded box.
  double binned_mass() const { return binned_mass_; }

  std::vector<double> density(const Kernel1D& K,
                              std::span<const double> h) const;
  /// Convolved-kernel estimate as the composition bins * K_eta * K_h; equal
  /// to smoothing the single-bandwidth field once more.
  std::vector<double> density_convolved(const Kernel1D& K,
                                        std::span<const double> h,
                                        std::span<const double> eta) const;

  /// Padded single-bandwidth field, reusable for several further smoothings.
  std::vector<double> padded_field(const Kernel1D& K,
                                   std::span<const double> h) const;
  /// Smooth an existing padded field by K_h and restrict to the region.
  std::vector<double> smooth_field(const std::vector<double>& field,
                                   const Kernel1D& K,
                                   std::span<const double> h) const;
  /// Region values of a padded field.
  std::vector<double> extract(const std::vector<double>& field) const;

private:
  std::vector<std::vector<double>> taps_for(const Kernel1D& K,
                                            std::span<const double> h) const;
  std::vector<double> run_passes(
      std::vector<double> field,
      const std::vector<std::vector<double>>& taps) const;

  EvalRegion region_;
  int d_;
  int threads_;
  std::vector<int> pad_;
  std::vector<int> pn_;
  std::vector<double> plo_;
  std::vector<double> sp_;
  std::vector<double> bins_;
  double binned_mass_ = 0.0;
};

/// Squared L2 distance || K_h * pi - pi ||^2 over the enlarged box: the bias
/// term of the estimator at bandwidth h, computed from the analytic density
/// by per-axis 32-node Gauss-Legendre quadrature over the kernel support.
/// Separable models use exact per-axis factorization; general models fall
/// back to a full tensor quadrature (meant for small grids).
double bias_proxy(const AnalyticModel& model, const Kernel1D& K,
                  std::span<const double> h, const EvalRegion& region);

}  // namespace ergodens
