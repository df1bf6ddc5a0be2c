#include "ergodens/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ergodens/errors.hpp"
#include "ergodens/parallel.hpp"
#include "ergodens/quadrature.hpp"

namespace ergodens {

void EvalRegion::validate() const {
  if (lo.size() != hi.size() || lo.size() != nodes.size() || lo.empty())
    throw ConfigError("evaluation region: mismatched axis descriptions");
  for (int j = 0; j < dim(); ++j) {
    if (!(lo[j] < hi[j])) throw ConfigError("evaluation region: need lo < hi");
    if (nodes[j] < 2) throw ConfigError("evaluation region: need >= 2 nodes");
  }
}

std::int64_t EvalRegion::total_nodes() const {
  std::int64_t n = 1;
  for (int c : nodes) n *= c;
  return n;
}

EvalRegion EvalRegion::centered_box(int d, double half, double max_spacing) {
  if (d < 1 || !(half > 0.0) || !(max_spacing > 0.0))
    throw ConfigError("centered_box: bad parameters");
  const int cells = std::max(2, static_cast<int>(std::ceil(2.0 * half / max_spacing)));
  EvalRegion r;
  r.lo.assign(d, -half);
  r.hi.assign(d, half);
  r.nodes.assign(d, cells + 1);
  return r;
}

EvalRegion EvalRegion::enlarged() const {
  validate();
  const double margin = 2.0 * std::sqrt(static_cast<double>(dim()));
  EvalRegion big = *this;
  for (int j = 0; j < dim(); ++j) {
    const double sp = spacing(j);
    const int extra = static_cast<int>(std::ceil(margin / sp));
    big.lo[j] = lo[j] - extra * sp;
    big.hi[j] = hi[j] + extra * sp;
    big.nodes[j] = nodes[j] + 2 * extra;
  }
  return big;
}

void EvalRegion::require_resolves(std::span<const double> h) const {
  validate();
  if (static_cast<int>(h.size()) != dim())
    throw ConfigError("bandwidth dimension does not match the region");
  for (int j = 0; j < dim(); ++j)
    if (spacing(j) > h[j] / 4.0 * (1.0 + 1e-12))
      throw ConfigError("region grid too coarse: need spacing <= h/4 on axis " +
                        std::to_string(j + 1));
}

double EvalRegion::quad_weight(std::int64_t idx) const {
  double w = 1.0;
  for (int j = dim() - 1; j >= 0; --j) {
    const int i = static_cast<int>(idx % nodes[j]);
    idx /= nodes[j];
    const double edge = (i == 0 || i == nodes[j] - 1) ? 0.5 : 1.0;
    w *= edge * spacing(j);
  }
  return w;
}

double kde_pointwise(const PathGrid& path, const Kernel1D& K,
                     std::span<const double> h, std::span<const double> x) {
  const int d = path.d;
  if (static_cast<int>(h.size()) != d || static_cast<int>(x.size()) != d)
    throw ConfigError("kde_pointwise: dimension mismatch");
  for (double hl : h)
    if (!(hl > 0.0 && hl < 1.0))
      throw ConfigError("kde_pointwise: bandwidths must lie in (0,1)");
  const std::int64_t n = path.n_steps();
  if (n == 0) throw ConfigError("kde_pointwise: empty path");
  double inv_h_prod = 1.0;
  for (double hl : h) inv_h_prod /= hl;
  double acc = 0.0;
  const double* s = path.states.data();
  for (std::int64_t k = 0; k < n; ++k, s += d) {
    double prod = 1.0;
    for (int j = 0; j < d; ++j) {
      const double u = (x[j] - s[j]) / h[j];
      if (u < -1.0 || u > 1.0) {
        prod = 0.0;
        break;
      }
      prod *= K(u);
    }
    acc += prod;
  }
  // (1/T) sum K_h dt with T = n dt reduces to the plain average over steps.
  return acc * inv_h_prod / static_cast<double>(n);
}

double kde_convolved(const PathGrid& path,
                     std::span<const ConvolvedKernel1D> axes,
                     std::span<const double> x) {
  const int d = path.d;
  if (static_cast<int>(axes.size()) != d || static_cast<int>(x.size()) != d)
    throw ConfigError("kde_convolved: dimension mismatch");
  const std::int64_t n = path.n_steps();
  if (n == 0) throw ConfigError("kde_convolved: empty path");
  double acc = 0.0;
  const double* s = path.states.data();
  for (std::int64_t k = 0; k < n; ++k, s += d) {
    double prod = 1.0;
    for (int j = 0; j < d; ++j) {
      const double t = s[j] - x[j];
      if (t <= -axes[j].support() || t >= axes[j].support()) {
        prod = 0.0;
        break;
      }
      prod *= axes[j](t);
    }
    acc += prod;
  }
  return acc / static_cast<double>(n);
}

double kde_convolved(const PathGrid& path, const Kernel1D& K,
                     std::span<const double> h, std::span<const double> eta,
                     std::span<const double> x) {
  const int d = path.d;
  if (static_cast<int>(h.size()) != d || static_cast<int>(eta.size()) != d)
    throw ConfigError("kde_convolved: dimension mismatch");
  std::vector<ConvolvedKernel1D> axes;
  axes.reserve(d);
  for (int j = 0; j < d; ++j) axes.emplace_back(K, h[j], eta[j]);
  return kde_convolved(path, axes, x);
}

double l2_norm_sq_on_region(
    const std::function<double(std::span<const double>)>& f,
    const EvalRegion& region) {
  region.validate();
  const int d = region.dim();
  std::vector<int> idx(d, 0);
  std::vector<double> x(d);
  for (int j = 0; j < d; ++j) x[j] = region.node_coord(j, 0);
  double acc = 0.0;
  const std::int64_t total = region.total_nodes();
  for (std::int64_t flat = 0; flat < total; ++flat) {
    const double v = f(x);
    acc += region.quad_weight(flat) * v * v;
    for (int j = d - 1; j >= 0; --j) {
      if (++idx[j] < region.nodes[j]) {
        x[j] = region.node_coord(j, idx[j]);
        break;
      }
      idx[j] = 0;
      x[j] = region.node_coord(j, 0);
    }
  }
  return acc;
}

double l2_norm_sq_on_region(std::span<const double> grid_values,
                            const EvalRegion& region) {
  region.validate();
  if (static_cast<std::int64_t>(grid_values.size()) != region.total_nodes())
    throw ConfigError("grid values do not match the region node count");
  double acc = 0.0;
  for (std::int64_t i = 0; i < region.total_nodes(); ++i)
    acc += region.quad_weight(i) * grid_values[i] * grid_values[i];
  return acc;
}

double l2_distance_sq_on_region(std::span<const double> a,
                                std::span<const double> b,
                                const EvalRegion& region) {
  region.validate();
  if (a.size() != b.size() ||
      static_cast<std::int64_t>(a.size()) != region.total_nodes())
    throw ConfigError("grid values do not match the region node count");
  double acc = 0.0;
  for (std::int64_t i = 0; i < region.total_nodes(); ++i) {
    const double dvi = a[i] - b[i];
    acc += region.quad_weight(i) * dvi * dvi;
  }
  return acc;
}

// ---------------------------------------------------------------------------
// GridEstimator

GridEstimator::GridEstimator(const PathGrid& path, const EvalRegion& region,
                             std::vector<double> max_support, int threads)
    : region_(region), d_(region.dim()), threads_(threads) {
  region_.validate();
  if (path.d != d_) throw ConfigError("path dimension does not match region");
  if (static_cast<int>(max_support.size()) != d_)
    throw ConfigError("max_support needs one entry per axis");

  pad_.resize(d_);
  pn_.resize(d_);
  plo_.resize(d_);
  sp_.resize(d_);
  std::int64_t total = 1;
  for (int j = 0; j < d_; ++j) {
    sp_[j] = region_.spacing(j);
    pad_[j] = static_cast<int>(std::ceil(max_support[j] / sp_[j])) + 2;
    pn_[j] = region_.nodes[j] + 2 * pad_[j];
    plo_[j] = region_.lo[j] - pad_[j] * sp_[j];
    total *= pn_[j];
  }
  if (total > (std::int64_t{1} << 31))
    throw ConfigError("grid estimator: padded grid exceeds 2^31 nodes");
  bins_.assign(total, 0.0);

  // Linear binning: each step deposits weight 1/n split multilinearly onto
  // its 2^d neighbor nodes. Sequential pass for reproducibility.
  const std::int64_t n = path.n_steps();
  if (n == 0) throw ConfigError("grid estimator: empty path");
  const double w_step = 1.0 / static_cast<double>(n);
  std::vector<std::int64_t> stride(d_);
  stride[d_ - 1] = 1;
  for (int j = d_ - 2; j >= 0; --j) stride[j] = stride[j + 1] * pn_[j + 1];
  std::vector<int> base(d_);
  std::vector<double> frac(d_);
  const double* s = path.states.data();
  for (std::int64_t k = 0; k < n; ++k, s += d_) {
    bool inside = true;
    for (int j = 0; j < d_; ++j) {
      const double pos = (s[j] - plo_[j]) / sp_[j];
      const double fl = std::floor(pos);
      base[j] = static_cast<int>(fl);
      frac[j] = pos - fl;
      if (base[j] < 0 || base[j] + 1 >= pn_[j]) {
        inside = false;
        break;
      }
    }
    if (!inside) continue;  // out of kernel reach of the region
    for (int corner = 0; corner < (1 << d_); ++corner) {
      double w = w_step;
      std::int64_t flat = 0;
      for (int j = 0; j < d_; ++j) {
        const int hi_bit = (corner >> j) & 1;
        w *= hi_bit ? frac[j] : 1.0 - frac[j];
        flat += (base[j] + hi_bit) * stride[j];
      }
      bins_[flat] += w;
    }
    binned_mass_ += w_step;
  }
}

namespace {

// Cell-averaged taps of a kernel profile given its exact cell integrals:
// tap t = (1/sp) * integral of the profile over [(t-1/2)sp, (t+1/2)sp].
template <typename IntegralFn>
std::vector<double> cell_taps(double support, double sp, IntegralFn integral,
                              int& half_width) {
  half_width = static_cast<int>(std::floor(support / sp + 0.5));
  std::vector<double> taps(2 * half_width + 1);
  for (int t = -half_width; t <= half_width; ++t)
    taps[t + half_width] = integral((t - 0.5) * sp, (t + 0.5) * sp) / sp;
  return taps;
}

}  // namespace

std::vector<double> GridEstimator::run_passes(
    std::vector<double> field,
    const std::vector<std::vector<double>>& taps) const {
  std::vector<double> cur = std::move(field);
  std::vector<double> next(cur.size());
  for (int axis = 0; axis < d_; ++axis) {
    const int nj = pn_[axis];
    const int m = (static_cast<int>(taps[axis].size()) - 1) / 2;
    const double* w = taps[axis].data() + m;
    std::int64_t inner = 1;
    for (int k = axis + 1; k < d_; ++k) inner *= pn_[k];
    std::int64_t outer = 1;
    for (int k = 0; k < axis; ++k) outer *= pn_[k];
    const double* src = cur.data();
    double* dst = next.data();
    parallel_for(
        outer,
        [&](std::int64_t ob, std::int64_t oe) {
          for (std::int64_t o = ob; o < oe; ++o) {
            const double* src_o = src + o * nj * inner;
            double* dst_o = dst + o * nj * inner;
            for (int i = 0; i < nj; ++i) {
              const int t_lo = std::max(-m, -i);
              const int t_hi = std::min(m, nj - 1 - i);
              double* out_row = dst_o + static_cast<std::int64_t>(i) * inner;
              std::fill(out_row, out_row + inner, 0.0);
              for (int t = t_lo; t <= t_hi; ++t) {
                const double wt = w[t];
                if (wt == 0.0) continue;
                const double* in_row =
                    src_o + static_cast<std::int64_t>(i + t) * inner;
                for (std::int64_t c = 0; c < inner; ++c)
                  out_row[c] += wt * in_row[c];
              }
            }
          }
        },
        threads_);
    std::swap(cur, next);
  }
  return cur;
}

std::vector<double> GridEstimator::extract(
    const std::vector<double>& field) const {
  if (field.size() != bins_.size())
    throw ConfigError("grid extract: field size does not match the padding");
  std::vector<double> out(region_.total_nodes());
  std::vector<int> idx(d_, 0);
  for (std::int64_t flat = 0; flat < region_.total_nodes(); ++flat) {
    std::int64_t padded = 0;
    for (int j = 0; j < d_; ++j)
      padded = padded * pn_[j] + (idx[j] + pad_[j]);
    out[flat] = field[padded];
    for (int j = d_ - 1; j >= 0; --j) {
      if (++idx[j] < region_.nodes[j]) break;
      idx[j] = 0;
    }
  }
  return out;
}

std::vector<std::vector<double>> GridEstimator::taps_for(
    const Kernel1D& K, std::span<const double> h) const {
  if (static_cast<int>(h.size()) != d_)
    throw ConfigError("grid density: bandwidth dimension mismatch");
  region_.require_resolves(h);
  std::vector<std::vector<double>> taps(d_);
  for (int j = 0; j < d_; ++j) {
    const double hj = h[j];
    if (!(hj > 0.0 && hj < 1.0))
      throw ConfigError("grid density: bandwidths must lie in (0,1)");
    if (static_cast<int>(std::ceil(hj / sp_[j])) + 1 > pad_[j])
      throw ConfigError("grid density: bandwidth exceeds the binned padding");
    int m = 0;
    taps[j] = cell_taps(
        hj, sp_[j],
        [&](double a, double b) { return K.integral(a / hj, b / hj); }, m);
  }
  return taps;
}

std::vector<double> GridEstimator::padded_field(
    const Kernel1D& K, std::span<const double> h) const {
  return run_passes(bins_, taps_for(K, h));
}

std::vector<double> GridEstimator::smooth_field(
    const std::vector<double>& field, const Kernel1D& K,
    std::span<const double> h) const {
  if (field.size() != bins_.size())
    throw ConfigError("smooth_field: field size does not match the padding");
  return extract(run_passes(field, taps_for(K, h)));
}

std::vector<double> GridEstimator::density(const Kernel1D& K,
                                           std::span<const double> h) const {
  return extract(padded_field(K, h));
}

std::vector<double> GridEstimator::density_convolved(
    const Kernel1D& K, std::span<const double> h,
    std::span<const double> eta) const {
  return smooth_field(padded_field(K, eta), K, h);
}

// ---------------------------------------------------------------------------
// bias_proxy

namespace {

// (K_h * f)(x) for a scalar profile f, by 32-node Gauss-Legendre over the
// kernel support.
double smooth_axis(const Kernel1D& K, double h, double x,
                   const std::function<double(double)>& f) {
  const GaussLegendre& rule = gauss_legendre(32);
  double acc = 0.0;
  for (std::size_t g = 0; g < rule.nodes.size(); ++g)
    acc += rule.weights[g] * K(rule.nodes[g]) * f(x - h * rule.nodes[g]);
  return acc;
}

}  // namespace

double bias_proxy(const AnalyticModel& model, const Kernel1D& K,
                  std::span<const double> h, const EvalRegion& region) {
  const int d = model.dim();
  if (region.dim() != d || static_cast<int>(h.size()) != d)
    throw ConfigError("bias_proxy: dimension mismatch");
  const EvalRegion big = region.enlarged();

  if (model.separable()) {
    // Per-axis smoothed and exact profiles; the squared difference of the
    // two products is then accumulated node by node, which keeps the tiny
    // bias resolvable (no large-term cancellation).
    std::vector<std::vector<double>> smoothed(d), exact(d);
    for (int j = 0; j < d; ++j) {
      const int nj = big.nodes[j];
      smoothed[j].resize(nj);
      exact[j].resize(nj);
      for (int i = 0; i < nj; ++i) {
        const double x = big.node_coord(j, i);
        smoothed[j][i] = smooth_axis(
            K, h[j], x, [&](double t) { return model.axis_density(j, t); });
        exact[j][i] = model.axis_density(j, x);
      }
    }
    std::vector<int> idx(d, 0);
    double acc = 0.0;
    for (std::int64_t flat = 0; flat < big.total_nodes(); ++flat) {
      double pa = 1.0, pb = 1.0;
      for (int j = 0; j < d; ++j) {
        pa *= smoothed[j][idx[j]];
        pb *= exact[j][idx[j]];
      }
      const double diff = pa - pb;
      acc += big.quad_weight(flat) * diff * diff;
      for (int j = d - 1; j >= 0; --j) {
        if (++idx[j] < big.nodes[j]) break;
        idx[j] = 0;
      }
    }
    return acc;
  }

  // General route: tensor Gauss-Legendre over the kernel support per node.
  const GaussLegendre& rule = gauss_legendre(32);
  const int gl_n = static_cast<int>(rule.nodes.size());
  auto smoothed_at = [&](std::span<const double> x) {
    std::vector<int> gi(d, 0);
    std::vector<double> y(d);
    double acc = 0.0;
    std::int64_t cells = 1;
    for (int j = 0; j < d; ++j) cells *= gl_n;
    for (std::int64_t c = 0; c < cells; ++c) {
      double w = 1.0;
      for (int j = 0; j < d; ++j) {
        w *= rule.weights[gi[j]] * K(rule.nodes[gi[j]]);
        y[j] = x[j] - h[j] * rule.nodes[gi[j]];
      }
      acc += w * model.density(y);
      for (int j = d - 1; j >= 0; --j) {
        if (++gi[j] < gl_n) break;
        gi[j] = 0;
      }
    }
    return acc;
  };
  return l2_norm_sq_on_region(
      [&](std::span<const double> x) {
        return smoothed_at(x) - model.density(x);
      },
      big);
}

}  // namespace ergodens
