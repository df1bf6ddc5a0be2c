#include "ergodens/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "ergodens/errors.hpp"
#include "ergodens/quadrature.hpp"

namespace ergodens {

namespace {

double horner(const std::vector<double>& c, double x) {
  double v = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) v = v * x + c[i];
  return v;
}

}  // namespace

double Kernel1D::operator()(double x) const {
  if (x < -1.0 || x > 1.0) return 0.0;
  return horner(coeffs_, x);
}

double Kernel1D::integral(double a, double b) const {
  a = std::clamp(a, -1.0, 1.0);
  b = std::clamp(b, -1.0, 1.0);
  if (b <= a) return 0.0;
  auto antideriv = [this](double x) {
    double v = 0.0;
    for (std::size_t i = coeffs_.size(); i-- > 0;)
      v = v * x + coeffs_[i] / static_cast<double>(i + 1);
    return v * x;
  };
  return antideriv(b) - antideriv(a);
}

Kernel1D make_order_kernel(int M) {
  if (M < 0) throw ConfigError("kernel order must be nonnegative");
  if (M > 15)
    throw UnsupportedOrderError("kernel order " + std::to_string(M) +
                                " exceeds the supported maximum 15");
  // Legendre polynomials in the monomial basis via the three-term recurrence.
  std::vector<std::vector<double>> P;
  P.push_back({1.0});
  if (M >= 1) P.push_back({0.0, 1.0});
  for (int m = 1; m + 1 <= M; ++m) {
    std::vector<double> next(m + 2, 0.0);
    for (std::size_t i = 0; i < P[m].size(); ++i)
      next[i + 1] += (2.0 * m + 1.0) * P[m][i] / (m + 1.0);
    for (std::size_t i = 0; i < P[m - 1].size(); ++i)
      next[i] -= m * P[m - 1][i] / (m + 1.0);
    P.push_back(std::move(next));
  }
  Kernel1D K;
  K.order_ = M;
  K.coeffs_.assign(static_cast<std::size_t>(M) + 1, 0.0);
  for (int m = 0; m <= M; m += 2) {
    const double pm0 = P[m][0];  // P_m(0)
    const double scale = (2.0 * m + 1.0) / 2.0 * pm0;
    for (std::size_t i = 0; i < P[m].size(); ++i)
      K.coeffs_[i] += scale * P[m][i];
  }
  double sup = 0.0;
  for (int i = 0; i <= 4096; ++i) {
    const double x = -1.0 + 2.0 * i / 4096.0;
    sup = std::max(sup, std::abs(horner(K.coeffs_, x)));
  }
  K.sup_norm_ = sup;
  return K;
}

namespace {

// B(z) = exp(1 - 1/(1-z^2)), the normalized C-infinity bump with B(0) = 1.
struct BumpEval {
  double b, b1, b2;
};

BumpEval bump_base(double z) {
  const double w = 1.0 - z * z;
  if (w <= 1e-12) return {0.0, 0.0, 0.0};
  const double phi = 1.0 - 1.0 / w;
  const double b = std::exp(phi);
  const double phi1 = -2.0 * z / (w * w);
  const double phi2 = (-2.0 - 6.0 * z * z) / (w * w * w);
  return {b, phi1 * b, (phi2 + phi1 * phi1) * b};
}

}  // namespace

BumpKernel1D::BumpKernel1D() {
  const double ib = adaptive_quadrature(
      [](double z) { return bump_base(z).b; }, -1.0, 1.0, 1e-14);
  const double iz2b = adaptive_quadrature(
      [](double z) { return z * z * bump_base(z).b; }, -1.0, 1.0, 1e-14);
  c_ = ib / iz2b;
  double sup = 0.0;
  for (int i = 0; i <= 4096; ++i) {
    const double z = -1.0 + 2.0 * i / 4096.0;
    sup = std::max(sup, std::abs((*this)(z)));
  }
  sup_norm_ = sup;
}

double BumpKernel1D::operator()(double z) const {
  if (z <= -1.0 || z >= 1.0) return 0.0;
  return (1.0 - c_ * z * z) * bump_base(z).b;
}

double BumpKernel1D::d1(double z) const {
  if (z <= -1.0 || z >= 1.0) return 0.0;
  const BumpEval e = bump_base(z);
  return -2.0 * c_ * z * e.b + (1.0 - c_ * z * z) * e.b1;
}

double BumpKernel1D::d2(double z) const {
  if (z <= -1.0 || z >= 1.0) return 0.0;
  const BumpEval e = bump_base(z);
  return -2.0 * c_ * e.b - 4.0 * c_ * z * e.b1 + (1.0 - c_ * z * z) * e.b2;
}

BumpKernel1D make_bump_kernel() { return BumpKernel1D(); }

ProductKernel::ProductKernel(std::vector<Kernel1D> axis_kernels,
                             std::vector<double> h)
    : kernels_(std::move(axis_kernels)), h_(std::move(h)) {
  if (kernels_.size() != h_.size())
    throw ConfigError("product kernel: axis count mismatch");
  for (double hm : h_)
    if (!(hm > 0.0 && hm < 1.0))
      throw ConfigError("product kernel bandwidths must lie in (0,1)");
}

ProductKernel::ProductKernel(const Kernel1D& shared, std::vector<double> h)
    : kernels_(h.size(), shared), h_(std::move(h)) {
  for (double hm : h_)
    if (!(hm > 0.0 && hm < 1.0))
      throw ConfigError("product kernel bandwidths must lie in (0,1)");
}

double ProductKernel::eval(std::span<const double> x,
                           std::span<const double> center) const {
  double prod = 1.0;
  for (std::size_t m = 0; m < h_.size(); ++m) {
    const double u = (center[m] - x[m]) / h_[m];
    if (u < -1.0 || u > 1.0) return 0.0;
    prod *= kernels_[m](u) / h_[m];
  }
  return prod;
}

double eval_product(const ProductKernel& K, std::span<const double> x,
                    std::span<const double> center) {
  return K.eval(x, center);
}

ConvolvedKernel1D::ConvolvedKernel1D(const Kernel1D& K, double h, double eta,
                                     int nodes) {
  if (!(h > 0.0 && h < 1.0 && eta > 0.0 && eta < 1.0))
    throw ConfigError("convolve_axis bandwidths must lie in (0,1)");
  if (nodes < 2) throw ConfigError("convolution table needs >= 2 nodes");
  // Canonical bandwidth order: (K_h * K_eta)(t) and (K_eta * K_h)(t) run the
  // identical computation.
  const double a = std::min(h, eta);
  const double b = std::max(h, eta);
  support_ = a + b;
  spacing_ = 2.0 * support_ / (nodes - 1);
  table_.resize(nodes);
  // (K_a * K_b)(t) = int (1/a)K(u/a) (1/b)K((t-u)/b) du over the support
  // overlap. The integrand is a polynomial there, so a 16-node rule is exact
  // for orders up to 15.
  const int gl_n = 16;
  const GaussLegendre& rule = gauss_legendre(gl_n);
  for (int i = 0; i < nodes; ++i) {
    const double t = -support_ + i * spacing_;
    const double lo = std::max(-a, t - b);
    const double hi = std::min(a, t + b);
    if (hi <= lo) {
      table_[i] = 0.0;
      continue;
    }
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    double sum = 0.0;
    for (int g = 0; g < gl_n; ++g) {
      const double u = mid + half * rule.nodes[g];
      sum += rule.weights[g] * K(u / a) * K((t - u) / b);
    }
    table_[i] = half * sum / (a * b);
  }
}

double ConvolvedKernel1D::operator()(double t) const {
  if (t <= -support_ || t >= support_) return 0.0;
  const double pos = (t + support_) / spacing_;
  const auto i = static_cast<std::size_t>(pos);
  if (i + 1 >= table_.size()) return table_.back();
  const double frac = pos - static_cast<double>(i);
  return table_[i] * (1.0 - frac) + table_[i + 1] * frac;
}

double ConvolvedKernel1D::integral(double a, double b) const {
  a = std::clamp(a, -support_, support_);
  b = std::clamp(b, -support_, support_);
  if (b <= a) return 0.0;
  // Exact integral of the piecewise linear interpolant.
  auto value = [this](double t) { return (*this)(t); };
  const double start = (a + support_) / spacing_;
  const double stop = (b + support_) / spacing_;
  std::size_t seg = static_cast<std::size_t>(start);
  double total = 0.0;
  double t0 = a;
  while (t0 < b) {
    const double seg_end = -support_ + (seg + 1) * spacing_;
    const double t1 = std::min(b, seg_end);
    total += 0.5 * (value(t0) + value(t1)) * (t1 - t0);
    t0 = t1;
    ++seg;
    if (seg + 1 >= table_.size() && t0 < b) {
      total += 0.5 * (value(t0) + value(b)) * (b - t0);
      break;
    }
  }
  (void)stop;
  return total;
}

ConvolvedKernel1D convolve_axis(const Kernel1D& K, double h, double eta) {
  return ConvolvedKernel1D(K, h, eta);
}

}  // namespace ergodens
