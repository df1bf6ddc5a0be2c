#pragma once

#include <span>
#include <vector>

namespace ergodens {

/// Compactly supported kernel on [-1,1]: an even polynomial whose moments
/// 1..M all vanish while the mass is 1. Evaluation returns exactly 0 outside
/// the support.
class Kernel1D {
public:
  double operator()(double x) const;

  int order() const { return order_; }
  double sup_norm() const { return sup_norm_; }
  const std::vector<double>& coefficients() const { return coeffs_; }

  /// Exact integral of K over [a,b] (support-clipped antiderivative).
  double integral(double a, double b) const;

  friend Kernel1D make_order_kernel(int M);

private:
  Kernel1D() = default;
  std::vector<double> coeffs_;  // monomial basis, even powers only
  int order_ = 0;
  double sup_norm_ = 0.0;
};

/// Builds the order-M kernel as the even Legendre projection kernel
/// sum_{m even, m<=M} (2m+1)/2 * P_m(0) * P_m(x). Deterministic coefficients;
/// M = 1 gives the uniform kernel 1/2.
Kernel1D make_order_kernel(int M);

/// Smooth compactly supported kernel with K(0) = 1 and zero mass: the bump
/// shape used by the lower-bound test densities.
/// K(z) = (1 - c z^2) B(z) with B(z) = exp(1 - 1/(1-z^2)) and c = intB/intz2B.
class BumpKernel1D {
public:
  BumpKernel1D();
  double operator()(double z) const;
  double d1(double z) const;
  double d2(double z) const;
  double shape_constant() const { return c_; }
  double sup_norm() const { return sup_norm_; }

private:
  double c_;
  double sup_norm_;
};

BumpKernel1D make_bump_kernel();

/// Anisotropic product kernel K_h(x) = prod_m (1/h_m) K(x_m / h_m).
class ProductKernel {
public:
  ProductKernel(std::vector<Kernel1D> axis_kernels, std::vector<double> h);
  ProductKernel(const Kernel1D& shared, std::vector<double> h);

  int dim() const { return static_cast<int>(h_.size()); }
  const std::vector<double>& bandwidths() const { return h_; }
  const Kernel1D& axis_kernel(int j) const { return kernels_[j]; }

  /// prod_m (1/h_m) K((center_m - x_m)/h_m), exact 0 outside the support box.
  double eval(std::span<const double> x, std::span<const double> center) const;

private:
  std::vector<Kernel1D> kernels_;
  std::vector<double> h_;
};

double eval_product(const ProductKernel& K, std::span<const double> x,
                    std::span<const double> center);

/// Tabulated axis convolution (K_h * K_eta)(t) on [-(h+eta), h+eta]:
/// 1024 uniformly spaced nodes, linear interpolation in between. The table is
/// always computed with the bandwidths in canonical (sorted) order, so
/// swapping h and eta reproduces it bit for bit.
class ConvolvedKernel1D {
public:
  ConvolvedKernel1D(const Kernel1D& K, double h, double eta, int nodes = 1024);

  double operator()(double t) const;
  double support() const { return support_; }
  double node_spacing() const { return spacing_; }
  const std::vector<double>& table() const { return table_; }

  /// Integral of the interpolated table over [a,b] (exact on the piecewise
  /// linear representation).
  double integral(double a, double b) const;

private:
  double support_;
  double spacing_;
  std::vector<double> table_;
};

ConvolvedKernel1D convolve_axis(const Kernel1D& K, double h, double eta);

}  // namespace ergodens
