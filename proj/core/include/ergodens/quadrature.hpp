#pragma once

#include <functional>
#include <span>
#include <vector>

namespace ergodens {

/// Gauss-Legendre rule on [-1,1]; nodes/weights cached per order.
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};

const GaussLegendre& gauss_legendre(int n);

/// Integrate f over [a,b] with an n-point Gauss-Legendre rule.
double gl_integrate(const std::function<double(double)>& f, double a, double b,
                    int n);

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
double adaptive_quadrature(const std::function<double(double)>& f, double a,
                           double b, double tol = 1e-12, int max_depth = 40);

/// Ordinary least squares line fit y = intercept + slope * x.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rss = 0.0;
};

LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// Intercept-only fit of y - fixed_part: y_i = intercept + fixed_part_i.
LineFit fit_intercept(std::span<const double> fixed_part,
                      std::span<const double> y);

}  // namespace ergodens
