#include "ergodens/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "ergodens/errors.hpp"

namespace ergodens {

namespace {

GaussLegendre compute_gl(int n) {
  GaussLegendre rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  // Newton iteration from the Chebyshev-like initial guess.
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.weights[i] = w;
    rule.nodes[n - 1 - i] = x;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

}  // namespace

const GaussLegendre& gauss_legendre(int n) {
  if (n < 1) throw ConfigError("Gauss-Legendre order must be >= 1");
  static std::map<int, GaussLegendre> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gl(n)).first;
  return it->second;
}

double gl_integrate(const std::function<double(double)>& f, double a, double b,
                    int n) {
  const GaussLegendre& rule = gauss_legendre(n);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double sum = 0.0;
  for (int i = 0; i < n; ++i)
    sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return half * sum;
}

namespace {

double simpson(const std::function<double(double)>& f, double a, double fa,
               double b, double fb, double m, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_step(const std::function<double(double)>& f, double a,
                     double fa, double b, double fb, double m, double fm,
                     double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson(f, a, fa, m, fm, lm, flm);
  const double right = simpson(f, m, fm, b, fb, rm, frm);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adaptive_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         adaptive_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_quadrature(const std::function<double(double)>& f, double a,
                           double b, double tol, int max_depth) {
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fm = f(m);
  const double whole = simpson(f, a, fa, b, fb, m, fm);
  return adaptive_step(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw DataError("fit_line needs >= 2 matched points");
  const std::size_t n = x.size();
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw DataError("fit_line: degenerate abscissae");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    fit.rss += r * r;
  }
  return fit;
}

LineFit fit_intercept(std::span<const double> fixed_part,
                      std::span<const double> y) {
  if (fixed_part.size() != y.size() || y.empty())
    throw DataError("fit_intercept needs matched nonempty inputs");
  const std::size_t n = y.size();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += y[i] - fixed_part[i];
  LineFit fit;
  fit.slope = 0.0;
  fit.intercept = s / n;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - fixed_part[i] - fit.intercept;
    fit.rss += r * r;
  }
  return fit;
}

}  // namespace ergodens
