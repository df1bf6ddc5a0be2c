#include "ergodens/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "ergodens/errors.hpp"
#include "ergodens/philox.hpp"
#include "ergodens/quadrature.hpp"
#include "ergodens/smooth.hpp"

namespace ergodens {

namespace {

std::string point_to_string(std::span<const double> x) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i) os << ", ";
    os << x[i];
  }
  os << ")";
  return os.str();
}

}  // namespace

void Box::validate() const {
  if (lo.size() != hi.size() || lo.empty())
    throw ConfigError("box bounds must be nonempty and matched");
  for (std::size_t j = 0; j < lo.size(); ++j)
    if (!(lo[j] < hi[j])) throw ConfigError("box must have lo < hi per axis");
}

void SmoothnessSpec::validate() const {
  if (beta.empty() || beta.size() != L.size())
    throw ConfigError("smoothness spec: beta and L must be nonempty and matched");
  for (double b : beta)
    if (!(b > 0.0)) throw ConfigError("smoothness exponents must be positive");
  for (double l : L)
    if (!(l > 0.0)) throw ConfigError("smoothness constants must be positive");
}

std::vector<int> SmoothnessSpec::sorted_order() const {
  std::vector<int> order(beta.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [this](int a, int b) { return beta[a] < beta[b]; });
  return order;
}

void CoefficientClassParams::validate() const {
  if (!(a_min > 0.0 && a_min <= a0))
    throw ConfigError("coefficient class: need 0 < a_min <= a0");
  if (!(a1 > 0.0 && b0 > 0.0 && b1 > 0.0 && C_tilde > 0.0 && rho_tilde > 0.0))
    throw ConfigError("coefficient class: all bounds must be positive");
}

void AnalyticModel::drift(std::span<const double> x,
                          std::span<double> out) const {
  const double pi = density(x);
  if (!(pi > 0.0))
    throw DomainError("drift undefined: density is not positive at " +
                      point_to_string(x));
  grad_density(x, out);
  for (auto& v : out) v /= 2.0 * pi;
}

double AnalyticModel::axis_density(int, double) const {
  throw ConfigError("model '" + id() + "' has no separable axis structure");
}

// ---------------------------------------------------------------------------
// GaussianProductModel

GaussianProductModel::GaussianProductModel(int d, double sigma2)
    : d_(d), sigma2_(sigma2) {
  if (d < 1) throw ConfigError("dimension must be >= 1");
  if (!(sigma2 > 0.0)) throw ConfigError("variance must be positive");
  axis_norm_ = 1.0 / std::sqrt(2.0 * std::numbers::pi * sigma2_);
}

std::string GaussianProductModel::id() const {
  std::ostringstream os;
  os << "gaussian(d=" << d_ << ",sigma2=" << sigma2_ << ")";
  return os.str();
}

double GaussianProductModel::density(std::span<const double> x) const {
  double s = 0.0;
  for (int j = 0; j < d_; ++j) s += x[j] * x[j];
  return std::pow(axis_norm_, d_) * std::exp(-0.5 * s / sigma2_);
}

void GaussianProductModel::grad_density(std::span<const double> x,
                                        std::span<double> out) const {
  const double pi = density(x);
  for (int j = 0; j < d_; ++j) out[j] = -x[j] / sigma2_ * pi;
}

double GaussianProductModel::laplacian_density(std::span<const double> x) const {
  const double pi = density(x);
  double acc = 0.0;
  for (int j = 0; j < d_; ++j)
    acc += x[j] * x[j] / (sigma2_ * sigma2_) - 1.0 / sigma2_;
  return acc * pi;
}

double GaussianProductModel::axis_density(int, double t) const {
  return axis_norm_ * std::exp(-0.5 * t * t / sigma2_);
}

// ---------------------------------------------------------------------------
// ProductExpDensity

namespace {

// f(eta |y|) with first and second y-derivatives.
D2 exp_axis_factor(double eta, double y) {
  const double u = eta * std::abs(y);
  const D2 f = exp_cutoff(u);
  D2 r;
  r.v = f.v;
  const double sgn = y >= 0.0 ? 1.0 : -1.0;
  r.d1 = f.d1 * eta * sgn;
  r.d2 = f.d2 * eta * eta;
  return r;
}

}  // namespace

ProductExpDensity::ProductExpDensity(double eta, int d) : eta_(eta), d_(d) {
  if (d < 1) throw ConfigError("dimension must be >= 1");
  if (!(eta > 0.0 && eta < 0.5))
    throw ConfigError("product-exp density needs eta in (0, 1/2)");
  // Per-axis mass: int f(eta|y|) dy over [-50/eta, 50/eta]; the truncated
  // tail is below e^{-50}/eta.
  const double axis_mass =
      2.0 / eta_ *
      adaptive_quadrature([](double u) { return exp_cutoff(u).v; }, 0.0, 50.0,
                          1e-13);
  c_axis_ = 1.0 / axis_mass;
}

std::string ProductExpDensity::id() const {
  std::ostringstream os;
  os << "product_exp(eta=" << eta_ << ",d=" << d_ << ")";
  return os.str();
}

double ProductExpDensity::density(std::span<const double> x) const {
  double prod = 1.0;
  for (int j = 0; j < d_; ++j)
    prod *= c_axis_ * exp_axis_factor(eta_, x[j]).v;
  return prod;
}

void ProductExpDensity::grad_density(std::span<const double> x,
                                     std::span<double> out) const {
  std::vector<D2> fac(d_);
  double prod = 1.0;
  for (int j = 0; j < d_; ++j) {
    fac[j] = exp_axis_factor(eta_, x[j]);
    prod *= c_axis_ * fac[j].v;
  }
  for (int j = 0; j < d_; ++j) out[j] = prod * fac[j].d1 / fac[j].v;
}

double ProductExpDensity::laplacian_density(std::span<const double> x) const {
  std::vector<D2> fac(d_);
  double prod = 1.0;
  for (int j = 0; j < d_; ++j) {
    fac[j] = exp_axis_factor(eta_, x[j]);
    prod *= c_axis_ * fac[j].v;
  }
  double acc = 0.0;
  for (int j = 0; j < d_; ++j) acc += fac[j].d2 / fac[j].v;
  return prod * acc;
}

double ProductExpDensity::axis_density(int, double t) const {
  return c_axis_ * exp_axis_factor(eta_, t).v;
}

// ---------------------------------------------------------------------------
// BumpedDensity

BumpedDensity::BumpedDensity(std::shared_ptr<const ProductExpDensity> base,
                             double M_T, std::vector<double> h,
                             std::vector<double> center)
    : base_(std::move(base)),
      M_T_(M_T),
      h_(std::move(h)),
      center_(std::move(center)) {
  if (!base_) throw ConfigError("bumped density needs a base density");
  const int d = base_->dim();
  if (static_cast<int>(h_.size()) != d || static_cast<int>(center_.size()) != d)
    throw ConfigError("bumped density: bandwidth/center dimension mismatch");
  if (!(M_T_ > 0.0)) throw ConfigError("bump inverse amplitude must be positive");
  for (double hl : h_)
    if (!(hl > 0.0 && hl < 1.0))
      throw ConfigError("bump bandwidths must lie in (0,1)");
}

int BumpedDensity::dim() const { return base_->dim(); }

std::string BumpedDensity::id() const {
  std::ostringstream os;
  os << "bumped(" << base_->id() << ",M_T=" << M_T_ << ")";
  return os.str();
}

double BumpedDensity::bump_term(std::span<const double> x) const {
  double prod = 1.0 / M_T_;
  for (int l = 0; l < dim(); ++l) {
    const double z = (x[l] - center_[l]) / h_[l];
    if (z <= -1.0 || z >= 1.0) return 0.0;
    prod *= bump_(z);
  }
  return prod;
}

double BumpedDensity::density(std::span<const double> x) const {
  return base_->density(x) + bump_term(x);
}

void BumpedDensity::grad_density(std::span<const double> x,
                                 std::span<double> out) const {
  base_->grad_density(x, out);
  const int d = dim();
  std::vector<double> k(d), k1(d);
  bool inside = true;
  for (int l = 0; l < d; ++l) {
    const double z = (x[l] - center_[l]) / h_[l];
    if (z <= -1.0 || z >= 1.0) {
      inside = false;
      break;
    }
    k[l] = bump_(z);
    k1[l] = bump_.d1(z);
  }
  if (!inside) return;
  for (int j = 0; j < d; ++j) {
    double term = k1[j] / (M_T_ * h_[j]);
    for (int l = 0; l < d; ++l)
      if (l != j) term *= k[l];
    out[j] += term;
  }
}

double BumpedDensity::laplacian_density(std::span<const double> x) const {
  double lap = base_->laplacian_density(x);
  const int d = dim();
  std::vector<double> k(d), k2(d);
  for (int l = 0; l < d; ++l) {
    const double z = (x[l] - center_[l]) / h_[l];
    if (z <= -1.0 || z >= 1.0) return lap;
    k[l] = bump_(z);
    k2[l] = bump_.d2(z);
  }
  for (int j = 0; j < d; ++j) {
    double term = k2[j] / (M_T_ * h_[j] * h_[j]);
    for (int l = 0; l < d; ++l)
      if (l != j) term *= k[l];
    lap += term;
  }
  return lap;
}

std::vector<double> BumpedDensity::holder_budget(
    const SmoothnessSpec& beta) const {
  beta.validate();
  if (beta.dim() != dim())
    throw ConfigError("holder budget: smoothness dimension mismatch");
  std::vector<double> ratio(dim());
  for (int l = 0; l < dim(); ++l)
    ratio[l] = 1.0 / (M_T_ * std::pow(h_[l], beta.beta[l]));
  return ratio;
}

// ---------------------------------------------------------------------------
// CylindricalModel glue

double CylindricalModel::density(std::span<const double> x) const {
  const double r = std::hypot(x[0], x[1]);
  return density_cyl(r, x.subspan(2));
}

void CylindricalModel::grad_density(std::span<const double> x,
                                    std::span<double> out) const {
  const double r = std::hypot(x[0], x[1]);
  const auto tail = x.subspan(2);
  double pr = 0.0;
  if (r > radial_flat_radius()) pr = d_r(r, tail);
  if (r > 0.0 && pr != 0.0) {
    out[0] = pr * x[0] / r;
    out[1] = pr * x[1] / r;
  } else {
    out[0] = 0.0;
    out[1] = 0.0;
  }
  for (int k = 2; k < dim(); ++k) out[k] = d_tail(k - 2, r, tail);
}

double CylindricalModel::laplacian_density(std::span<const double> x) const {
  const double r = std::hypot(x[0], x[1]);
  const auto tail = x.subspan(2);
  double lap = 0.0;
  // The radial factor is constant below the flat radius; there the planar
  // part of the Laplacian vanishes identically.
  if (r > radial_flat_radius()) lap += d2_r(r, tail) + d_r(r, tail) / r;
  for (int k = 2; k < dim(); ++k) lap += d2_tail(k - 2, r, tail);
  return lap;
}

// ---------------------------------------------------------------------------
// RadialExpDensity

namespace {

// exp(-eta psi(u)) with derivatives in u.
D2 radial_factor(double eta, double u) {
  const D2 p = tail_ramp(u);
  const double g = std::exp(-eta * p.v);
  D2 r;
  r.v = g;
  r.d1 = -eta * p.d1 * g;
  r.d2 = (eta * eta * p.d1 * p.d1 - eta * p.d2) * g;
  return r;
}

D2 radial_axis_factor(double eta, double z) {
  const D2 f = radial_factor(eta, std::abs(z));
  D2 r;
  r.v = f.v;
  r.d1 = f.d1 * (z >= 0.0 ? 1.0 : -1.0);
  r.d2 = f.d2;
  return r;
}

}  // namespace

RadialExpDensity::RadialExpDensity(double eta, int d) : eta_(eta), d_(d) {
  if (d < 2) throw ConfigError("radial density needs d >= 2");
  if (!(eta > 0.0 && eta < 0.5))
    throw ConfigError("radial density needs eta in (0, 1/2)");
  const double upper = 50.0 / eta_ + 1.0;
  const double radial_mass =
      2.0 * std::numbers::pi *
      adaptive_quadrature(
          [this](double r) { return radial_factor(eta_, r).v * r; }, 0.0,
          upper, 1e-13);
  double mass = radial_mass;
  if (d_ > 2) {
    const double axis_mass =
        2.0 * adaptive_quadrature(
                  [this](double u) { return radial_factor(eta_, u).v; }, 0.0,
                  upper, 1e-13);
    mass *= std::pow(axis_mass, d_ - 2);
  }
  c_ = 1.0 / mass;
}

std::string RadialExpDensity::id() const {
  std::ostringstream os;
  os << "radial_exp(eta=" << eta_ << ",d=" << d_ << ")";
  return os.str();
}

double RadialExpDensity::density_cyl(double r,
                                     std::span<const double> tail) const {
  double prod = c_ * radial_factor(eta_, r).v;
  for (double z : tail) prod *= radial_axis_factor(eta_, z).v;
  return prod;
}

double RadialExpDensity::d_r(double r, std::span<const double> tail) const {
  const D2 g = radial_factor(eta_, r);
  double prod = c_ * g.d1;
  for (double z : tail) prod *= radial_axis_factor(eta_, z).v;
  return prod;
}

double RadialExpDensity::d2_r(double r, std::span<const double> tail) const {
  const D2 g = radial_factor(eta_, r);
  double prod = c_ * g.d2;
  for (double z : tail) prod *= radial_axis_factor(eta_, z).v;
  return prod;
}

double RadialExpDensity::d_tail(int k, double r,
                                std::span<const double> tail) const {
  double prod = c_ * radial_factor(eta_, r).v;
  for (int i = 0; i < static_cast<int>(tail.size()); ++i) {
    const D2 f = radial_axis_factor(eta_, tail[i]);
    prod *= (i == k) ? f.d1 : f.v;
  }
  return prod;
}

double RadialExpDensity::d2_tail(int k, double r,
                                 std::span<const double> tail) const {
  double prod = c_ * radial_factor(eta_, r).v;
  for (int i = 0; i < static_cast<int>(tail.size()); ++i) {
    const D2 f = radial_axis_factor(eta_, tail[i]);
    prod *= (i == k) ? f.d2 : f.v;
  }
  return prod;
}

// ---------------------------------------------------------------------------
// Radial bump J

namespace {

void check_j_params(double r_min, double r_max) {
  if (!(r_min > 0.0 && r_min < r_max / 4.0))
    throw ConfigError("radial bump requires 0 < r_min < r_max/4");
}

double phi1_integral(double u) {
  // Phi_1(u) = int_u^1 phi(1-s) ds/s; integrand vanishes for s >= 3/4.
  const double hi = 0.75;
  if (u >= hi) return 0.0;
  return adaptive_quadrature(
      [](double s) { return annulus_ramp(1.0 - s) / s; }, u, hi, 1e-11);
}

double phi2_integral(double u) {
  // Phi_2(u) = int_u^{1/2} phi(s) ds/s; integrand vanishes for s <= 1/4.
  const double lo = std::max(u, 0.25);
  if (lo >= 0.5) return 0.0;
  return adaptive_quadrature([](double s) { return annulus_ramp(s) / s; }, lo,
                             0.5, 1e-11);
}

// Ramp profile w with J'(r) = -w(r) / (r ln(r_max/r_min)).
double j_ramp(double r, double r_min, double r_max) {
  if (r >= r_max) return 0.0;
  if (r >= r_max / 2.0) return annulus_ramp(1.0 - r / r_max);
  if (r >= r_min / 2.0) return 1.0;
  return annulus_ramp(r / r_min);
}

double j_ramp_d1(double r, double r_min, double r_max) {
  if (r >= r_max) return 0.0;
  if (r >= r_max / 2.0) return -annulus_ramp_d1(1.0 - r / r_max) / r_max;
  if (r >= r_min / 2.0) return 0.0;
  return annulus_ramp_d1(r / r_min) / r_min;
}

}  // namespace

double eval_J(double r, double r_min, double r_max) {
  check_j_params(r_min, r_max);
  if (r < 0.0) throw DomainError("radial bump evaluated at negative radius");
  if (r >= r_max) return 0.0;
  const double L = std::log(r_max / r_min);
  if (r >= r_max / 2.0) return phi1_integral(r / r_max) / L;
  if (r >= r_min / 2.0)
    return (phi1_integral(0.5) + std::log(r_max / (2.0 * r))) / L;
  return 1.0 + (phi1_integral(0.5) + phi2_integral(r / r_min)) / L;
}

double eval_J_d1(double r, double r_min, double r_max) {
  check_j_params(r_min, r_max);
  if (r <= r_min / 4.0 || r >= r_max) return 0.0;
  const double L = std::log(r_max / r_min);
  return -j_ramp(r, r_min, r_max) / (L * r);
}

double eval_J_d2(double r, double r_min, double r_max) {
  check_j_params(r_min, r_max);
  if (r <= r_min / 4.0 || r >= r_max) return 0.0;
  const double L = std::log(r_max / r_min);
  const double w = j_ramp(r, r_min, r_max);
  const double w1 = j_ramp_d1(r, r_min, r_max);
  return (w - r * w1) / (L * r * r);
}

// ---------------------------------------------------------------------------
// CylindricalBumpDensity

CylindricalBumpDensity::CylindricalBumpDensity(
    std::shared_ptr<const RadialExpDensity> base, double M_T, double r_min,
    double r_max, std::vector<double> h_tail)
    : base_(std::move(base)),
      M_T_(M_T),
      r_min_(r_min),
      r_max_(r_max),
      h_tail_(std::move(h_tail)) {
  if (!base_) throw ConfigError("cylindrical bump needs a base density");
  if (base_->dim() < 3)
    throw ConfigError("cylindrical bump density needs d >= 3");
  check_j_params(r_min_, r_max_);
  if (static_cast<int>(h_tail_.size()) != base_->dim() - 2)
    throw ConfigError("cylindrical bump: need one bandwidth per axis >= 3");
  double prev = r_max_;
  for (double h : h_tail_) {
    if (!(h >= prev) || !(h < 1.0))
      throw ConfigError(
          "cylindrical bump requires r_max <= h_3 <= ... <= h_d < 1");
    prev = h;
  }
  if (!(M_T_ > 0.0)) throw ConfigError("bump inverse amplitude must be positive");
}

int CylindricalBumpDensity::dim() const { return base_->dim(); }

std::string CylindricalBumpDensity::id() const {
  std::ostringstream os;
  os << "cylindrical_bump(" << base_->id() << ",M_T=" << M_T_
     << ",r_min=" << r_min_ << ",r_max=" << r_max_ << ")";
  return os.str();
}

double CylindricalBumpDensity::radial_flat_radius() const {
  return std::min(base_->radial_flat_radius(), r_min_ / 4.0);
}

double CylindricalBumpDensity::bump_value(double r,
                                          std::span<const double> tail) const {
  if (r >= r_max_) return 0.0;
  double prod = eval_J(r, r_min_, r_max_) / M_T_;
  if (prod == 0.0) return 0.0;
  for (std::size_t i = 0; i < tail.size(); ++i) {
    const double z = tail[i] / h_tail_[i];
    if (z <= -1.0 || z >= 1.0) return 0.0;
    prod *= bump_(z);
  }
  return prod;
}

double CylindricalBumpDensity::density_cyl(double r,
                                           std::span<const double> tail) const {
  return base_->density_cyl(r, tail) + bump_value(r, tail);
}

double CylindricalBumpDensity::d_r(double r,
                                   std::span<const double> tail) const {
  double v = base_->d_r(r, tail);
  if (r < r_max_) {
    double term = eval_J_d1(r, r_min_, r_max_) / M_T_;
    if (term != 0.0) {
      for (std::size_t i = 0; i < tail.size(); ++i) {
        const double z = tail[i] / h_tail_[i];
        if (z <= -1.0 || z >= 1.0) return v;
        term *= bump_(z);
      }
      v += term;
    }
  }
  return v;
}

double CylindricalBumpDensity::d2_r(double r,
                                    std::span<const double> tail) const {
  double v = base_->d2_r(r, tail);
  if (r < r_max_) {
    double term = eval_J_d2(r, r_min_, r_max_) / M_T_;
    if (term != 0.0) {
      for (std::size_t i = 0; i < tail.size(); ++i) {
        const double z = tail[i] / h_tail_[i];
        if (z <= -1.0 || z >= 1.0) return v;
        term *= bump_(z);
      }
      v += term;
    }
  }
  return v;
}

double CylindricalBumpDensity::d_tail(int k, double r,
                                      std::span<const double> tail) const {
  double v = base_->d_tail(k, r, tail);
  if (r >= r_max_) return v;
  double term = eval_J(r, r_min_, r_max_) / M_T_;
  if (term == 0.0) return v;
  for (int i = 0; i < static_cast<int>(tail.size()); ++i) {
    const double z = tail[i] / h_tail_[i];
    if (z <= -1.0 || z >= 1.0) return v;
    term *= (i == k) ? bump_.d1(z) / h_tail_[i] : bump_(z);
  }
  return v + term;
}

double CylindricalBumpDensity::d2_tail(int k, double r,
                                       std::span<const double> tail) const {
  double v = base_->d2_tail(k, r, tail);
  if (r >= r_max_) return v;
  double term = eval_J(r, r_min_, r_max_) / M_T_;
  if (term == 0.0) return v;
  for (int i = 0; i < static_cast<int>(tail.size()); ++i) {
    const double z = tail[i] / h_tail_[i];
    if (z <= -1.0 || z >= 1.0) return v;
    term *= (i == k) ? bump_.d2(z) / (h_tail_[i] * h_tail_[i]) : bump_(z);
  }
  return v + term;
}

std::vector<double> CylindricalBumpDensity::holder_budget(
    const SmoothnessSpec& beta) const {
  beta.validate();
  if (beta.dim() != dim())
    throw ConfigError("holder budget: smoothness dimension mismatch");
  const double L = std::log(r_max_ / r_min_);
  std::vector<double> ratio(dim());
  for (int l = 0; l < 2; ++l)
    ratio[l] = 1.0 / (M_T_ * std::pow(r_min_, beta.beta[l]) * L);
  for (int l = 2; l < dim(); ++l)
    ratio[l] = 1.0 / (M_T_ * std::pow(h_tail_[l - 2], beta.beta[l]));
  return ratio;
}

// ---------------------------------------------------------------------------
// LambdaModel

LambdaModel::LambdaModel(int d, std::string id, Scalar density, Vector grad,
                         Scalar laplacian, Vector drift)
    : d_(d),
      id_(std::move(id)),
      density_(std::move(density)),
      grad_(std::move(grad)),
      laplacian_(std::move(laplacian)),
      drift_(std::move(drift)) {
  if (d < 1) throw ConfigError("dimension must be >= 1");
  if (!density_) throw ConfigError("plug-in model needs a density");
}

double LambdaModel::density(std::span<const double> x) const {
  return density_(x);
}

void LambdaModel::grad_density(std::span<const double> x,
                               std::span<double> out) const {
  if (!grad_) throw ConfigError("plug-in model '" + id_ + "' has no gradient");
  grad_(x, out);
}

double LambdaModel::laplacian_density(std::span<const double> x) const {
  if (!laplacian_)
    throw ConfigError("plug-in model '" + id_ + "' has no laplacian");
  return laplacian_(x);
}

void LambdaModel::drift(std::span<const double> x,
                        std::span<double> out) const {
  if (drift_) {
    drift_(x, out);
    return;
  }
  AnalyticModel::drift(x, out);
}

// ---------------------------------------------------------------------------
// Operations

std::vector<double> drift_from_density(const AnalyticModel& model,
                                       std::span<const double> x) {
  const double pi = model.density(x);
  if (!(pi > 0.0))
    throw DomainError("drift_from_density: non-positive density at " +
                      point_to_string(x));
  std::vector<double> grad(model.dim());
  model.grad_density(x, grad);
  for (auto& g : grad) g /= 2.0 * pi;
  return grad;
}

std::vector<double> drift_from_density_cylindrical(
    const CylindricalModel& model, std::span<const double> x) {
  const double pi = model.density(x);
  if (!(pi > 0.0))
    throw DomainError(
        "drift_from_density_cylindrical: non-positive density at " +
        point_to_string(x));
  const double r = std::hypot(x[0], x[1]);
  const auto tail = x.subspan(2);
  std::vector<double> b(model.dim(), 0.0);
  if (r > model.radial_flat_radius()) {
    const double br = model.d_r(r, tail) / pi;
    b[0] = br * x[0] / r;
    b[1] = br * x[1] / r;
  }
  for (int k = 2; k < model.dim(); ++k)
    b[k] = model.d_tail(k - 2, r, tail) / pi;
  return b;
}

ClassMembershipReport check_class_membership(const AnalyticModel& model,
                                             const CoefficientClassParams& params,
                                             const Box& probe_box,
                                             int n_probes) {
  params.validate();
  probe_box.validate();
  const int d = model.dim();
  if (probe_box.dim() != d)
    throw ConfigError("probe box dimension does not match the model");
  if (n_probes < 1) throw ConfigError("need at least one probe");

  ClassMembershipReport rep;
  const Philox4x32 rng(0xC1A55C0DE0001ull);

  std::vector<double> origin(d, 0.0), b(d);
  model.drift(origin, b);
  double norm0 = 0.0;
  for (double v : b) norm0 += v * v;
  rep.drift_norm_at_origin = std::sqrt(norm0);

  rep.min_density = std::numeric_limits<double>::infinity();
  rep.worst_radial_slope = -std::numeric_limits<double>::infinity();

  std::vector<double> x(d), xp(d), xm(d), bp(d), bm(d);
  for (int p = 0; p < n_probes; ++p) {
    for (int j = 0; j < d; ++j) {
      const double u = rng.uniform(static_cast<std::uint64_t>(p), j, 2);
      x[j] = probe_box.lo[j] + u * (probe_box.hi[j] - probe_box.lo[j]);
    }
    const double pi = model.density(x);
    if (pi < rep.min_density) {
      rep.min_density = pi;
      rep.min_density_at = x;
    }
    if (!(pi > 0.0)) continue;  // drift undefined here; positivity flags it

    model.drift(x, b);
    double norm_x = 0.0, dot = 0.0;
    for (int j = 0; j < d; ++j) {
      norm_x += x[j] * x[j];
      dot += x[j] * b[j];
      rep.sup_drift_component =
          std::max(rep.sup_drift_component, std::abs(b[j]));
    }
    norm_x = std::sqrt(norm_x);
    if (norm_x >= params.rho_tilde) {
      ++rep.radial_probe_count;
      rep.worst_radial_slope = std::max(rep.worst_radial_slope, dot / norm_x);
    }

    // Central differences for the drift Jacobian, step 1e-5 (1+|x|).
    const double step = 1e-5 * (1.0 + norm_x);
    for (int j = 0; j < d; ++j) {
      xp = x;
      xm = x;
      xp[j] += step;
      xm[j] -= step;
      if (!(model.density(xp) > 0.0) || !(model.density(xm) > 0.0)) continue;
      model.drift(xp, bp);
      model.drift(xm, bm);
      for (int i = 0; i < d; ++i)
        rep.sup_drift_derivative = std::max(
            rep.sup_drift_derivative, std::abs(bp[i] - bm[i]) / (2.0 * step));
    }
  }

  rep.drift_bound_ok = rep.drift_norm_at_origin <= params.b0 &&
                       rep.sup_drift_component <= params.b0;
  rep.derivative_bound_ok = rep.sup_drift_derivative <= params.b1;
  rep.drift_condition_ok = rep.radial_probe_count == 0 ||
                           rep.worst_radial_slope <= -params.C_tilde;
  rep.positivity_ok = rep.min_density > 0.0;
  return rep;
}

}  // namespace ergodens
