#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ergodens/kernel.hpp"

namespace ergodens {

/// Axis-aligned box in R^d.
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;
  int dim() const { return static_cast<int>(lo.size()); }
  void validate() const;
};

/// Anisotropic Holder parameters: per-axis exponents beta_l and constants L_l.
struct SmoothnessSpec {
  std::vector<double> beta;
  std::vector<double> L;

  int dim() const { return static_cast<int>(beta.size()); }
  void validate() const;
  /// Axis indices ordered by ascending beta, ties broken by axis index.
  std::vector<int> sorted_order() const;
};

/// Constants of the coefficient class: ellipticity floor, coefficient bounds
/// and the drift condition <x,b(x)> <= -C_tilde|x| outside radius rho_tilde.
struct CoefficientClassParams {
  double a_min = 1.0;
  double a0 = 1.0;
  double a1 = 1.0;
  double b0 = 1.0;
  double b1 = 1.0;
  double C_tilde = 0.5;
  double rho_tilde = 1.0;
  void validate() const;
};

/// An evaluable invariant density with analytic gradient and Laplacian, plus
/// the drift that makes it stationary for dX = b dt + dW. Immutable after
/// construction; evaluation is pure and thread-safe.
class AnalyticModel {
public:
  virtual ~AnalyticModel() = default;

  virtual int dim() const = 0;
  virtual std::string id() const = 0;
  virtual std::string support_note() const = 0;

  virtual double density(std::span<const double> x) const = 0;
  virtual void grad_density(std::span<const double> x,
                            std::span<double> out) const = 0;
  virtual double laplacian_density(std::span<const double> x) const = 0;

  /// Drift of the unit-diffusion SDE with this stationary density:
  /// b = grad(pi) / (2 pi). Overrides must keep the Fokker-Planck identity
  /// (1/2) Lap(pi) = div(pi b).
  virtual void drift(std::span<const double> x, std::span<double> out) const;

  virtual double diffusion_scale() const { return 1.0; }
  virtual std::vector<double> mode() const {
    return std::vector<double>(dim(), 0.0);
  }

  /// True when density(x) = prod_j axis_density(j, x_j); enables exact
  /// per-axis quadratures.
  virtual bool separable() const { return false; }
  virtual double axis_density(int axis, double t) const;
};

/// Product of centered normals with common variance sigma2. With
/// sigma2 = 1/2 the drift is b(x) = -x: the Ornstein-Uhlenbeck reference.
class GaussianProductModel final : public AnalyticModel {
public:
  GaussianProductModel(int d, double sigma2 = 0.5);
  int dim() const override { return d_; }
  std::string id() const override;
  std::string support_note() const override { return "gaussian tails"; }
  double density(std::span<const double> x) const override;
  void grad_density(std::span<const double> x,
                    std::span<double> out) const override;
  double laplacian_density(std::span<const double> x) const override;
  bool separable() const override { return true; }
  double axis_density(int axis, double t) const override;
  double sigma2() const { return sigma2_; }

private:
  int d_;
  double sigma2_;
  double axis_norm_;
};

/// Separable density pi0(x) = c_eta prod_j f(eta |x_j|) where f is the smooth
/// cutoff equal to 1 on [0,1/2] and e^{-u} on [1,inf). Flat on the box
/// |x_j| <= 1/(2 eta); component log-derivative is -eta sgn(x_j) beyond
/// |x_j| >= 1/eta.
class ProductExpDensity final : public AnalyticModel {
public:
  ProductExpDensity(double eta, int d);
  int dim() const override { return d_; }
  std::string id() const override;
  std::string support_note() const override {
    return "exponential tails, flat core";
  }
  double density(std::span<const double> x) const override;
  void grad_density(std::span<const double> x,
                    std::span<double> out) const override;
  double laplacian_density(std::span<const double> x) const override;
  bool separable() const override { return true; }
  double axis_density(int axis, double t) const override;

  double eta() const { return eta_; }
  double axis_normalization() const { return c_axis_; }

private:
  double eta_;
  int d_;
  double c_axis_;
};

/// pi1 = pi0 + (1/M_T) prod_l K((x_l - x0_l)/h_l) with a zero-mass bump
/// kernel; the bump raises the density at the center by exactly 1/M_T.
class BumpedDensity final : public AnalyticModel {
public:
  BumpedDensity(std::shared_ptr<const ProductExpDensity> base, double M_T,
                std::vector<double> h, std::vector<double> center);
  int dim() const override;
  std::string id() const override;
  std::string support_note() const override {
    return "exponential tails with local bump";
  }
  double density(std::span<const double> x) const override;
  void grad_density(std::span<const double> x,
                    std::span<double> out) const override;
  double laplacian_density(std::span<const double> x) const override;

  const ProductExpDensity& base() const { return *base_; }
  double bump_amplitude() const { return 1.0 / M_T_; }
  double M_T() const { return M_T_; }
  const std::vector<double>& bandwidths() const { return h_; }
  const std::vector<double>& center() const { return center_; }
  const BumpKernel1D& bump_kernel() const { return bump_; }
  /// Bump term alone, (1/M_T) prod_l K((x_l - x0_l)/h_l).
  double bump_term(std::span<const double> x) const;
  /// Per-axis ratios 1 / (M_T h_l^{beta_l}); reported, never enforced.
  std::vector<double> holder_budget(const SmoothnessSpec& beta) const;

private:
  std::shared_ptr<const ProductExpDensity> base_;
  double M_T_;
  std::vector<double> h_;
  std::vector<double> center_;
  BumpKernel1D bump_;
};

/// Base for densities of the form pi(r, x_3, ..., x_d) with r = |(x_1,x_2)|
/// and no angular dependence. Cartesian gradient/Laplacian are derived from
/// the cylindrical partials; everything is constant in r near the axis, so
/// the Cartesian extension stays smooth at r = 0.
class CylindricalModel : public AnalyticModel {
public:
  double density(std::span<const double> x) const override;
  void grad_density(std::span<const double> x,
                    std::span<double> out) const override;
  double laplacian_density(std::span<const double> x) const override;

  virtual double density_cyl(double r, std::span<const double> tail) const = 0;
  virtual double d_r(double r, std::span<const double> tail) const = 0;
  virtual double d2_r(double r, std::span<const double> tail) const = 0;
  /// Partial in x_{k+3}, k = 0 .. d-3.
  virtual double d_tail(int k, double r,
                        std::span<const double> tail) const = 0;
  virtual double d2_tail(int k, double r,
                         std::span<const double> tail) const = 0;
  /// Radius below which the density is exactly constant in r.
  virtual double radial_flat_radius() const = 0;
};

/// Radial analog of ProductExpDensity:
/// pi0 = c_eta exp(-eta psi(r)) prod_{k>=3} exp(-eta psi(|x_k|)).
class RadialExpDensity final : public CylindricalModel {
public:
  RadialExpDensity(double eta, int d);
  int dim() const override { return d_; }
  std::string id() const override;
  std::string support_note() const override {
    return "radially exponential tails, flat core";
  }
  double density_cyl(double r, std::span<const double> tail) const override;
  double d_r(double r, std::span<const double> tail) const override;
  double d2_r(double r, std::span<const double> tail) const override;
  double d_tail(int k, double r, std::span<const double> tail) const override;
  double d2_tail(int k, double r, std::span<const double> tail) const override;
  double radial_flat_radius() const override { return 0.5; }

  double eta() const { return eta_; }
  double normalization() const { return c_; }

private:
  double eta_;
  int d_;
  double c_;
};

/// Logarithmically shaped radial bump J_{r_min,r_max}: smooth, supported on
/// [0, r_max], constant on [0, r_min/4], nonincreasing, J(0) >= 1.
double eval_J(double r, double r_min, double r_max);
/// Analytic first derivative of the same function.
double eval_J_d1(double r, double r_min, double r_max);
double eval_J_d2(double r, double r_min, double r_max);

/// pi1 = pi0_radial + (1/M_T) J_{r_min,r_max}(r) prod_{i>=3} K(x_i / h_i).
class CylindricalBumpDensity final : public CylindricalModel {
public:
  CylindricalBumpDensity(std::shared_ptr<const RadialExpDensity> base,
                         double M_T, double r_min, double r_max,
                         std::vector<double> h_tail);
  int dim() const override;
  std::string id() const override;
  std::string support_note() const override {
    return "radially exponential tails with log-shaped bump at 0";
  }
  double density_cyl(double r, std::span<const double> tail) const override;
  double d_r(double r, std::span<const double> tail) const override;
  double d2_r(double r, std::span<const double> tail) const override;
  double d_tail(int k, double r, std::span<const double> tail) const override;
  double d2_tail(int k, double r, std::span<const double> tail) const override;
  double radial_flat_radius() const override;

  const RadialExpDensity& base() const { return *base_; }
  double M_T() const { return M_T_; }
  double r_min() const { return r_min_; }
  double r_max() const { return r_max_; }
  const std::vector<double>& tail_bandwidths() const { return h_tail_; }
  /// Holder budgets per the bump calibration: radial axes use
  /// 1/(M_T r_min^{beta} ln(r_max/r_min)), tail axes 1/(M_T h^{beta}).
  std::vector<double> holder_budget(const SmoothnessSpec& beta) const;

private:
  double bump_value(double r, std::span<const double> tail) const;
  std::shared_ptr<const RadialExpDensity> base_;
  double M_T_;
  double r_min_;
  double r_max_;
  std::vector<double> h_tail_;
  BumpKernel1D bump_;
};

/// Plug-in evaluable model for user-supplied densities.
class LambdaModel final : public AnalyticModel {
public:
  using Scalar = std::function<double(std::span<const double>)>;
  using Vector = std::function<void(std::span<const double>, std::span<double>)>;

  LambdaModel(int d, std::string id, Scalar density, Vector grad = nullptr,
              Scalar laplacian = nullptr, Vector drift = nullptr);
  int dim() const override { return d_; }
  std::string id() const override { return id_; }
  std::string support_note() const override { return "user supplied"; }
  double density(std::span<const double> x) const override;
  void grad_density(std::span<const double> x,
                    std::span<double> out) const override;
  double laplacian_density(std::span<const double> x) const override;
  void drift(std::span<const double> x, std::span<double> out) const override;

private:
  int d_;
  std::string id_;
  Scalar density_;
  Vector grad_;
  Scalar laplacian_;
  Vector drift_;
};

/// b_i(x) = (1/2) d_i pi(x) / pi(x). Throws DomainError when pi(x) <= 0.
std::vector<double> drift_from_density(const AnalyticModel& model,
                                       std::span<const double> x);

/// Cylindrical drift relations b_r = (d_r pi)/pi, b_theta = 0,
/// b_k = (d_k pi)/pi, mapped back to Cartesian coordinates. Note the absent
/// 1/2: this is the raw cylindrical stationarity relation as used by the
/// lower-bound construction, equal to twice AnalyticModel::drift.
std::vector<double> drift_from_density_cylindrical(const CylindricalModel& model,
                                                   std::span<const double> x);

/// Numeric audit of the coefficient-class conditions on a probe grid.
struct ClassMembershipReport {
  double drift_norm_at_origin = 0.0;
  double sup_drift_component = 0.0;
  double sup_drift_derivative = 0.0;
  double worst_radial_slope = 0.0;  // max over |x| >= rho_tilde of <x,b>/|x|
  int radial_probe_count = 0;
  double min_density = 0.0;
  std::vector<double> min_density_at;

  bool drift_bound_ok = false;
  bool derivative_bound_ok = false;
  bool drift_condition_ok = false;
  bool positivity_ok = false;

  bool pass() const {
    return drift_bound_ok && derivative_bound_ok && drift_condition_ok &&
           positivity_ok;
  }
};

/// Probes are drawn deterministically in `probe_box`. Failures are reported,
/// not thrown. The drift condition is only assessed on probes with
/// |x| >= rho_tilde; give the box a reach of at least 2 rho_tilde when that
/// check matters.
ClassMembershipReport check_class_membership(const AnalyticModel& model,
                                             const CoefficientClassParams& params,
                                             const Box& probe_box,
                                             int n_probes);

}  // namespace ergodens
