#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "ergodens/errors.hpp"
#include "ergodens/model.hpp"
#include "ergodens/philox.hpp"
#include "ergodens/quadrature.hpp"
#include "ergodens/smooth.hpp"

using namespace ergodens;

namespace {

// Finite-difference Fokker-Planck residual (1/2) Lap(pi) - div(pi b),
// normalized by the sup of the density; the oracle for the stationarity of
// every analytic model.
double fp_residual(const AnalyticModel& model, std::span<const double> x,
                   double sup_density) {
  const int d = model.dim();
  std::vector<double> xp(x.begin(), x.end()), xm(x.begin(), x.end());
  double norm_x = 0.0;
  for (double v : x) norm_x += v * v;
  const double step = 1e-5 * (1.0 + std::sqrt(norm_x));

  auto flux = [&](std::span<const double> y, int i) {
    std::vector<double> b(d);
    model.drift(y, b);
    return model.density(y) * b[i];
  };

  double lap = 0.0, div = 0.0;
  const double pi0 = model.density(x);
  for (int i = 0; i < d; ++i) {
    xp.assign(x.begin(), x.end());
    xm.assign(x.begin(), x.end());
    xp[i] += step;
    xm[i] -= step;
    lap += (model.density(xp) - 2.0 * pi0 + model.density(xm)) / (step * step);
    div += (flux(xp, i) - flux(xm, i)) / (2.0 * step);
  }
  return std::abs(0.5 * lap - div) / sup_density;
}

std::vector<double> random_point(const Philox4x32& rng, std::uint64_t ctr,
                                 const Box& box) {
  std::vector<double> x(box.dim());
  for (int j = 0; j < box.dim(); ++j)
    x[j] = box.lo[j] +
           rng.uniform(ctr, static_cast<std::uint32_t>(j), 7) *
               (box.hi[j] - box.lo[j]);
  return x;
}

void check_fp_residual(const AnalyticModel& model, const Box& box,
                       int n_probes, double tol) {
  const Philox4x32 rng(2024);
  const std::vector<double> origin(model.dim(), 0.0);
  const double sup = model.density(origin);  // mode at the origin
  for (int p = 0; p < n_probes; ++p) {
    const auto x = random_point(rng, p, box);
    CHECK(fp_residual(model, x, sup) <= tol);
  }
}

}  // namespace

TEST_SUITE_BEGIN("model");

TEST_CASE("smoothness spec ordering is deterministic with ties") {
  SmoothnessSpec s;
  s.beta = {3.0, 1.0, 2.0, 1.0};
  s.L = {1.0, 1.0, 1.0, 1.0};
  s.validate();
  CHECK(s.sorted_order() == std::vector<int>{1, 3, 2, 0});
}

TEST_CASE("drift of the gaussian product model is -x") {
  const GaussianProductModel ou(3, 0.5);
  for (auto x : {std::vector<double>{0.2, -1.0, 0.7},
                 std::vector<double>{0.0, 0.0, 0.0},
                 std::vector<double>{-2.5, 1.5, 3.0}}) {
    const auto b = drift_from_density(ou, x);
    for (int j = 0; j < 3; ++j)
      CHECK(b[j] == doctest::Approx(-x[j]).epsilon(1e-12));
  }
}

TEST_CASE("product-exp drift: plateau and tail") {
  const ProductExpDensity pe(0.1, 3);
  SUBCASE("plateau: drift is exactly zero") {
    const auto b = drift_from_density(pe, std::vector<double>{0.0, 1.0, -4.9});
    for (double v : b) CHECK(v == 0.0);
  }
  SUBCASE("tail: component drift is -eta/2") {
    const auto b = drift_from_density(pe, std::vector<double>{20.0, 0.0, -15.0});
    CHECK(b[0] == doctest::Approx(-0.05).epsilon(1e-12));
    CHECK(b[1] == 0.0);
    CHECK(b[2] == doctest::Approx(0.05).epsilon(1e-12));
  }
  SUBCASE("plateau gradient vanishes on |x_j| <= 1/(2 eta)") {
    std::vector<double> g(3);
    pe.grad_density(std::vector<double>{4.99, -4.99, 0.0}, g);
    for (double v : g) CHECK(v == 0.0);
  }
  SUBCASE("tail log-derivative is -eta sgn") {
    std::vector<double> g(3);
    const std::vector<double> x{11.0, -12.0, 0.0};
    pe.grad_density(x, g);
    const double pi = pe.density(x);
    CHECK(g[0] / pi == doctest::Approx(-0.1).epsilon(1e-12));
    CHECK(g[1] / pi == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(g[2] == 0.0);
  }
}

TEST_CASE("drift_from_density rejects non-positive densities") {
  const LambdaModel bad(1, "negative", [](std::span<const double> x) {
    return x[0];  // negative for x < 0
  });
  CHECK_THROWS_AS(drift_from_density(bad, std::vector<double>{-1.0}),
                  DomainError);
}

TEST_CASE("axis normalization integrates to one") {
  const ProductExpDensity pe(0.1, 2);
  // Independent oracle: Simpson over the bounded core plus the analytic
  // exponential tail beyond |y| = 1/eta.
  const double eta = pe.eta();
  const int n = 200000;
  const double a = -1.0 / eta, b = 1.0 / eta;
  const double hstep = (b - a) / n;
  auto f = [&](double y) { return pe.axis_density(0, y); };
  double core = f(a) + f(b);
  for (int i = 1; i < n; ++i) core += f(a + i * hstep) * (i % 2 ? 4.0 : 2.0);
  core *= hstep / 3.0;
  const double tail = 2.0 * pe.axis_normalization() * std::exp(-1.0) / eta;
  CHECK(core + tail == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("bumped density: center lift and zero-mass bump") {
  auto base = std::make_shared<ProductExpDensity>(0.1, 2);
  const std::vector<double> center{0.5, -0.25};
  const BumpedDensity bumped(base, 5.0e4, {0.3, 0.2}, center);

  SUBCASE("lift at the center is exactly 1/M_T") {
    // The bump term itself is exact: K(0)^d = 1. The full density difference
    // only adds float rounding from the base.
    CHECK(bumped.bump_term(center) == 1.0 / 5.0e4);
    const double lift = bumped.density(center) - base->density(center);
    CHECK(lift == doctest::Approx(1.0 / 5.0e4).epsilon(1e-10));
  }
  SUBCASE("bump mass below 1e-10") {
    // Tensor 64-node Gauss-Legendre over the bump support box.
    const GaussLegendre& rule = gauss_legendre(64);
    double mass = 0.0;
    std::vector<double> x(2);
    for (int i = 0; i < 64; ++i)
      for (int j = 0; j < 64; ++j) {
        x[0] = center[0] + 0.3 * rule.nodes[i];
        x[1] = center[1] + 0.2 * rule.nodes[j];
        mass += rule.weights[i] * rule.weights[j] * bumped.bump_term(x);
      }
    mass *= 0.3 * 0.2;
    CHECK(std::abs(mass) <= 1e-10);
  }
  SUBCASE("holder budget is reported") {
    SmoothnessSpec spec;
    spec.beta = {2.0, 2.0};
    spec.L = {1.0, 1.0};
    const auto budget = bumped.holder_budget(spec);
    CHECK(budget[0] == doctest::Approx(1.0 / (5.0e4 * 0.09)));
    CHECK(budget[1] == doctest::Approx(1.0 / (5.0e4 * 0.04)));
  }
}

TEST_CASE("density mass within 1e-6 for built-in separable models") {
  const ProductExpDensity pe(0.2, 3);
  const GaussianProductModel g(2, 0.5);
  for (int j : {0, 1}) {
    const double mass = adaptive_quadrature(
        [&](double t) { return g.axis_density(j, t); }, -12.0, 12.0, 1e-12);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
  }
  const double mass_pe = adaptive_quadrature(
      [&](double t) { return pe.axis_density(0, t); }, -300.0, 300.0, 1e-12);
  CHECK(mass_pe == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("radial density normalization") {
  const RadialExpDensity radial(0.1, 3);
  // Oracle: polar mass 2 pi int g(r) r dr times the axis mass, adaptive
  // quadrature with a different split than the constructor.
  const double eta = radial.eta();
  auto g = [&](double r) { return std::exp(-eta * tail_ramp(r).v); };
  const double polar =
      2.0 * std::numbers::pi *
      (adaptive_quadrature([&](double r) { return g(r) * r; }, 0.0, 1.0,
                           1e-13) +
       adaptive_quadrature([&](double r) { return g(r) * r; }, 1.0, 900.0,
                           1e-13));
  const double axis = 2.0 * (adaptive_quadrature(g, 0.0, 1.0, 1e-13) +
                             adaptive_quadrature(g, 1.0, 900.0, 1e-13));
  const double mass =
      radial.normalization() * polar * axis;  // d = 3: one tail axis
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("J function: pieces, bounds, monotonicity") {
  const double r_min = 0.01, r_max = 0.1;
  const double L = std::log(r_max / r_min);

  SUBCASE("parameter validation") {
    CHECK_THROWS_AS(eval_J(0.0, 0.03, 0.1), ConfigError);  // r_min >= r_max/4
    CHECK_THROWS_AS(eval_J(0.0, -0.01, 0.1), ConfigError);
  }
  SUBCASE("compact support and value at r_max") {
    CHECK(eval_J(r_max, r_min, r_max) == 0.0);
    CHECK(eval_J(2 * r_max, r_min, r_max) == 0.0);
  }
  SUBCASE("J(0) >= 1") { CHECK(eval_J(0.0, r_min, r_max) >= 1.0); }
  SUBCASE("value at r_max/2 equals Phi1(1/2)/ln(r_max/r_min)") {
    // Oracle: composite Gauss-Legendre for Phi1(1/2) = int_{1/2}^1
    // phi(1-s)/s ds (integrand vanishes for s >= 3/4).
    const double phi1_half =
        gl_integrate([](double s) { return annulus_ramp(1.0 - s) / s; }, 0.5,
                     0.75, 64);
    CHECK(eval_J(r_max / 2.0, r_min, r_max) ==
          doctest::Approx(phi1_half / L).epsilon(1e-9));
  }
  SUBCASE("continuity across the piece boundaries") {
    for (double r : {r_min / 2.0, r_max / 2.0}) {
      const double below = eval_J(r * (1.0 - 1e-9), r_min, r_max);
      const double above = eval_J(r * (1.0 + 1e-9), r_min, r_max);
      CHECK(below == doctest::Approx(above).epsilon(1e-6));
    }
  }
  SUBCASE("nonincreasing on [r_min/4, r_max]") {
    double prev = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 200; ++i) {
      const double r = r_min / 4.0 + (r_max - r_min / 4.0) * i / 200.0;
      const double v = eval_J(r, r_min, r_max);
      CHECK(v <= prev + 1e-12);
      prev = v;
    }
  }
  SUBCASE("envelope (ln(r_max/r)+1)/ln(r_max/r_min) with c <= 3") {
    double worst = 0.0;
    for (int i = 0; i <= 100; ++i) {
      const double r = r_max * std::pow(1e-3, i / 100.0);  // log-spaced
      const double envelope =
          std::min((std::log(r_max / r) + 1.0) / L, 1.0);
      worst = std::max(worst, eval_J(r, r_min, r_max) / envelope);
    }
    CHECK(worst <= 3.0);
    CHECK(worst >= 1.0);  // J(0) > envelope floor would fail otherwise
  }
  SUBCASE("derivative bound c/(ln (r wedge r_min)) with c <= 3") {
    double worst = 0.0;
    for (int i = 1; i <= 200; ++i) {
      const double r = r_max * std::pow(2e-3, i / 200.0);
      const double eps = r * 1e-6;
      const double fd = (eval_J(r + eps, r_min, r_max) -
                         eval_J(r - eps, r_min, r_max)) /
                        (2 * eps);
      worst = std::max(worst, std::abs(fd) * L * std::min(r, r_min));
    }
    CHECK(worst <= 3.0);
  }
  SUBCASE("analytic derivatives match finite differences") {
    for (double r : {0.004, 0.02, 0.06, 0.09}) {
      const double eps = 1e-7;
      const double fd1 = (eval_J(r + eps, r_min, r_max) -
                          eval_J(r - eps, r_min, r_max)) /
                         (2 * eps);
      CHECK(eval_J_d1(r, r_min, r_max) == doctest::Approx(fd1).epsilon(1e-5));
    }
  }
}

TEST_CASE("cylindrical drift relations") {
  auto base = std::make_shared<RadialExpDensity>(0.1, 3);
  SUBCASE("base radial model: b_r = -eta beyond r = 1") {
    const std::vector<double> x{1.2, 0.9, 0.3};  // r = 1.5
    const auto b = drift_from_density_cylindrical(*base, x);
    const double r = std::hypot(x[0], x[1]);
    const double br = b[0] * x[0] / r + b[1] * x[1] / r;
    const double btheta = -b[0] * x[1] / r + b[1] * x[0] / r;
    CHECK(br == doctest::Approx(-0.1).epsilon(1e-12));
    CHECK(btheta == doctest::Approx(0.0));
  }
  SUBCASE("angular component vanishes everywhere") {
    const Philox4x32 rng(7);
    for (int p = 0; p < 20; ++p) {
      std::vector<double> x(3);
      for (int j = 0; j < 3; ++j)
        x[j] = -3.0 + 6.0 * rng.uniform(p, j, 3);
      const double r = std::hypot(x[0], x[1]);
      if (r < 1e-6) continue;
      const auto b = drift_from_density_cylindrical(*base, x);
      CHECK(std::abs(-b[0] * x[1] / r + b[1] * x[0] / r) <= 1e-12);
    }
  }
  SUBCASE("bumped model equals base drift off the bump support") {
    const CylindricalBumpDensity bumped(base, 1.0e5, 0.01, 0.1, {0.15});
    const std::vector<double> x{0.3, 0.2, 0.5};  // r > r_max, |x_3| > h_3
    const auto b1 = drift_from_density_cylindrical(bumped, x);
    const auto b0 = drift_from_density_cylindrical(*base, x);
    for (int j = 0; j < 3; ++j) CHECK(b1[j] == doctest::Approx(b0[j]));
  }
  SUBCASE("model drift is half the cylindrical relation") {
    const CylindricalBumpDensity bumped(base, 1.0e5, 0.01, 0.1, {0.15});
    const std::vector<double> x{0.04, 0.02, 0.05};
    const auto op = drift_from_density_cylindrical(bumped, x);
    std::vector<double> b(3);
    bumped.drift(x, b);
    for (int j = 0; j < 3; ++j)
      CHECK(b[j] == doctest::Approx(op[j] / 2.0).epsilon(1e-12));
  }
}

TEST_CASE("Fokker-Planck residual below 1e-4 on random probes") {
  SUBCASE("gaussian") {
    Box box{std::vector<double>(2, -2.5), std::vector<double>(2, 2.5)};
    check_fp_residual(GaussianProductModel(2, 0.5), box, 30, 1e-4);
  }
  SUBCASE("product exp") {
    Box box{std::vector<double>(3, -12.0), std::vector<double>(3, 12.0)};
    check_fp_residual(ProductExpDensity(0.1, 3), box, 30, 1e-4);
  }
  SUBCASE("bumped") {
    auto base = std::make_shared<ProductExpDensity>(0.1, 2);
    const BumpedDensity bumped(base, 5.0e4, {0.3, 0.2}, {0.5, -0.25});
    Box box{{0.5 - 0.4, -0.25 - 0.3}, {0.5 + 0.4, -0.25 + 0.3}};
    check_fp_residual(bumped, box, 30, 1e-4);
  }
  SUBCASE("cylindrical bump") {
    auto base = std::make_shared<RadialExpDensity>(0.1, 3);
    const CylindricalBumpDensity bumped(base, 1.0e5, 0.01, 0.1, {0.15});
    Box box{std::vector<double>(3, -1.4), std::vector<double>(3, 1.4)};
    check_fp_residual(bumped, box, 30, 1e-4);
  }
}

TEST_CASE("class membership audit") {
  CoefficientClassParams params;
  params.b0 = 1.0e4;  // drift unbounded on the probe box; irrelevant here
  params.b1 = 2.0;
  params.C_tilde = 0.5;
  params.rho_tilde = 1.0;

  SUBCASE("OU passes the drift condition") {
    const GaussianProductModel ou(2, 0.5);
    Box box{std::vector<double>(2, -3.0), std::vector<double>(2, 3.0)};
    const auto rep = check_class_membership(ou, params, box, 300);
    CHECK(rep.drift_condition_ok);
    CHECK(rep.worst_radial_slope <= -1.0 + 1e-9);
    CHECK(rep.positivity_ok);
    CHECK(rep.derivative_bound_ok);  // |db/dx| = 1 <= 2
  }
  SUBCASE("product-exp fails a drift bound below eta/2") {
    const ProductExpDensity pe(0.2, 2);
    CoefficientClassParams tight = params;
    tight.b0 = 0.05;  // below eta/2 = 0.1
    Box box{std::vector<double>(2, -10.0), std::vector<double>(2, 10.0)};
    const auto rep = check_class_membership(pe, tight, box, 500);
    CHECK_FALSE(rep.drift_bound_ok);
    // The tail alone already reaches |b_j| = eta/2 = 0.1 > b0.
    CHECK(rep.sup_drift_component >= 0.1 - 1e-9);
  }
  SUBCASE("bumped density below the positivity threshold") {
    auto base = std::make_shared<ProductExpDensity>(0.1, 2);
    // Base density level is ~1e-3; amplitude 1/M_T = 0.1 dwarfs it, so the
    // negative ring of the bump kernel drives the density negative.
    const BumpedDensity bad(base, 10.0, {0.3, 0.2}, {0.0, 0.0});
    Box box{{-0.3, -0.2}, {0.3, 0.2}};
    const auto rep = check_class_membership(bad, params, box, 400);
    CHECK_FALSE(rep.positivity_ok);
    CHECK(rep.min_density < 0.0);
    CHECK(rep.min_density_at.size() == 2);
  }
}

TEST_SUITE_END();
