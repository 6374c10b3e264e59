#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "horizonlab/conformal_field.hpp"

using namespace horizonlab;
namespace pi = std::numbers;

namespace {

Vec vec3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

Vec vec4(double a, double b, double c, double d) {
  Vec v(4);
  v << a, b, c, d;
  return v;
}

}  // namespace

TEST_CASE("point source closed form") {
  const auto s = Submanifold::point_set(3, {vec3(0, 0, 0)});
  const ConformalField field(s, 0.1);
  CHECK(field.value(vec3(0.1, 0, 0)) == Catch::Approx(2.0).epsilon(1e-15));
  CHECK(field.value(vec3(1e7, 0, 0)) == Catch::Approx(1.0).epsilon(1e-8));
  CHECK_THROWS_AS(field.value(vec3(0, 0, 0)), SingularityError);

  // gradient points at the source with magnitude (n-2) eps^{n-2} r^{-(n-1)}
  const Vec g = field.gradient(vec3(0.5, 0, 0));
  CHECK(g[0] == Catch::Approx(-0.1 / 0.25).epsilon(1e-14));
  CHECK(g[1] == 0.0);
}

TEST_CASE("symmetric pair: gradient vanishes on the bisector plane") {
  const auto s = Submanifold::point_set(3, {vec3(-1, 0, 0), vec3(1, 0, 0)});
  const ConformalField field(s, 0.2);
  const Vec g = field.gradient(vec3(0, 0.7, -0.3));
  CHECK(std::abs(g[0]) < 1e-15);
}

TEST_CASE("superposition of disjoint point sets") {
  const auto ab =
      Submanifold::point_set(3, {vec3(0, 0, 0), vec3(5, 1, 0)});
  const auto a = Submanifold::point_set(3, {vec3(0, 0, 0)});
  const auto b = Submanifold::point_set(3, {vec3(5, 1, 0)});
  const double eps = 0.3;
  const ConformalField fab(ab, eps), fa(a, eps), fb(b, eps);
  const Vec x = vec3(1.2, -0.4, 2.0);
  CHECK(fab.value(x) - 1.0 ==
        Catch::Approx((fa.value(x) - 1.0) + (fb.value(x) - 1.0)).epsilon(1e-12));
}

TEST_CASE("sphere field matches the high-resolution reference") {
  const auto s = Submanifold::round_sphere(4, 1, 1.0);
  const ConformalField field(s, 0.05, 1e-9);
  // point a tube-distance above a base point
  const Vec x = vec4(1.0 + 0.07, 0.0, 0.02, 0.0);
  const double rho = x.head(2).norm();
  const double k2 = x[2] * x[2] + x[3] * x[3];
  const double ref =
      1.0 + 0.05 * 2.0 *
                quad::integrate(
                    [&](double a) {
                      return std::pow(
                          k2 + rho * rho + 1.0 - 2.0 * rho * std::cos(a), -1.0);
                    },
                    0.0, pi::pi, 1e-13, 40000);
  CHECK(field.value(x) == Catch::Approx(ref).epsilon(1e-10));
}

TEST_CASE("gradient agrees with finite differences of the value") {
  const auto s = Submanifold::round_sphere(4, 1, 1.0);
  const ConformalField field(s, 0.05, 1e-11);
  const Vec x = vec4(1.3, -0.2, 0.4, 0.1);
  const Vec g = field.gradient(x);
  const double h = 1e-5;
  for (int i = 0; i < 4; ++i) {
    Vec xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    const double fd = (field.value(xp) - field.value(xm)) / (2.0 * h);
    CHECK(g[i] == Catch::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("unreachable tolerance reports the achieved accuracy") {
  const auto s = Submanifold::round_sphere(4, 1, 1.0);
  const ConformalField field(s, 0.05, 1e-16);
  try {
    field.value(vec4(1.001, 0, 0, 0));
    FAIL("expected AccuracyError");
  } catch (const AccuracyError& e) {
    CHECK(e.achieved > 0.0);
    CHECK(e.achieved < 1e-9);
  }
}

TEST_CASE("monotone decay along normal rays") {
  const auto s = Submanifold::round_sphere(4, 1, 1.0);
  const ConformalField field(s, 0.05);
  const Vec base = vec4(std::cos(0.6), std::sin(0.6), 0, 0);
  const auto frame = s.frame(base);
  for (const auto& w : frame.normal) {
    double prev = std::numeric_limits<double>::infinity();
    for (double a = 0.05; a < 0.9; a += 0.05) {
      const double u = field.value(base + a * w);
      CHECK(u < prev);
      CHECK(u > 1.0);
      prev = u;
    }
  }
}

TEST_CASE("conformal transformation law") {
  SECTION("identity factor") {
    CHECK(ConformalField::conformal_mean_curvature(4, 1.0, 0.0, 3.7) == 3.7);
  }
  SECTION("point source horizon identity") {
    for (double eps : {0.01, 0.1, 1.0}) {
      const auto s = Submanifold::point_set(3, {vec3(0, 0, 0)});
      const ConformalField field(s, eps);
      const Vec x = vec3(eps, 0, 0);
      const Vec nu = vec3(1, 0, 0);
      const double h = field.mean_curvature(x, 2.0 / eps, nu);
      CHECK(std::abs(h) < 1e-12);
    }
  }
  SECTION("consistency with the flat cylinder model") {
    // tube around the circle with tiny eps: u approaches the model factor
    // and the transformed curvature approaches the model curvature
    const Dimensions d{4, 1};
    const double eps = 1e-4;
    const auto s = Submanifold::round_sphere(4, 1, 1.0);
    const ConformalField field(s, eps);
    const double t = 1.3;  // radius in blow-up units
    const double a = t * eps;
    const Vec x = vec4(1, 0, 0, 0);
    const Vec w = vec4(0, 0, 1, 0);
    const Vec p = x + a * w;
    const double h_euclid = s.tube_mean_curvature(x, w, a);
    const double h = field.mean_curvature(p, h_euclid, w);
    const double model = cylinder_mean_curvature(d, t) / eps;
    CHECK(h == Catch::Approx(model).epsilon(2e-3));
  }
}

TEST_CASE("harmonicity residuals") {
  SECTION("point sources are exactly harmonic") {
    const auto s = Submanifold::point_set(3, {vec3(0, 0, 0), vec3(2, 0, 0)});
    const ConformalField field(s, 0.1);
    const Vec x = vec3(0.7, 0.4, -0.2);
    CHECK(field.harmonicity_residual(x) < 1e-5);
  }
  SECTION("sphere field") {
    const auto s = Submanifold::round_sphere(4, 1, 1.0);
    const ConformalField field(s, 0.05, 1e-11);
    const Vec x = vec4(1.4, 0.2, 0.3, -0.1);
    CHECK(field.harmonicity_residual(x) < 1e-4);
  }
  SECTION("step too large") {
    const auto s = Submanifold::point_set(3, {vec3(0, 0, 0)});
    const ConformalField field(s, 0.1);
    CHECK_THROWS_AS(field.harmonicity_residual(vec3(0.5, 0, 0), 0.4),
                    DomainError);
  }
  SECTION("affine functions have exactly zero residual") {
    // dyadic coefficients and step keep every difference exact
    auto affine = [](const Vec& x) {
      return 2.0 * x[0] - 0.5 * x[1] + 4.0 * x[2] + 3.0;
    };
    CHECK(normalized_laplacian(affine, vec3(0.25, 0.5, -1.0), 0.125) == 0.0);
  }
}

TEST_CASE("asymptotic coefficient fits") {
  SECTION("single point: exact") {
    const auto s = Submanifold::point_set(3, {vec3(0, 0, 0)});
    const ConformalField field(s, 0.1);
    const auto fit = field.fit_asymptotic({5.0, 10.0, 20.0});
    CHECK(fit.coefficient == Catch::Approx(0.1).epsilon(1e-10));
    CHECK(fit.exponent == Catch::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(fit.exponent - 1.0) < 0.05);
  }
  SECTION("pair of points: superposition") {
    const auto s = Submanifold::point_set(3, {vec3(-5, 0, 0), vec3(5, 0, 0)});
    const ConformalField field(s, 0.1);
    const auto fit = field.fit_asymptotic({100.0, 200.0, 400.0});
    CHECK(fit.predicted == Catch::Approx(0.2).epsilon(1e-12));
    CHECK(std::abs(fit.coefficient / fit.predicted - 1.0) < 0.01);
  }
  SECTION("circle in R^4") {
    const auto s = Submanifold::round_sphere(4, 1, 1.0);
    const ConformalField field(s, 0.05, 1e-10);
    const auto fit = field.fit_asymptotic({20.0, 40.0, 80.0});
    CHECK(fit.predicted == Catch::Approx(0.05 * 2.0 * pi::pi).epsilon(1e-12));
    CHECK(std::abs(fit.coefficient / fit.predicted - 1.0) < 0.01);
    CHECK(std::abs(fit.exponent - 2.0) < 0.05);
  }
  SECTION("radii too small rejected") {
    const auto s = Submanifold::point_set(3, {vec3(-5, 0, 0), vec3(5, 0, 0)});
    const ConformalField field(s, 0.1);
    CHECK_THROWS_AS(field.fit_asymptotic({20.0, 40.0}), DomainError);
  }
}
