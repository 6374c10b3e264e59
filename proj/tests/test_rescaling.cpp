#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "horizonlab/rescaling.hpp"

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

TEST_CASE("rescaled potential of a point source is scale free") {
  const auto s = Submanifold::point_set(3, {vec3(0, 0, 0)});
  const Vec zeta = vec3(0.4, -0.3, 1.1);
  const double gamma = 1.0;
  for (double eps : {0.5, 0.1, 0.02}) {
    const RescalingMap map{vec3(0, 0, 0), vec3(0, 0, 0), eps};
    const double fk = rescaled_potential(s, map, gamma, zeta);
    CHECK(fk == Catch::Approx(std::pow(zeta.norm(), -gamma)).epsilon(1e-13));
  }
}

TEST_CASE("plane limit values") {
  // m = 0: pure power of the distance
  CHECK(plane_limit_potential(0, 1.7, 0.5) ==
        Catch::Approx(std::pow(0.5, -1.7)).epsilon(1e-14));
  // gamma = n-2 at the critical radius reproduces the cylinder correction
  const Dimensions d{4, 1};
  const double ahat = critical_radius(d);
  CHECK(plane_limit_potential(1, 2.0, ahat) ==
        Catch::Approx(cylinder_conformal_factor(d, ahat) - 1.0).epsilon(1e-13));
  // 1D quadrature oracle for (n, m, gamma, d) = (4, 1, 2, 1)
  const double oracle = 2.0 * quad::integrate(
                                  [](double t) { return 1.0 / (1.0 + t * t); },
                                  0.0, 1e8, 1e-12);
  CHECK(plane_limit_potential(1, 2.0, 1.0) ==
        Catch::Approx(oracle).epsilon(1e-7));
  CHECK(plane_limit_potential(1, 2.0, 1.0) == Catch::Approx(pi::pi).epsilon(1e-13));
  CHECK_THROWS_AS(plane_limit_potential(2, 1.5, 1.0), DomainError);
}

TEST_CASE("plane limit homogeneity and translation invariance") {
  const double gamma = 2.0;
  const int m = 1;
  const double base = plane_limit_potential(m, gamma, 0.8);
  for (double lambda : {0.5, 2.0, 7.0}) {
    CHECK(plane_limit_potential(m, gamma, lambda * 0.8) ==
          Catch::Approx(std::pow(lambda, -(gamma - m)) * base).epsilon(1e-13));
  }
}

TEST_CASE("sphere blow-up converges to the plane limit") {
  const auto s = Submanifold::round_sphere(4, 1, 1.0);
  const Vec anchor = vec4(1, 0, 0, 0);
  const double gamma = 2.0;
  const Vec zeta = vec4(0.9, 0, 1.1, 0.3);  // mixed radial/flat offsets

  const double dist = std::sqrt(0.9 * 0.9 + 1.1 * 1.1 + 0.3 * 0.3);
  const double limit = plane_limit_potential(1, gamma, dist);

  double prev_err = std::numeric_limits<double>::infinity();
  std::vector<double> values;
  for (double eps : {0.2, 0.1, 0.05, 0.025}) {
    const RescalingMap map{anchor, anchor, eps};
    const double fk = rescaled_potential(s, map, gamma, zeta, 1e-11);
    values.push_back(fk);
    const double err = std::abs(fk - limit);
    CHECK(err < prev_err);
    prev_err = err;
  }
  // Cauchy-type decrease of consecutive gaps
  CHECK(std::abs(values[3] - values[2]) < std::abs(values[1] - values[0]));
}

TEST_CASE("window construction enforces its constraints") {
  const auto s = Submanifold::round_sphere(4, 1, 1.0);
  const Vec anchor = vec4(1, 0, 0, 0);
  const auto w = ConvergenceWindow::build(s, anchor, 3.0, 0.5, 2.0);
  CHECK(!w.grid.empty());
  for (const auto& z : w.grid) {
    CHECK(z.norm() <= 3.0 + 1e-12);
    CHECK(w.normal_distance(z) >= 0.5 - 1e-12);
  }
  CHECK_THROWS_AS(ConvergenceWindow::build(s, anchor, 1.0, 2.0, 2.0),
                  DomainError);
}

TEST_CASE("uniform bound shrinks as beta2 grows") {
  const auto s = Submanifold::round_sphere(4, 1, 1.0);
  const Vec anchor = vec4(1, 0, 0, 0);
  const double gamma = 2.0;
  double prev = std::numeric_limits<double>::infinity();
  for (double beta2 : {0.3, 0.6, 1.2}) {
    const auto w = ConvergenceWindow::build(s, anchor, 3.0, beta2, gamma);
    double worst = 0.0;
    for (double eps : {0.2, 0.1, 0.05}) {
      const RescalingMap map{anchor, anchor, eps};
      for (const auto& z : w.grid)
        worst = std::max(worst, rescaled_potential(s, map, gamma, z, 1e-9));
    }
    CHECK(worst < prev);
    CHECK(std::isfinite(worst));
    prev = worst;
  }
}

TEST_CASE("convergence report") {
  SECTION("point source: identically zero deviations") {
    const auto s = Submanifold::point_set(3, {vec3(0, 0, 0)});
    const auto w = ConvergenceWindow::build(s, vec3(0, 0, 0), 3.0, 0.5, 1.0);
    const auto rep = convergence_report(s, vec3(0, 0, 0), w, {0.2, 0.1, 0.05});
    for (const auto& lev : rep.levels) {
      CHECK(lev.sup_c0 < 1e-12);
      CHECK(lev.sup_c1 < 1e-10);
      CHECK(lev.metric_dev < 1e-12);
    }
  }
  SECTION("sphere: strictly decreasing deviations") {
    const auto s = Submanifold::round_sphere(4, 1, 1.0);
    const Vec anchor = vec4(1, 0, 0, 0);
    const Dimensions d{4, 1};
    const double ahat = critical_radius(d);
    const auto w =
        ConvergenceWindow::build(s, anchor, 3.0 * ahat, 0.5 * ahat, 2.0);
    const auto rep = convergence_report(s, anchor, w, {0.2, 0.1, 0.05});
    REQUIRE(rep.levels.size() == 3);
    CHECK(rep.levels[1].sup_c0 < rep.levels[0].sup_c0);
    CHECK(rep.levels[2].sup_c0 < rep.levels[1].sup_c0);
    CHECK(rep.levels[1].sup_c1 < rep.levels[0].sup_c1);
    CHECK(rep.levels[2].sup_c1 < rep.levels[1].sup_c1);
    CHECK(rep.levels[1].metric_dev < rep.levels[0].metric_dev);
    CHECK(rep.levels[2].metric_dev < rep.levels[1].metric_dev);
    // empirical rate: consecutive deviation ratio tracks the eps ratio
    const double r10 = rep.levels[1].sup_c0 / rep.levels[0].sup_c0;
    CHECK(r10 < 1.0);
    CHECK(r10 > 0.5 / 3.0);  // ratio eps ~ 0.5 within a factor 3
    CHECK(r10 < 0.5 * 3.0);
  }
  SECTION("epsilons must decrease") {
    const auto s = Submanifold::point_set(3, {vec3(0, 0, 0)});
    const auto w = ConvergenceWindow::build(s, vec3(0, 0, 0), 3.0, 0.5, 1.0);
    CHECK_THROWS_AS(convergence_report(s, vec3(0, 0, 0), w, {0.1, 0.2}),
                    DomainError);
  }
}
