#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "horizonlab/quadrature.hpp"
#include "horizonlab/sphere_grid.hpp"

using namespace horizonlab;

TEST_CASE("adaptive rule integrates smooth functions") {
  const double v = quad::integrate([](double t) { return std::sin(t); }, 0.0,
                                   std::numbers::pi, 1e-12);
  CHECK(v == Catch::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("adaptive rule handles a near-singular kernel") {
  // integrand peaked like (d^2 + t^2)^{-2} near t = 0
  const double d = 1e-3;
  const double v = quad::integrate(
      [d](double t) { return std::pow(d * d + t * t, -2.0); }, 0.0, 1.0, 1e-10);
  // exact: (1/(2 d^2)) (t/(t^2+d^2) + atan(t/d)/d) at t=1
  const double exact =
      0.5 / (d * d) * (1.0 / (1.0 + d * d) + std::atan(1.0 / d) / d);
  CHECK(v == Catch::Approx(exact).epsilon(1e-9));
}

TEST_CASE("emitted nodes reproduce the adaptive estimate") {
  auto f = [](double t) { return quad::Values<1>{std::exp(-3.0 * t) / (0.01 + t)}; };
  const auto res = quad::integrate_adaptive<1>(f, 0.0, 2.0, 1e-11);
  std::vector<double> nodes, weights;
  quad::emit_nodes(res.panels, nodes, weights);
  double acc = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    acc += weights[i] * f(nodes[i])[0];
  CHECK(acc == Catch::Approx(res.value[0]).epsilon(1e-14));
}

TEST_CASE("panel budget failure reports achieved accuracy") {
  CHECK_THROWS_AS(quad::integrate([](double t) { return std::pow(std::abs(t), -0.9); },
                                  -1.0, 1.0, 1e-14, 8),
                  AccuracyError);
}

TEST_CASE("sphere grids have exact total weight") {
  for (int d = 1; d <= 3; ++d) {
    const SphereGrid g = sphere_grid(d, 8);
    double total = 0.0;
    for (double w : g.weights) total += w;
    CHECK(total == Catch::Approx(unit_sphere_area(d)).epsilon(1e-12));
    for (const auto& p : g.points)
      CHECK(p.norm() == Catch::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("sphere grid integrates coordinate moments") {
  const SphereGrid g = sphere_grid(2, {48, 96});
  double x2 = 0.0;
  for (std::size_t i = 0; i < g.points.size(); ++i)
    x2 += g.weights[i] * g.points[i][0] * g.points[i][0];
  // integral of x^2 over S^2 is |S^2|/3; midpoint rule is second order
  CHECK(x2 == Catch::Approx(4.0 * std::numbers::pi / 3.0).epsilon(1e-3));
}
