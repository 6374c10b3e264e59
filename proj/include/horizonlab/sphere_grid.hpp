#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "horizonlab/errors.hpp"
#include "horizonlab/gamma_function.hpp"
#include "horizonlab/quadrature.hpp"
#include "horizonlab/vec.hpp"

namespace horizonlab {

/// Structured grid on the unit sphere S^d in R^{d+1}: hyperspherical
/// midpoint cells with exact cell measures, so the weights sum to the
/// sphere area to machine precision.
struct SphereGrid {
  std::vector<Vec> points;      // unit vectors in R^{d+1}
  std::vector<double> weights;  // sum = |S^d|
};

namespace detail {

// Exact integral of sin^p over [a, b] (closed forms for p <= 2, GK above).
inline double sin_power_integral(int p, double a, double b) {
  switch (p) {
    case 0:
      return b - a;
    case 1:
      return std::cos(a) - std::cos(b);
    case 2:
      return 0.5 * (b - a) - 0.25 * (std::sin(2.0 * b) - std::sin(2.0 * a));
    default:
      return quad::integrate(
          [p](double t) { return std::pow(std::sin(t), p); }, a, b, 1e-14);
  }
}

}  // namespace detail

/// Build the grid. counts[i] is the node count of the i-th hyperspherical
/// angle; the last angle is periodic on [0, 2pi), the others are colatitudes
/// on (0, pi) sampled at cell midpoints.
inline SphereGrid sphere_grid(int d, const std::vector<int>& counts) {
  if (d < 1) throw ResolutionError("sphere grid needs dimension >= 1");
  if (static_cast<int>(counts.size()) != d)
    throw ResolutionError("sphere grid expects one count per angle");
  for (int c : counts)
    if (c < 1) throw ResolutionError("sphere grid counts must be positive");

  if (d == 1) {
    SphereGrid g;
    const int nphi = counts[0];
    const double dphi = 2.0 * std::numbers::pi / nphi;
    for (int j = 0; j < nphi; ++j) {
      const double phi = j * dphi;
      Vec p(2);
      p << std::cos(phi), std::sin(phi);
      g.points.push_back(p);
      g.weights.push_back(dphi);
    }
    return g;
  }

  const SphereGrid inner = sphere_grid(d - 1, {counts.begin() + 1, counts.end()});
  SphereGrid g;
  const int nth = counts[0];
  const double dth = std::numbers::pi / nth;
  for (int i = 0; i < nth; ++i) {
    const double theta = (i + 0.5) * dth;
    const double cell = detail::sin_power_integral(d - 1, i * dth, (i + 1) * dth);
    const double c = std::cos(theta), s = std::sin(theta);
    for (std::size_t j = 0; j < inner.points.size(); ++j) {
      Vec p(d + 1);
      p[0] = c;
      p.tail(d) = s * inner.points[j];
      g.points.push_back(p);
      // cell measure: integral of sin^{d-1} over the colatitude cell
      // times the inner grid's measure share
      g.weights.push_back(cell * inner.weights[j]);
    }
  }
  return g;
}

/// Default resolution helper: roughly `res` nodes per angle, last angle 2x.
inline SphereGrid sphere_grid(int d, int res) {
  std::vector<int> counts(static_cast<std::size_t>(d), res);
  counts.back() = 2 * res;
  return sphere_grid(d, counts);
}

}  // namespace horizonlab
