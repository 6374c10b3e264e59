#pragma once

#include <cmath>
#include <numbers>

#include "horizonlab/dimensions.hpp"
#include "horizonlab/errors.hpp"
#include "horizonlab/gamma_function.hpp"

namespace horizonlab {

/// Dimensionless ratio controlling where the flat-model cylinder becomes
/// minimal: (n-2)(n-m-1) / (2(n-1)(n-m-2)). Always in (0, 1) for valid dims.
inline double curvature_ratio(const Dimensions& dims) {
  dims.validate();
  const double num = static_cast<double>(dims.n - 2) * (dims.n - dims.m - 1);
  const double den = 2.0 * (dims.n - 1) * (dims.n - dims.m - 2);
  return num / den;
}

/// Integral of (1 + |eta|^2)^{-gamma/2} over R^m, in closed Beta/Gamma form
/// pi^{m/2} Gamma((gamma-m)/2) / Gamma(gamma/2). Finite iff gamma > m.
inline double plane_potential(int m, double gamma) {
  if (m < 0) throw DimensionError("plane_potential: m must be >= 0");
  if (m == 0) return 1.0;
  if (gamma <= static_cast<double>(m))
    throw DimensionError("plane_potential: integral diverges unless gamma > m");
  return std::pow(std::numbers::pi, 0.5 * m) * gamma_fn(0.5 * (gamma - m)) /
         gamma_fn(0.5 * gamma);
}

/// Specialization with the default kernel exponent gamma = n - 2.
inline double plane_potential(const Dimensions& dims) {
  dims.validate();
  return plane_potential(dims.m, static_cast<double>(dims.n - 2));
}

/// Radius at which the model cylinder is minimal in the blow-up metric:
/// (D (1 - C) / C)^{1/(n-m-2)}. Equals 1 whenever m = 0.
inline double critical_radius(const Dimensions& dims) {
  const double C = curvature_ratio(dims);
  const double D = plane_potential(dims);
  return std::pow(D * (1.0 - C) / C, 1.0 / dims.decay_exponent());
}

/// Conformal factor of the flat model on the cylinder of radius a:
/// 1 + a^{-(n-m-2)} D.
inline double cylinder_conformal_factor(const Dimensions& dims, double a) {
  dims.validate();
  if (!(a > 0.0)) throw DomainError("cylinder radius must be positive");
  return 1.0 + std::pow(a, -static_cast<double>(dims.decay_exponent())) *
                   plane_potential(dims);
}

/// Mean curvature of the radius-a cylinder around the tangent plane in the
/// blow-up metric. Negative below the critical radius, zero there, positive
/// above.
inline double cylinder_mean_curvature(const Dimensions& dims, double a) {
  dims.validate();
  if (!(a > 0.0)) throw DomainError("cylinder radius must be positive");
  const double g = static_cast<double>(dims.decay_exponent());
  const double D = plane_potential(dims);
  const double t = std::pow(a, -g) * D;
  const double u = 1.0 + t;
  const double ratio = 2.0 * (dims.n - 1) / static_cast<double>(dims.n - 2);
  return std::pow(u, -2.0 / (dims.n - 2)) * (1.0 / a) *
         ((g + 1.0) - g * ratio * t / u);
}

/// Bundle of the model constants for one (n, m).
struct CylinderModel {
  Dimensions dims;
  double ratio;            // curvature_ratio, in (0, 1)
  double potential;        // plane_potential with gamma = n - 2
  double critical;         // critical_radius

  static CylinderModel build(const Dimensions& dims) {
    return CylinderModel{dims, curvature_ratio(dims), plane_potential(dims),
                         critical_radius(dims)};
  }
};

}  // namespace horizonlab
