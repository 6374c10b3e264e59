#pragma once

#include <cmath>
#include <numbers>

namespace horizonlab {

/// Gamma function by the Lanczos approximation (g = 7, 9 coefficients).
/// Relative error below ~2e-13 on the positive real axis, which is all we
/// need: every caller passes half-integer arguments well away from the poles.
inline double gamma_fn(double x) {
  static constexpr double coeff[9] = {
      0.99999999999980993,      676.5203681218851,     -1259.1392167224028,
      771.32342877765313,      -176.61502916214059,    12.507343278686905,
      -0.13857109526572012,     9.9843695780195716e-6, 1.5056327351493116e-7};
  if (x < 0.5) {
    // reflection formula
    return std::numbers::pi / (std::sin(std::numbers::pi * x) * gamma_fn(1.0 - x));
  }
  const double z = x - 1.0;
  double a = coeff[0];
  for (int i = 1; i < 9; ++i) a += coeff[i] / (z + i);
  const double t = z + 7.5;
  return std::sqrt(2.0 * std::numbers::pi) * std::pow(t, z + 0.5) * std::exp(-t) * a;
}

/// Surface area of the unit k-sphere S^k in R^{k+1}: 2 pi^{(k+1)/2} / Gamma((k+1)/2).
inline double unit_sphere_area(int k) {
  const double h = 0.5 * (k + 1);
  return 2.0 * std::pow(std::numbers::pi, h) / gamma_fn(h);
}

}  // namespace horizonlab
