#pragma once

// Test-only oracles, kept independent of the library code paths they check.

#include <array>
#include <cmath>
#include <vector>

#include "horizonlab/submanifold.hpp"

namespace horizonlab::test_oracles {

/// Mean curvature of the radius-a tube at x + a omega by central differencing
/// of a local discrete area functional under a bump-shaped normal variation.
/// Supports the shapes the tests need: point sets in R^3 (two fiber chart
/// angles) and circles in R^4 (one base angle + two fiber chart angles).
/// The variation step follows h = 1e-4 * a with one Richardson extrapolation.
inline double tube_mean_curvature_fd(const Submanifold& shape, const Vec& x,
                                     const Vec& omega, double a,
                                     int cells = 16, double width = 4e-3) {
  const int n = shape.dims().n;
  const int m = shape.dims().m;
  const int knorm = n - m;
  const int nd = m + (knorm - 1);  // chart dimension of the tube
  if (!((m == 0 && nd == 2) || (m == 1 && nd == 3)))
    throw DomainError("oracle supports m=0,n=3 and m=1,n=4 only");

  const auto frame = shape.frame(x);
  Vec comp0(knorm);
  for (int i = 0; i < knorm; ++i) comp0[i] = omega.dot(frame.normal[i]);

  // gnomonic chart directions on the unit sphere of normal components
  std::vector<Vec> tang;
  for (int i = 0; i < knorm && static_cast<int>(tang.size()) < 2; ++i) {
    Vec v = Vec::Unit(knorm, i);
    v -= v.dot(comp0) * comp0;
    for (const auto& t : tang) v -= v.dot(t) * t;
    if (v.norm() > 1e-6) tang.push_back(v.normalized());
  }

  double radius = 0.0, theta0 = 0.0;
  if (m == 1) {
    radius = shape.blocks()[0].radius;
    theta0 = std::atan2(x[1], x[0]);
  }

  struct SurfacePoint {
    Vec point;
    Vec normal;
  };
  auto embed = [&](double s, double al, double be) -> SurfacePoint {
    Vec comp = comp0 + al * tang[0] + be * tang[1];
    comp.normalize();
    Vec om = Vec::Zero(n);
    if (m == 1) {
      const double th = theta0 + s / radius;
      Vec base = Vec::Zero(n);
      base[0] = radius * std::cos(th);
      base[1] = radius * std::sin(th);
      om[0] = comp[0] * std::cos(th);
      om[1] = comp[0] * std::sin(th);
      for (int i = 2; i < n; ++i) om[i] = comp[i - 1];
      return {base + a * om, om};
    }
    for (int i = 0; i < knorm; ++i) om += comp[i] * frame.normal[i];
    return {x + a * om, om};
  };

  const int np = 2 * cells + 1;
  const double dxi = 2.0 * width / (2 * cells);
  auto coord = [&](int i) { return -width + i * dxi; };
  auto bump1 = [&](double xi) {
    const double c = std::cos(0.5 * std::numbers::pi * xi / width);
    return c * c;
  };

  // precompute surface points and normals on the chart grid
  const int total = (nd == 3) ? np * np * np : np * np;
  std::vector<Vec> pts(total), nrm(total);
  std::vector<double> bmp(total);
  auto idx = [&](int i, int j, int k) {
    return nd == 3 ? (i * np + j) * np + k : j * np + k;
  };
  for (int i = 0; i < (nd == 3 ? np : 1); ++i)
    for (int j = 0; j < np; ++j)
      for (int k = 0; k < np; ++k) {
        const double s = nd == 3 ? coord(i) : 0.0;
        const auto sp = embed(s, coord(j), coord(k));
        const int q = idx(i, j, k);
        pts[q] = sp.point;
        nrm[q] = sp.normal;
        bmp[q] = (nd == 3 ? bump1(s) : 1.0) * bump1(coord(j)) * bump1(coord(k));
      }

  // discrete area of the displaced patch; cell tangents are the averages of
  // the parallel edges (second-order accurate)
  auto area = [&](double t) {
    double acc = 0.0;
    if (nd == 2) {
      for (int j = 0; j < np - 1; ++j)
        for (int k = 0; k < np - 1; ++k) {
          auto P = [&](int jj, int kk) {
            const int q = idx(0, jj, kk);
            return (pts[q] + t * bmp[q] * nrm[q]).eval();
          };
          const Vec e1 = 0.5 * (P(j + 1, k) - P(j, k) + P(j + 1, k + 1) - P(j, k + 1));
          const Vec e2 = 0.5 * (P(j, k + 1) - P(j, k) + P(j + 1, k + 1) - P(j + 1, k));
          const double g11 = e1.dot(e1), g22 = e2.dot(e2), g12 = e1.dot(e2);
          acc += std::sqrt(std::max(0.0, g11 * g22 - g12 * g12));
        }
      return acc;
    }
    for (int i = 0; i < np - 1; ++i)
      for (int j = 0; j < np - 1; ++j)
        for (int k = 0; k < np - 1; ++k) {
          auto P = [&](int ii, int jj, int kk) {
            const int q = idx(ii, jj, kk);
            return (pts[q] + t * bmp[q] * nrm[q]).eval();
          };
          Vec e1 = Vec::Zero(n), e2 = Vec::Zero(n), e3 = Vec::Zero(n);
          for (int b1 = 0; b1 < 2; ++b1)
            for (int b2 = 0; b2 < 2; ++b2) {
              e1 += 0.25 * (P(i + 1, j + b1, k + b2) - P(i, j + b1, k + b2));
              e2 += 0.25 * (P(i + b1, j + 1, k + b2) - P(i + b1, j, k + b2));
              e3 += 0.25 * (P(i + b1, j + b2, k + 1) - P(i + b1, j + b2, k));
            }
          Eigen::Matrix3d g;
          g << e1.dot(e1), e1.dot(e2), e1.dot(e3), e2.dot(e1), e2.dot(e2),
              e2.dot(e3), e3.dot(e1), e3.dot(e2), e3.dot(e3);
          acc += std::sqrt(std::max(0.0, g.determinant()));
        }
    return acc;
  };

  // bump mass with exactly the cell geometry the area quadrature uses
  double mass = 0.0;
  if (nd == 2) {
    for (int j = 0; j < np - 1; ++j)
      for (int k = 0; k < np - 1; ++k) {
        auto P = [&](int jj, int kk) { return pts[idx(0, jj, kk)]; };
        const Vec e1 = 0.5 * (P(j + 1, k) - P(j, k) + P(j + 1, k + 1) - P(j, k + 1));
        const Vec e2 = 0.5 * (P(j, k + 1) - P(j, k) + P(j + 1, k + 1) - P(j + 1, k));
        const double g11 = e1.dot(e1), g22 = e2.dot(e2), g12 = e1.dot(e2);
        const double cell = std::sqrt(std::max(0.0, g11 * g22 - g12 * g12));
        const double bavg = 0.25 * (bmp[idx(0, j, k)] + bmp[idx(0, j + 1, k)] +
                                    bmp[idx(0, j, k + 1)] + bmp[idx(0, j + 1, k + 1)]);
        mass += cell * bavg;
      }
  } else {
    for (int i = 0; i < np - 1; ++i)
      for (int j = 0; j < np - 1; ++j)
        for (int k = 0; k < np - 1; ++k) {
          Vec e1 = Vec::Zero(n), e2 = Vec::Zero(n), e3 = Vec::Zero(n);
          for (int b1 = 0; b1 < 2; ++b1)
            for (int b2 = 0; b2 < 2; ++b2) {
              e1 += 0.25 * (pts[idx(i + 1, j + b1, k + b2)] - pts[idx(i, j + b1, k + b2)]);
              e2 += 0.25 * (pts[idx(i + b1, j + 1, k + b2)] - pts[idx(i + b1, j, k + b2)]);
              e3 += 0.25 * (pts[idx(i + b1, j + b2, k + 1)] - pts[idx(i + b1, j + b2, k)]);
            }
          Eigen::Matrix3d g;
          g << e1.dot(e1), e1.dot(e2), e1.dot(e3), e2.dot(e1), e2.dot(e2),
              e2.dot(e3), e3.dot(e1), e3.dot(e2), e3.dot(e3);
          double bavg = 0.0;
          for (int b1 = 0; b1 < 2; ++b1)
            for (int b2 = 0; b2 < 2; ++b2)
              for (int b3 = 0; b3 < 2; ++b3)
                bavg += 0.125 * bmp[idx(i + b1, j + b2, k + b3)];
          mass += std::sqrt(std::max(0.0, g.determinant())) * bavg;
        }
  }

  auto slope = [&](double h) { return (area(h) - area(-h)) / (2.0 * h); };
  const double h = 1e-4 * a;
  const double coarse = slope(h);
  const double fine = slope(0.5 * h);
  return (4.0 * fine - coarse) / 3.0 / mass;
}

}  // namespace horizonlab::test_oracles
