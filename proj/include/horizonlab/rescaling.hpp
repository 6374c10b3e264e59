#pragma once

#include <cmath>
#include <vector>

#include "horizonlab/cylinder_model.hpp"
#include "horizonlab/errors.hpp"
#include "horizonlab/submanifold.hpp"
#include "horizonlab/vec.hpp"

namespace horizonlab {

/// Blow-up chart around a point of S: zeta -> base + eps * zeta, after the
/// canonical identification of tangent vectors at the anchor with ambient
/// vectors (parallel transport is the identity on components).
struct RescalingMap {
  Vec anchor;  // limit point on S
  Vec base;    // current center on S (defaults to the anchor)
  double epsilon = 0.0;

  Vec apply(const Vec& zeta) const { return base + epsilon * zeta; }
};

/// Rescaled potential eps^{gamma-m} * integral_S |map(zeta) - y|^{-gamma} dy.
inline double rescaled_potential(const Submanifold& shape,
                                 const RescalingMap& map, double gamma,
                                 const Vec& zeta, double rel_tol = 1e-10) {
  const auto& d = shape.dims();
  if (!(gamma > static_cast<double>(d.m)))
    throw DomainError("rescaled potential requires gamma > m");
  const Vec x = map.apply(zeta);
  const QuadratureRule rule = shape.kernel_quadrature(x, rel_tol, gamma);
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.points.size(); ++i)
    acc += rule.weights[i] * std::pow((x - rule.points[i]).squaredNorm(), -0.5 * gamma);
  return std::pow(map.epsilon, gamma - static_cast<double>(d.m)) * acc;
}

/// Pointwise limit of the rescaled potentials: the tangent-plane integral,
/// which depends on zeta only through its distance d to the plane:
/// d^{-(gamma-m)} * integral_{R^m} (1+|eta|^2)^{-gamma/2} d eta.
inline double plane_limit_potential(int m, double gamma, double distance) {
  if (!(distance > 0.0))
    throw DomainError("plane potential needs positive distance");
  if (!(gamma > static_cast<double>(m)))
    throw DomainError("plane potential diverges unless gamma > m");
  return std::pow(distance, -(gamma - static_cast<double>(m))) *
         plane_potential(m, gamma);
}

/// Box |zeta| <= beta1, dist(zeta, T_anchor S) >= beta2 with a deterministic
/// evaluation grid built in the adapted frame at the anchor.
struct ConvergenceWindow {
  double beta1 = 0.0;
  double beta2 = 0.0;
  double gamma = 0.0;
  NormalFrame frame;
  std::vector<Vec> grid;  // offsets zeta in ambient coordinates

  static ConvergenceWindow build(const Submanifold& shape, const Vec& anchor,
                                 double beta1, double beta2, double gamma,
                                 int tangent_samples = 3,
                                 int normal_samples = 6) {
    if (!(beta1 > 0.0) || !(beta2 > 0.0) || beta2 >= beta1)
      throw DomainError("window needs 0 < beta2 < beta1");
    ConvergenceWindow w;
    w.beta1 = beta1;
    w.beta2 = beta2;
    w.gamma = gamma;
    w.frame = shape.frame(anchor);
    const int n = shape.dims().n;
    const int m = shape.dims().m;

    std::vector<Vec> normal_dirs;
    const auto& nb = w.frame.normal;
    for (const auto& v : nb) normal_dirs.push_back(v);
    for (std::size_t i = 0; i + 1 < nb.size(); ++i)
      normal_dirs.push_back(((nb[i] + nb[i + 1]) / std::sqrt(2.0)).eval());

    std::vector<double> tangent_mags;
    for (int i = 0; i < (m > 0 ? tangent_samples : 1); ++i)
      tangent_mags.push_back(m > 0 ? beta1 * 0.5 * i / tangent_samples : 0.0);

    for (double tmag : tangent_mags) {
      const double hi = std::sqrt(beta1 * beta1 - tmag * tmag) * 0.95;
      if (hi <= beta2) continue;
      for (const auto& dir : normal_dirs) {
        for (int j = 0; j < normal_samples; ++j) {
          const double f = static_cast<double>(j) / (normal_samples - 1);
          const double dist = beta2 * std::pow(hi / beta2, f);
          Vec zeta = dist * dir;
          if (m > 0) zeta += tmag * w.frame.tangent[0];
          if (zeta.size() != n) throw DimensionError("window grid dimension");
          w.grid.push_back(zeta);
        }
      }
    }
    w.validate(shape.dims());
    return w;
  }

  void validate(const Dimensions& d) const {
    for (const auto& zeta : grid) {
      if (zeta.norm() > beta1 * (1.0 + 1e-12))
        throw DomainError("window grid point outside |zeta| <= beta1");
      if (normal_distance(zeta) < beta2 * (1.0 - 1e-12))
        throw DomainError("window grid point closer than beta2 to the plane");
    }
    (void)d;
  }

  double normal_distance(const Vec& zeta) const {
    double s = 0.0;
    for (const auto& v : frame.normal) {
      const double c = zeta.dot(v);
      s += c * c;
    }
    return std::sqrt(s);
  }
};

struct ConvergenceLevel {
  double epsilon = 0.0;
  double sup_c0 = 0.0;       // sup |F_k - F_inf|
  double sup_c1 = 0.0;       // sup over first differences
  double metric_dev = 0.0;   // sup |(1+F_k)^{4/(n-2)} - (1+F_inf)^{4/(n-2)}|
};

struct ConvergencePoint {
  int level = 0;
  Vec zeta;
  double f_k = 0.0;
  double f_limit = 0.0;
};

struct ConvergenceReport {
  std::vector<ConvergenceLevel> levels;
  std::vector<ConvergencePoint> table;
};

/// Evaluate the blow-up deviations over a window grid for a decreasing list
/// of epsilons (base point fixed at the anchor by default: the schedule
/// isolates the epsilon effect).
inline ConvergenceReport convergence_report(const Submanifold& shape,
                                            const Vec& anchor,
                                            const ConvergenceWindow& window,
                                            const std::vector<double>& epsilons,
                                            double rel_tol = 1e-10) {
  for (std::size_t i = 0; i + 1 < epsilons.size(); ++i)
    if (!(epsilons[i] > epsilons[i + 1]))
      throw DomainError("epsilons must be strictly decreasing");
  const auto& d = shape.dims();
  const double g = window.gamma;
  const double h = window.beta2 / 20.0;
  const double metric_exp = 4.0 / (d.n - 2);

  ConvergenceReport rep;
  for (std::size_t lev = 0; lev < epsilons.size(); ++lev) {
    RescalingMap map{anchor, anchor, epsilons[lev]};
    ConvergenceLevel out;
    out.epsilon = epsilons[lev];
    for (const auto& zeta : window.grid) {
      const double fk = rescaled_potential(shape, map, g, zeta, rel_tol);
      const double fl = plane_limit_potential(d.m, g, window.normal_distance(zeta));
      out.sup_c0 = std::max(out.sup_c0, std::abs(fk - fl));
      out.metric_dev = std::max(
          out.metric_dev, std::abs(std::pow(1.0 + fk, metric_exp) -
                                   std::pow(1.0 + fl, metric_exp)));
      rep.table.push_back({static_cast<int>(lev), zeta, fk, fl});
      // approximate C1 deviation by centered differences along the frame axes
      for (int axis = 0; axis < d.n; ++axis) {
        Vec e = Vec::Zero(d.n);
        if (axis < d.m)
          e = window.frame.tangent[axis];
        else
          e = window.frame.normal[axis - d.m];
        const Vec zp = zeta + h * e, zm = zeta - h * e;
        if (window.normal_distance(zp) <= 0.0 || window.normal_distance(zm) <= 0.0)
          continue;
        const double dk =
            (rescaled_potential(shape, map, g, zp, rel_tol) -
             rescaled_potential(shape, map, g, zm, rel_tol)) /
            (2.0 * h);
        const double dl =
            (plane_limit_potential(d.m, g, window.normal_distance(zp)) -
             plane_limit_potential(d.m, g, window.normal_distance(zm))) /
            (2.0 * h);
        out.sup_c1 = std::max(out.sup_c1, std::abs(dk - dl));
      }
    }
    rep.levels.push_back(out);
  }
  return rep;
}

}  // namespace horizonlab
