#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <variant>
#include <vector>

#include "horizonlab/dimensions.hpp"
#include "horizonlab/errors.hpp"
#include "horizonlab/gamma_function.hpp"
#include "horizonlab/quadrature.hpp"
#include "horizonlab/sphere_grid.hpp"
#include "horizonlab/vec.hpp"

namespace horizonlab {

/// Kernel-adapted discretization of the measure on S: sum of w_i f(y_i)
/// approximates the integral of f over S, with nodes concentrated where the
/// target kernel |x - y|^{-gamma} is largest.
struct QuadratureRule {
  std::vector<Vec> points;
  std::vector<double> weights;

  double total_weight() const {
    return std::accumulate(weights.begin(), weights.end(), 0.0);
  }
};

struct NearestResult {
  Vec point;
  double distance = 0.0;
  bool ambiguous = false;  // x on the medial axis; point is the tie-break pick
};

/// Orthonormal frame adapted to T_x S + N_x S. The normal basis is ordered
/// with the in-plane radial directions of the spherical blocks first, then
/// the flat ambient directions; fiber charts rely on that order.
struct NormalFrame {
  Vec base;
  std::vector<Vec> tangent;
  std::vector<Vec> normal;
};

struct PointSetShape {
  std::vector<Vec> points;
};

/// Round sphere S^m of radius R embedded in the first m+1 coordinates.
struct RoundSphereShape {
  double radius = 1.0;
};

/// Product of round spheres occupying consecutive coordinate blocks,
/// block b having dimension block_m[b] and radius radii[b].
struct ProductShape {
  std::vector<int> block_m;
  std::vector<double> radii;
};

class Submanifold {
 public:
  using Shape = std::variant<PointSetShape, RoundSphereShape, ProductShape>;

  static Submanifold point_set(int n, std::vector<Vec> points) {
    if (points.empty()) throw DomainError("point set must be nonempty");
    for (const auto& p : points)
      if (p.size() != n) throw DimensionError("point has wrong ambient dimension");
    for (std::size_t i = 0; i < points.size(); ++i)
      for (std::size_t j = i + 1; j < points.size(); ++j)
        if ((points[i] - points[j]).norm() == 0.0)
          throw DomainError("point set entries must be pairwise distinct");
    Submanifold s;
    s.dims_ = make_dimensions(n, 0);
    s.shape_ = PointSetShape{std::move(points)};
    return s;
  }

  static Submanifold round_sphere(int n, int m, double radius) {
    if (m < 1) throw DimensionError("round sphere needs m >= 1");
    if (!(radius > 0.0)) throw DomainError("sphere radius must be positive");
    Submanifold s;
    s.dims_ = make_dimensions(n, m);
    s.shape_ = RoundSphereShape{radius};
    return s;
  }

  static Submanifold product_of_spheres(int n, std::vector<int> block_m,
                                        std::vector<double> radii) {
    if (block_m.size() != radii.size() || block_m.size() < 2)
      throw DimensionError("product shape needs >= 2 blocks with matching radii");
    int m = 0, used = 0;
    for (std::size_t b = 0; b < block_m.size(); ++b) {
      if (block_m[b] < 1) throw DimensionError("product block dimension must be >= 1");
      if (!(radii[b] > 0.0)) throw DomainError("product block radius must be positive");
      m += block_m[b];
      used += block_m[b] + 1;
    }
    if (used > n) throw DimensionError("product blocks do not fit in ambient space");
    Submanifold s;
    s.dims_ = make_dimensions(n, m);
    s.shape_ = ProductShape{std::move(block_m), std::move(radii)};
    return s;
  }

  const Dimensions& dims() const { return dims_; }
  const Shape& shape() const { return shape_; }

  bool is_point_set() const { return std::holds_alternative<PointSetShape>(shape_); }

  const std::vector<Vec>& points() const {
    return std::get<PointSetShape>(shape_).points;
  }

  /// Spherical blocks as (dimension, radius, coordinate offset); empty for
  /// point sets.
  struct Block {
    int m;
    double radius;
    int offset;
  };
  std::vector<Block> blocks() const {
    std::vector<Block> out;
    if (const auto* rs = std::get_if<RoundSphereShape>(&shape_)) {
      out.push_back({dims_.m, rs->radius, 0});
    } else if (const auto* pr = std::get_if<ProductShape>(&shape_)) {
      int off = 0;
      for (std::size_t b = 0; b < pr->block_m.size(); ++b) {
        out.push_back({pr->block_m[b], pr->radii[b], off});
        off += pr->block_m[b] + 1;
      }
    }
    return out;
  }

  /// Largest radius for which the normal exponential map embeds.
  double reach() const {
    if (const auto* ps = std::get_if<PointSetShape>(&shape_)) {
      if (ps->points.size() < 2) return std::numeric_limits<double>::infinity();
      double dmin = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < ps->points.size(); ++i)
        for (std::size_t j = i + 1; j < ps->points.size(); ++j)
          dmin = std::min(dmin, (ps->points[i] - ps->points[j]).norm());
      return 0.5 * dmin;
    }
    double r = std::numeric_limits<double>::infinity();
    for (const auto& b : blocks()) r = std::min(r, b.radius);
    return r;
  }

  /// m-dimensional measure; counting measure for point sets.
  double total_measure() const {
    if (const auto* ps = std::get_if<PointSetShape>(&shape_))
      return static_cast<double>(ps->points.size());
    double a = 1.0;
    for (const auto& b : blocks())
      a *= unit_sphere_area(b.m) * std::pow(b.radius, b.m);
    return a;
  }

  double diameter() const {
    if (const auto* ps = std::get_if<PointSetShape>(&shape_)) {
      double d = 0.0;
      for (std::size_t i = 0; i < ps->points.size(); ++i)
        for (std::size_t j = i + 1; j < ps->points.size(); ++j)
          d = std::max(d, (ps->points[i] - ps->points[j]).norm());
      return d;
    }
    double s = 0.0;
    for (const auto& b : blocks()) s += b.radius * b.radius;
    return 2.0 * std::sqrt(s);
  }

  NearestResult nearest(const Vec& x) const {
    check_ambient(x);
    if (const auto* ps = std::get_if<PointSetShape>(&shape_)) {
      NearestResult best{ps->points[0], (x - ps->points[0]).norm(), false};
      bool tie = false;
      for (std::size_t i = 1; i < ps->points.size(); ++i) {
        const double d = (x - ps->points[i]).norm();
        if (d < best.distance) {
          best.point = ps->points[i];
          best.distance = d;
          tie = false;
        } else if (d == best.distance) {
          tie = true;
          if (lex_less(ps->points[i], best.point)) best.point = ps->points[i];
        }
      }
      best.ambiguous = tie;
      return best;
    }
    NearestResult res;
    res.point = Vec::Zero(dims_.n);
    double d2 = 0.0;
    for (const auto& b : blocks()) {
      const Vec xb = x.segment(b.offset, b.m + 1);
      const double rho = xb.norm();
      if (rho < kMedialTol) {
        // medial axis: every block point is equidistant; pick the block axis
        res.ambiguous = true;
        res.point[b.offset] = b.radius;
        d2 += rho * rho + b.radius * b.radius;
      } else {
        res.point.segment(b.offset, b.m + 1) = (b.radius / rho) * xb;
        d2 += (rho - b.radius) * (rho - b.radius);
      }
    }
    const int flat_begin = flat_offset();
    for (int i = flat_begin; i < dims_.n; ++i) d2 += x[i] * x[i];
    res.distance = std::sqrt(d2);
    return res;
  }

  bool contains(const Vec& x, double tol = 1e-12) const {
    return nearest(x).distance <= tol;
  }

  /// Deterministic adapted frame at a point of S.
  NormalFrame frame(const Vec& x, double tol = 1e-10) const {
    check_ambient(x);
    NormalFrame f;
    f.base = x;
    if (const auto* ps = std::get_if<PointSetShape>(&shape_)) {
      bool found = false;
      for (const auto& p : ps->points)
        if ((x - p).norm() <= tol) found = true;
      if (!found) throw DomainError("frame: point is not on the submanifold");
      for (int i = 0; i < dims_.n; ++i) f.normal.push_back(Vec::Unit(dims_.n, i));
      return f;
    }
    if (nearest(x).distance > tol)
      throw DomainError("frame: point is not on the submanifold");
    // radial normals first (one per block), then block tangents, then flat
    // normals; tangents by Gram-Schmidt of the block coordinate axes.
    std::vector<Vec> radial;
    for (const auto& b : blocks()) {
      Vec r = Vec::Zero(dims_.n);
      r.segment(b.offset, b.m + 1) = x.segment(b.offset, b.m + 1).normalized();
      radial.push_back(r);
      std::vector<Vec> basis{r};
      for (int i = b.offset; i < b.offset + b.m + 1; ++i) {
        if (static_cast<int>(basis.size()) == b.m + 1) break;
        Vec v = Vec::Unit(dims_.n, i);
        for (const auto& u : basis) v -= v.dot(u) * u;
        const double nrm = v.norm();
        if (nrm > 1e-8) {
          v /= nrm;
          // re-orthogonalize once for near-degenerate axes
          for (const auto& u : basis) v -= v.dot(u) * u;
          v.normalize();
          basis.push_back(v);
          f.tangent.push_back(v);
        }
      }
    }
    f.normal = std::move(radial);
    for (int i = flat_offset(); i < dims_.n; ++i)
      f.normal.push_back(Vec::Unit(dims_.n, i));
    return f;
  }

  /// Point of the radius-a tube over (x, omega): x + a omega.
  Vec tube_point(const Vec& x, const Vec& omega, double a) const {
    if (!(a > 0.0)) throw DomainError("tube radius must be positive");
    if (a >= reach()) throw ReachError("tube radius exceeds the reach of S");
    return x + a * omega;
  }

  /// Euclidean mean curvature of the radius-a tube at x + a omega, with
  /// respect to the outward normal omega:
  ///   (n - m - 1)/a + sum_b m_b c_b / (R_b + a c_b),  c_b = <omega, radial_b>.
  /// For point sets this is the round sphere value (n - 1)/a.
  double tube_mean_curvature(const Vec& x, const Vec& omega, double a) const {
    if (!(a > 0.0)) throw DomainError("tube radius must be positive");
    if (a >= reach()) throw ReachError("tube radius exceeds the reach of S");
    double h = static_cast<double>(dims_.fiber_dimension()) / a;
    for (const auto& b : blocks()) {
      const Vec rb = x.segment(b.offset, b.m + 1).normalized();
      const double c = omega.segment(b.offset, b.m + 1).dot(rb);
      h += b.m * c / (b.radius + a * c);
    }
    return h;
  }

  /// Build a rule resolving |x - y|^{-gamma} (and the one-order-steeper
  /// gradient kernel) to the given relative tolerance.
  QuadratureRule kernel_quadrature(const Vec& x, double rel_tol,
                                   double gamma) const {
    check_ambient(x);
    QuadratureRule rule;
    if (const auto* ps = std::get_if<PointSetShape>(&shape_)) {
      for (const auto& p : ps->points) {
        if ((x - p).norm() == 0.0)
          throw SingularityError("evaluation point lies on the submanifold");
        rule.points.push_back(p);
        rule.weights.push_back(1.0);
      }
      return rule;
    }
    const auto bl = blocks();
    // distance contribution that no block can reduce: flat coordinates
    double base_d2 = 0.0;
    for (int i = flat_offset(); i < dims_.n; ++i) base_d2 += x[i] * x[i];
    // per-block minimum possible squared distance (for worst-case adaptation)
    std::vector<double> min_d2(bl.size());
    for (std::size_t b = 0; b < bl.size(); ++b) {
      const double rho = x.segment(bl[b].offset, bl[b].m + 1).norm();
      const double gap = rho - bl[b].radius;
      min_d2[b] = gap * gap;
    }
    {
      double d2 = base_d2;
      for (double v : min_d2) d2 += v;
      if (d2 == 0.0)
        throw SingularityError("evaluation point lies on the submanifold");
    }
    const double tol_b = rel_tol / static_cast<double>(bl.size());

    // per block: adaptive colatitude rule against the most singular case
    struct BlockRule {
      std::vector<double> alpha, w1;  // colatitude nodes / 1d weights
    };
    std::vector<BlockRule> rules(bl.size());
    for (std::size_t b = 0; b < bl.size(); ++b) {
      const double rho = x.segment(bl[b].offset, bl[b].m + 1).norm();
      const double R = bl[b].radius;
      double others = base_d2;
      for (std::size_t c = 0; c < bl.size(); ++c)
        if (c != b) others += min_d2[c];
      const int mp = bl[b].m - 1;
      // cancellation-free distance: (rho-R)^2 + 4 rho R sin^2(alpha/2)
      auto integrand = [&](double alpha) {
        const double sh = std::sin(0.5 * alpha);
        const double d2 =
            others + (rho - R) * (rho - R) + 4.0 * rho * R * sh * sh;
        const double s = std::pow(std::sin(alpha), mp);
        return quad::Values<2>{s * std::pow(d2, -0.5 * gamma),
                               s * std::pow(d2, -0.5 * (gamma + 2.0))};
      };
      const auto res = quad::integrate_adaptive<2>(integrand, 0.0,
                                                   std::numbers::pi, tol_b);
      quad::emit_nodes(res.panels, rules[b].alpha, rules[b].w1);
    }

    // tensor the block rules; each block node expands to a ring on S^{m_b-1}
    struct RingGrid {
      std::vector<Vec> dirs;  // unit vectors in R^{m_b-1+1} = R^{m_b}
      std::vector<double> w;  // sum = |S^{m_b-1}|
    };
    std::vector<RingGrid> rings(bl.size());
    for (std::size_t b = 0; b < bl.size(); ++b) {
      if (bl[b].m == 1) {
        rings[b].dirs = {Vec::Constant(1, 1.0), Vec::Constant(1, -1.0)};
        rings[b].w = {1.0, 1.0};  // |S^0| = 2 split over the mirror pair
      } else {
        const SphereGrid sg = sphere_grid(bl[b].m - 1, 12);
        rings[b].dirs = sg.points;
        rings[b].w = sg.weights;
      }
    }
    // orthonormal ring frames per block: pole toward x, ring directions after
    std::vector<Mat> frames(bl.size());
    for (std::size_t b = 0; b < bl.size(); ++b)
      frames[b] = block_pole_frame(x, bl[b]);

    // iterate over the product of (colatitude node, ring node) per block
    std::size_t total = 1;
    std::vector<std::size_t> radix;
    for (std::size_t b = 0; b < bl.size(); ++b) {
      radix.push_back(rules[b].alpha.size() * rings[b].dirs.size());
      total *= radix.back();
    }
    rule.points.reserve(total);
    rule.weights.reserve(total);
    for (std::size_t flat = 0; flat < total; ++flat) {
      std::size_t rem = flat;
      Vec y = Vec::Zero(dims_.n);
      double w = 1.0;
      for (std::size_t b = 0; b < bl.size(); ++b) {
        const std::size_t local = rem % radix[b];
        rem /= radix[b];
        const std::size_t ia = local % rules[b].alpha.size();
        const std::size_t ir = local / rules[b].alpha.size();
        const double alpha = rules[b].alpha[ia];
        const double R = bl[b].radius;
        const int mb = bl[b].m;
        // y_b = R (cos a * pole + sin a * ring direction)
        Vec local_pt = frames[b].col(0) * std::cos(alpha);
        const Vec& rd = rings[b].dirs[ir];
        for (int j = 0; j < mb; ++j)
          local_pt += frames[b].col(j + 1) * (std::sin(alpha) * rd[j]);
        y.segment(bl[b].offset, mb + 1) = R * local_pt;
        w *= std::pow(R, mb) * std::pow(std::sin(alpha), mb - 1) *
             rules[b].w1[ia] * rings[b].w[ir];
      }
      rule.points.push_back(std::move(y));
      rule.weights.push_back(w);
    }
    return rule;
  }

  /// Clusters of a point set, linked when closer than link_radius.
  /// Connected shapes are a single component.
  std::vector<std::vector<int>> component_indices(double link_radius) const {
    if (const auto* ps = std::get_if<PointSetShape>(&shape_)) {
      const int k = static_cast<int>(ps->points.size());
      std::vector<int> parent(k);
      std::iota(parent.begin(), parent.end(), 0);
      std::function<int(int)> find = [&](int i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
      };
      for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j)
          if ((ps->points[i] - ps->points[j]).norm() < link_radius)
            parent[find(i)] = find(j);
      std::vector<std::vector<int>> comps;
      std::vector<int> root_of(k, -1);
      for (int i = 0; i < k; ++i) {
        const int r = find(i);
        if (root_of[r] < 0) {
          root_of[r] = static_cast<int>(comps.size());
          comps.emplace_back();
        }
        comps[root_of[r]].push_back(i);
      }
      return comps;
    }
    return {{0}};
  }

  Submanifold sub_point_set(const std::vector<int>& indices) const {
    const auto& ps = std::get<PointSetShape>(shape_);
    std::vector<Vec> pts;
    for (int i : indices) pts.push_back(ps.points[i]);
    return point_set(dims_.n, std::move(pts));
  }

 private:
  static constexpr double kMedialTol = 1e-14;

  Submanifold() = default;

  void check_ambient(const Vec& x) const {
    if (x.size() != dims_.n)
      throw DimensionError("vector has wrong ambient dimension");
  }

  int flat_offset() const {
    int off = 0;
    for (const auto& b : blocks()) off = std::max(off, b.offset + b.m + 1);
    return off;
  }

  // Orthonormal basis of the block plane with column 0 pointing toward the
  // projection of x (or the first axis when x projects to the center).
  Mat block_pole_frame(const Vec& x, const Block& b) const {
    const int dim = b.m + 1;
    Vec pole = x.segment(b.offset, dim);
    if (pole.norm() < kMedialTol) pole = Vec::Unit(dim, 0);
    pole.normalize();
    Mat f(dim, dim);
    f.col(0) = pole;
    int have = 1;
    for (int i = 0; i < dim && have < dim; ++i) {
      Vec v = Vec::Unit(dim, i);
      for (int c = 0; c < have; ++c) v -= v.dot(f.col(c)) * f.col(c);
      const double nrm = v.norm();
      if (nrm > 1e-8) {
        v /= nrm;
        for (int c = 0; c < have; ++c) v -= v.dot(f.col(c)) * f.col(c);
        v.normalize();
        f.col(have++) = v;
      }
    }
    return f;
  }

  Dimensions dims_;
  Shape shape_;
};

}  // namespace horizonlab
