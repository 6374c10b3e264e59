#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "horizonlab/errors.hpp"
#include "horizonlab/sphere_grid.hpp"
#include "horizonlab/submanifold.hpp"
#include "horizonlab/vec.hpp"

namespace horizonlab {

enum class GridMode { full, reduced_1d };

/// Product discretization of the unit normal bundle: base nodes on S with
/// adapted frames and measure weights, fiber nodes on the unit sphere of the
/// normal space. In reduced_1d mode the fiber is a single colatitude profile
/// (valid only for configurations with the full rotational symmetry), and the
/// base collapses to one representative carrying the total measure.
///
/// Fiber charts are pole-aligned with the first normal direction (the
/// in-plane radial direction for spherical shapes), so a colatitude profile
/// on the reduced grid and a symmetric field on the full grid discretize the
/// same functional.
struct UNSGrid {
  explicit UNSGrid(Submanifold s) : shape(std::move(s)) {}

  struct Direction {
    int plus = -1;        // node index of the + neighbor
    int minus = -1;       // node index of the - neighbor (may equal self at a pole)
    double inv_two_h = 0; // derivative = inv_two_h * (psi[plus] - psi[minus])
    int block = -1;       // -1: fiber direction; else index of the base block
    Vec unit;             // world unit vector of the chart direction
  };

  Submanifold shape;
  GridMode mode = GridMode::full;
  int fiber_dim = 0;       // n - m - 1
  int base_count = 0;
  int fiber_count = 0;
  std::vector<int> fiber_counts;  // as requested, for rebuilds

  // per node (index = base * fiber_count + fiber)
  std::vector<Vec> base_point;
  std::vector<Vec> omega;                 // unit normal direction, world coords
  std::vector<double> weight;             // base x fiber measure share
  std::vector<std::vector<double>> radial; // <omega, radial_b> per block
  std::vector<std::vector<Direction>> dirs;
  std::vector<int> base_index, fiber_index;

  // reverse adjacency: for each j, the (node i, direction d, sign) triples
  // where j appears as a stencil neighbor of i
  struct Incidence {
    int node;
    int dir;
    double sign;
  };
  std::vector<std::vector<Incidence>> incident;

  int size() const { return static_cast<int>(omega.size()); }

  const Submanifold::Block* blocks_data() const { return blocks_.data(); }
  int num_blocks() const { return static_cast<int>(blocks_.size()); }
  const std::vector<Submanifold::Block>& blocks() const { return blocks_; }

  std::vector<Submanifold::Block> blocks_;

  void build_incidence() {
    incident.assign(omega.size(), {});
    for (int i = 0; i < size(); ++i)
      for (std::size_t d = 0; d < dirs[i].size(); ++d) {
        incident[dirs[i][d].plus].push_back({i, static_cast<int>(d), 1.0});
        incident[dirs[i][d].minus].push_back({i, static_cast<int>(d), -1.0});
      }
  }
};

namespace detail {

struct FiberChart {
  int k = 0;
  std::vector<Vec> comps;                 // normal-basis components per node
  std::vector<double> weights;            // sum = |S^k|
  struct Dir {
    int plus, minus;
    double inv_two_h;
  };
  std::vector<std::vector<Dir>> dirs;
  std::vector<std::vector<Vec>> dir_comps;  // unit tangent components
};

inline FiberChart fiber_chart_reduced(int k, int count) {
  if (count < 8) throw ResolutionError("fiber count must be >= 8");
  FiberChart c;
  c.k = k;
  const double dth = std::numbers::pi / count;
  const double ring = (k >= 2) ? unit_sphere_area(k - 1) : 2.0;
  for (int i = 0; i < count; ++i) {
    const double th = (i + 0.5) * dth;
    Vec comp = Vec::Zero(k + 1);
    comp[0] = std::cos(th);
    comp[1] = std::sin(th);
    c.comps.push_back(comp);
    c.weights.push_back(ring * detail::sin_power_integral(k - 1, i * dth, (i + 1) * dth));
    Vec tang = Vec::Zero(k + 1);
    tang[0] = -std::sin(th);
    tang[1] = std::cos(th);
    c.dir_comps.push_back({tang});
    FiberChart::Dir d;
    d.plus = (i + 1 < count) ? i + 1 : i;   // even reflection at the poles
    d.minus = (i > 0) ? i - 1 : i;
    d.inv_two_h = 1.0 / (2.0 * dth);
    c.dirs.push_back({d});
  }
  return c;
}

inline FiberChart fiber_chart_full(int k, const std::vector<int>& counts) {
  if (static_cast<int>(counts.size()) != k)
    throw ResolutionError("full fiber chart needs one count per angle");
  for (int cnt : counts)
    if (cnt < 8) throw ResolutionError("fiber counts must be >= 8");
  FiberChart c;
  c.k = k;
  if (k == 1) {
    const int np = counts[0];
    const double dph = 2.0 * std::numbers::pi / np;
    for (int j = 0; j < np; ++j) {
      const double ph = j * dph;
      Vec comp(2);
      comp << std::cos(ph), std::sin(ph);
      c.comps.push_back(comp);
      c.weights.push_back(dph);
      Vec tang(2);
      tang << -std::sin(ph), std::cos(ph);
      c.dir_comps.push_back({tang});
      c.dirs.push_back({{(j + 1) % np, (j + np - 1) % np, 1.0 / (2.0 * dph)}});
    }
    return c;
  }
  if (k == 2) {
    const int nt = counts[0], np = counts[1];
    if (np % 2 != 0) throw ResolutionError("azimuthal fiber count must be even");
    const double dth = std::numbers::pi / nt;
    const double dph = 2.0 * std::numbers::pi / np;
    auto id = [np](int i, int j) { return i * np + j; };
    for (int i = 0; i < nt; ++i) {
      const double th = (i + 0.5) * dth;
      const double cell = sin_power_integral(1, i * dth, (i + 1) * dth);
      for (int j = 0; j < np; ++j) {
        const double ph = j * dph;
        Vec comp(3);
        comp << std::cos(th), std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph);
        c.comps.push_back(comp);
        c.weights.push_back(cell * dph);
        Vec et(3), ep(3);
        et << -std::sin(th), std::cos(th) * std::cos(ph), std::cos(th) * std::sin(ph);
        ep << 0.0, -std::sin(ph), std::cos(ph);
        c.dir_comps.push_back({et, ep});
        FiberChart::Dir dth_dir, dph_dir;
        // colatitude: continue through the pole to the antipodal longitude
        dth_dir.plus = (i + 1 < nt) ? id(i + 1, j) : id(i, (j + np / 2) % np);
        dth_dir.minus = (i > 0) ? id(i - 1, j) : id(i, (j + np / 2) % np);
        dth_dir.inv_two_h = 1.0 / (2.0 * dth);
        dph_dir.plus = id(i, (j + 1) % np);
        dph_dir.minus = id(i, (j + np - 1) % np);
        dph_dir.inv_two_h = 1.0 / (2.0 * dph * std::sin(th));
        c.dirs.push_back({dth_dir, dph_dir});
      }
    }
    return c;
  }
  if (k == 3) {
    const int n1 = counts[0], n2 = counts[1], np = counts[2];
    if (np % 2 != 0) throw ResolutionError("azimuthal fiber count must be even");
    const double d1 = std::numbers::pi / n1;
    const double d2 = std::numbers::pi / n2;
    const double dph = 2.0 * std::numbers::pi / np;
    auto id = [n2, np](int i, int j, int l) { return (i * n2 + j) * np + l; };
    for (int i = 0; i < n1; ++i) {
      const double t1 = (i + 0.5) * d1;
      const double cell1 = sin_power_integral(2, i * d1, (i + 1) * d1);
      for (int j = 0; j < n2; ++j) {
        const double t2 = (j + 0.5) * d2;
        const double cell2 = sin_power_integral(1, j * d2, (j + 1) * d2);
        for (int l = 0; l < np; ++l) {
          const double ph = l * dph;
          Vec comp(4);
          comp << std::cos(t1), std::sin(t1) * std::cos(t2),
              std::sin(t1) * std::sin(t2) * std::cos(ph),
              std::sin(t1) * std::sin(t2) * std::sin(ph);
          c.comps.push_back(comp);
          c.weights.push_back(cell1 * cell2 * dph);
          Vec e1(4), e2(4), e3(4);
          e1 << -std::sin(t1), std::cos(t1) * std::cos(t2),
              std::cos(t1) * std::sin(t2) * std::cos(ph),
              std::cos(t1) * std::sin(t2) * std::sin(ph);
          e2 << 0.0, -std::sin(t2), std::cos(t2) * std::cos(ph),
              std::cos(t2) * std::sin(ph);
          e3 << 0.0, 0.0, -std::sin(ph), std::cos(ph);
          c.dir_comps.push_back({e1, e2, e3});
          FiberChart::Dir f1, f2, f3;
          // antipode on the inner 2-sphere: (t2, ph) -> (pi - t2, ph + pi)
          f1.plus = (i + 1 < n1) ? id(i + 1, j, l)
                                 : id(i, n2 - 1 - j, (l + np / 2) % np);
          f1.minus = (i > 0) ? id(i - 1, j, l)
                             : id(i, n2 - 1 - j, (l + np / 2) % np);
          f1.inv_two_h = 1.0 / (2.0 * d1);
          // antipode on the inner circle: ph -> ph + pi
          f2.plus = (j + 1 < n2) ? id(i, j + 1, l) : id(i, j, (l + np / 2) % np);
          f2.minus = (j > 0) ? id(i, j - 1, l) : id(i, j, (l + np / 2) % np);
          f2.inv_two_h = 1.0 / (2.0 * d2 * std::sin(t1));
          f3.plus = id(i, j, (l + 1) % np);
          f3.minus = id(i, j, (l + np - 1) % np);
          f3.inv_two_h = 1.0 / (2.0 * dph * std::sin(t1) * std::sin(t2));
          c.dirs.push_back({f1, f2, f3});
        }
      }
    }
    return c;
  }
  throw ResolutionError("full mode supports fiber dimension <= 3");
}

struct BaseChart {
  std::vector<Vec> points;
  std::vector<NormalFrame> frames;
  std::vector<double> weights;
  struct Dir {
    int plus, minus;
    double inv_two_h;
    int block;
  };
  std::vector<std::vector<Dir>> dirs;
  std::vector<std::vector<Vec>> dir_vecs;
};

inline BaseChart base_chart(const Submanifold& shape, int count, GridMode mode) {
  BaseChart c;
  const int n = shape.dims().n;
  if (mode == GridMode::reduced_1d) {
    Vec rep;
    if (shape.is_point_set()) {
      if (shape.points().size() != 1)
        throw ResolutionError("reduced mode needs a single point or one sphere");
      rep = shape.points()[0];
    } else if (shape.blocks().size() == 1) {
      rep = Vec::Zero(n);
      rep[0] = shape.blocks()[0].radius;
    } else {
      throw ResolutionError("reduced mode needs the full rotational symmetry");
    }
    c.points.push_back(rep);
    c.frames.push_back(shape.frame(rep));
    c.weights.push_back(shape.total_measure());
    c.dirs.emplace_back();
    c.dir_vecs.emplace_back();
    return c;
  }
  if (shape.is_point_set()) {
    for (const auto& p : shape.points()) {
      c.points.push_back(p);
      c.frames.push_back(shape.frame(p));
      c.weights.push_back(1.0);
      c.dirs.emplace_back();
      c.dir_vecs.emplace_back();
    }
    return c;
  }
  if (count < 8) throw ResolutionError("base count must be >= 8");
  const auto bl = shape.blocks();
  // circle blocks: product of uniform angular charts
  bool all_circles = true;
  for (const auto& b : bl)
    if (b.m != 1) all_circles = false;
  if (all_circles) {
    const int nb = static_cast<int>(bl.size());
    const int total = static_cast<int>(std::pow(count, nb));
    const double dth = 2.0 * std::numbers::pi / count;
    for (int flat = 0; flat < total; ++flat) {
      int rem = flat;
      Vec p = Vec::Zero(n);
      double w = 1.0;
      std::vector<BaseChart::Dir> dd;
      std::vector<Vec> dv;
      for (int b = 0; b < nb; ++b) {
        const int j = rem % count;
        rem /= count;
        const double th = j * dth;
        p[bl[b].offset] = bl[b].radius * std::cos(th);
        p[bl[b].offset + 1] = bl[b].radius * std::sin(th);
        w *= bl[b].radius * dth;
        // neighbor at j +- 1 in block b keeps the other block indices
        int stride = 1;
        for (int q = 0; q < b; ++q) stride *= count;
        const int jp = (j + 1) % count, jm = (j + count - 1) % count;
        BaseChart::Dir d;
        d.plus = flat + (jp - j) * stride;
        d.minus = flat + (jm - j) * stride;
        d.inv_two_h = 1.0 / (2.0 * dth * bl[b].radius);
        d.block = b;
        dd.push_back(d);
        Vec t = Vec::Zero(n);
        t[bl[b].offset] = -std::sin(th);
        t[bl[b].offset + 1] = std::cos(th);
        dv.push_back(t);
      }
      c.points.push_back(p);
      c.weights.push_back(w);
      c.dirs.push_back(std::move(dd));
      c.dir_vecs.push_back(std::move(dv));
    }
    for (const auto& p : c.points) c.frames.push_back(shape.frame(p));
    return c;
  }
  if (bl.size() == 1 && bl[0].m == 2) {
    // latitude-longitude chart on the base 2-sphere
    const double R = bl[0].radius;
    const int nt = count, np = 2 * count;
    const double dth = std::numbers::pi / nt;
    const double dph = 2.0 * std::numbers::pi / np;
    auto id = [np](int i, int j) { return i * np + j; };
    for (int i = 0; i < nt; ++i) {
      const double th = (i + 0.5) * dth;
      const double cell = sin_power_integral(1, i * dth, (i + 1) * dth);
      for (int j = 0; j < np; ++j) {
        const double ph = j * dph;
        Vec p = Vec::Zero(n);
        p[0] = R * std::cos(th);
        p[1] = R * std::sin(th) * std::cos(ph);
        p[2] = R * std::sin(th) * std::sin(ph);
        c.points.push_back(p);
        c.weights.push_back(R * R * cell * dph);
        BaseChart::Dir dt, dp;
        dt.plus = (i + 1 < nt) ? id(i + 1, j) : id(i, (j + np / 2) % np);
        dt.minus = (i > 0) ? id(i - 1, j) : id(i, (j + np / 2) % np);
        dt.inv_two_h = 1.0 / (2.0 * dth * R);
        dt.block = 0;
        dp.plus = id(i, (j + 1) % np);
        dp.minus = id(i, (j + np - 1) % np);
        dp.inv_two_h = 1.0 / (2.0 * dph * R * std::sin(th));
        dp.block = 0;
        c.dirs.push_back({dt, dp});
        Vec et = Vec::Zero(n), ep = Vec::Zero(n);
        et[0] = -std::sin(th);
        et[1] = std::cos(th) * std::cos(ph);
        et[2] = std::cos(th) * std::sin(ph);
        ep[1] = -std::sin(ph);
        ep[2] = std::cos(ph);
        c.dir_vecs.push_back({et, ep});
      }
    }
    for (const auto& p : c.points) c.frames.push_back(shape.frame(p));
    return c;
  }
  throw ResolutionError("unsupported base shape for full-mode grids");
}

}  // namespace detail

/// Build the UNS discretization. fiber_counts has one entry per fiber angle
/// in full mode (n-m-1 of them) and a single colatitude count in reduced
/// mode.
inline UNSGrid build_grid(const Submanifold& shape, int base_count,
                          std::vector<int> fiber_counts, GridMode mode) {
  const auto& d = shape.dims();
  const int k = d.fiber_dimension();
  UNSGrid g(shape);
  g.mode = mode;
  g.fiber_dim = k;
  g.fiber_counts = fiber_counts;
  g.blocks_ = shape.blocks();

  detail::FiberChart fiber;
  if (mode == GridMode::reduced_1d) {
    if (fiber_counts.size() != 1)
      throw ResolutionError("reduced mode takes a single fiber count");
    fiber = detail::fiber_chart_reduced(k, fiber_counts[0]);
  } else {
    if (k > 3)
      throw ResolutionError(
          "full mode supports fiber dimension <= 3; use reduced_1d");
    fiber = detail::fiber_chart_full(k, fiber_counts);
  }
  const detail::BaseChart base = detail::base_chart(shape, base_count, mode);

  g.base_count = static_cast<int>(base.points.size());
  g.fiber_count = static_cast<int>(fiber.comps.size());
  const int fc = g.fiber_count;
  const int total = g.base_count * fc;
  g.base_point.reserve(total);
  g.omega.reserve(total);
  g.weight.reserve(total);

  const int nblocks = static_cast<int>(g.blocks_.size());
  for (int b = 0; b < g.base_count; ++b) {
    const auto& fr = base.frames[b];
    for (int f = 0; f < fc; ++f) {
      Vec om = Vec::Zero(d.n);
      for (int c = 0; c < k + 1; ++c) om += fiber.comps[f][c] * fr.normal[c];
      g.base_point.push_back(base.points[b]);
      g.omega.push_back(om);
      g.weight.push_back(base.weights[b] * fiber.weights[f]);
      std::vector<double> rad(nblocks);
      for (int c = 0; c < nblocks; ++c) rad[c] = fiber.comps[f][c];
      g.radial.push_back(std::move(rad));
      g.base_index.push_back(b);
      g.fiber_index.push_back(f);

      std::vector<UNSGrid::Direction> dd;
      for (std::size_t q = 0; q < base.dirs[b].size(); ++q) {
        const auto& bd = base.dirs[b][q];
        UNSGrid::Direction dir;
        dir.plus = bd.plus * fc + f;
        dir.minus = bd.minus * fc + f;
        dir.inv_two_h = bd.inv_two_h;
        dir.block = bd.block;
        dir.unit = base.dir_vecs[b][q];
        dd.push_back(std::move(dir));
      }
      for (std::size_t q = 0; q < fiber.dirs[f].size(); ++q) {
        const auto& fd = fiber.dirs[f][q];
        UNSGrid::Direction dir;
        dir.plus = b * fc + fd.plus;
        dir.minus = b * fc + fd.minus;
        dir.inv_two_h = fd.inv_two_h;
        dir.block = -1;
        Vec u = Vec::Zero(d.n);
        for (int c = 0; c < k + 1; ++c)
          u += fiber.dir_comps[f][q][c] * fr.normal[c];
        dir.unit = u;
        dd.push_back(std::move(dir));
      }
      g.dirs.push_back(std::move(dd));
    }
  }
  g.build_incidence();
  return g;
}

}  // namespace horizonlab
