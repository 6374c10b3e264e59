#pragma once

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "horizonlab/conformal_field.hpp"
#include "horizonlab/cylinder_model.hpp"
#include "horizonlab/errors.hpp"
#include "horizonlab/uns_grid.hpp"

namespace horizonlab {

namespace detail {

/// Discrete area functional of the graph omega -> base + psi(omega) omega in
/// the conformal metric, in graph form: the Euclidean element is
///   prod_b (1 + psi c_b / R_b)^{m_b} * psi^k * sqrt(1 + |grad psi|^2_eff)
/// per unit UNS measure, with the conformal factor u^{2(n-1)/(n-2)} evaluated
/// at the embedded node. All geometry enters exactly; only psi derivatives
/// are discretized (central differences on the chart). Constant profiles are
/// therefore critical points exactly when the continuum symmetric reduction
/// says so.
class GraphSystem {
 public:
  GraphSystem(const UNSGrid& grid, const ConformalField* field)
      : grid_(grid), field_(field) {
    const auto& d = grid.shape.dims();
    n_ = d.n;
    k_ = d.fiber_dimension();
    p_area_ = 2.0 * (n_ - 1) / static_cast<double>(n_ - 2);
    q_norm_ = 2.0 * n_ / static_cast<double>(n_ - 2);
    const int N = grid.size();
    psi_.assign(N, 0.0);
    u_.assign(N, 1.0);
    du_omega_.assign(N, 0.0);
    build_dependencies();
  }

  int size() const { return grid_.size(); }
  const std::vector<double>& psi() const { return psi_; }

  void set_psi(const std::vector<double>& psi) {
    psi_ = psi;
    refresh_field_all();
  }

  void set_psi_node(int j, double value) {
    psi_[j] = value;
    refresh_field_node(j);
  }

  double area() const {
    double a = 0.0;
    for (int i = 0; i < size(); ++i) a += grid_.weight[i] * density(i);
    return a;
  }

  // analytic gradient of the discrete area
  std::vector<double> area_gradient() const {
    std::vector<double> dA(size(), 0.0);
    for (int j = 0; j < size(); ++j) dA[j] = grid_.weight[j] * direct_term(j);
    for (int j = 0; j < size(); ++j) {
      for (const auto& inc : grid_.incident[j]) {
        const int i = inc.node;
        const auto& dir = grid_.dirs[i][inc.dir];
        const double D = dir.inv_two_h * (psi_[dir.plus] - psi_[dir.minus]);
        const double s = metric_scale(i, dir);
        const NodeGeom ng = geom(i);
        dA[j] += grid_.weight[i] * ng.B * std::pow(psi_[i], k_) *
                 std::pow(u_[i], p_area_) * (D * s * inc.sign * dir.inv_two_h) /
                 ng.S;
      }
    }
    return dA;
  }

  // mean curvature in the conformal metric from the area first variation,
  // normalized by the node's metric measure and the normal-motion factor
  std::vector<double> residual() const {
    std::vector<double> H = area_gradient();
    for (int j = 0; j < size(); ++j) H[j] = normalize_gradient(j, H[j]);
    return H;
  }

  double residual_node(int j) const {
    double dA = grid_.weight[j] * direct_term(j);
    for (const auto& inc : grid_.incident[j]) {
      const int i = inc.node;
      const auto& dir = grid_.dirs[i][inc.dir];
      const double D = dir.inv_two_h * (psi_[dir.plus] - psi_[dir.minus]);
      const double s = metric_scale(i, dir);
      const NodeGeom ng = geom(i);
      dA += grid_.weight[i] * ng.B * std::pow(psi_[i], k_) *
            std::pow(u_[i], p_area_) * (D * s * inc.sign * dir.inv_two_h) / ng.S;
    }
    return normalize_gradient(j, dA);
  }

  /// Euclidean unit normal of the discrete graph at a node.
  Vec surface_normal(int i) const {
    const NodeGeom ng = geom(i);
    Vec nu = grid_.omega[i];
    for (const auto& dir : grid_.dirs[i]) {
      const double D = dir.inv_two_h * (psi_[dir.plus] - psi_[dir.minus]);
      const double scale = dir.block < 0 ? psi_[i] : alpha(i, dir.block);
      nu -= (D / scale) * dir.unit;
    }
    return nu / ng.S;
  }

  double slope_sup() const {
    double worst = 0.0;
    for (int i = 0; i < size(); ++i) {
      double g2 = 0.0;
      for (const auto& dir : grid_.dirs[i]) {
        const double D = dir.inv_two_h * (psi_[dir.plus] - psi_[dir.minus]);
        g2 += D * D;
      }
      worst = std::max(worst, std::sqrt(g2));
    }
    return worst;
  }

  const std::vector<std::vector<int>>& dependents() const { return dep_; }

  double node_measure(int i) const {
    return grid_.weight[i] * density(i);
  }

  double u_at(int i) const { return u_[i]; }

 private:
  struct NodeGeom {
    double B = 1.0;   // product of the base curvature factors
    double dB = 0.0;  // d/dpsi of B
    double G = 0.0;   // |grad psi|^2_eff
    double dGm = 0.0; // metric part of dG/dpsi_i
    double S = 1.0;   // sqrt(1 + G)
  };

  double alpha(int i, int b) const {
    const auto& blk = grid_.blocks()[b];
    return 1.0 + psi_[i] * grid_.radial[i][b] / blk.radius;
  }

  double metric_scale(int i, const UNSGrid::Direction& dir) const {
    if (dir.block < 0) return 1.0 / (psi_[i] * psi_[i]);
    const double a = alpha(i, dir.block);
    return 1.0 / (a * a);
  }

  NodeGeom geom(int i) const {
    NodeGeom g;
    double dlogB = 0.0;
    for (int b = 0; b < grid_.num_blocks(); ++b) {
      const auto& blk = grid_.blocks()[b];
      const double a = alpha(i, b);
      g.B *= std::pow(a, blk.m);
      dlogB += blk.m * (grid_.radial[i][b] / blk.radius) / a;
    }
    g.dB = g.B * dlogB;
    for (const auto& dir : grid_.dirs[i]) {
      const double D = dir.inv_two_h * (psi_[dir.plus] - psi_[dir.minus]);
      const double s = metric_scale(i, dir);
      g.G += D * D * s;
      if (dir.block < 0) {
        g.dGm += D * D * (-2.0 / std::pow(psi_[i], 3));
      } else {
        const double a = alpha(i, dir.block);
        const double da = grid_.radial[i][dir.block] / grid_.blocks()[dir.block].radius;
        g.dGm += D * D * (-2.0 * da / (a * a * a));
      }
    }
    g.S = std::sqrt(1.0 + g.G);
    return g;
  }

  double density(int i) const {
    const NodeGeom g = geom(i);
    return g.B * std::pow(psi_[i], k_) * g.S * std::pow(u_[i], p_area_);
  }

  double direct_term(int j) const {
    const NodeGeom g = geom(j);
    const double pk = std::pow(psi_[j], k_);
    const double U = std::pow(u_[j], p_area_);
    double t = (g.dB * pk + g.B * k_ * std::pow(psi_[j], k_ - 1)) * g.S * U;
    t += g.B * pk * g.S * p_area_ * std::pow(u_[j], p_area_ - 1.0) * du_omega_[j];
    t += g.B * pk * U * 0.5 / g.S * g.dGm;
    return t;
  }

  double normalize_gradient(int j, double dA) const {
    const NodeGeom g = geom(j);
    return dA / (grid_.weight[j] * g.B * std::pow(psi_[j], k_) *
                 std::pow(u_[j], q_norm_));
  }

  void refresh_field_node(int j) {
    if (!field_) {
      u_[j] = 1.0;
      du_omega_[j] = 0.0;
      return;
    }
    const Vec x = grid_.base_point[j] + psi_[j] * grid_.omega[j];
    const FieldEval e = field_->evaluate(x);
    u_[j] = e.u;
    du_omega_[j] = e.grad.dot(grid_.omega[j]);
  }

  void refresh_field_all() {
    for (int j = 0; j < size(); ++j) refresh_field_node(j);
  }

  void build_dependencies() {
    const int N = grid_.size();
    std::vector<std::vector<int>> vars(N);
    auto add = [](std::vector<int>& v, int x) {
      if (std::find(v.begin(), v.end(), x) == v.end()) v.push_back(x);
    };
    for (int i = 0; i < N; ++i) {
      add(vars[i], i);
      for (const auto& dir : grid_.dirs[i]) {
        add(vars[i], dir.plus);
        add(vars[i], dir.minus);
      }
      for (const auto& inc : grid_.incident[i]) {
        add(vars[i], inc.node);
        for (const auto& dir : grid_.dirs[inc.node]) {
          add(vars[i], dir.plus);
          add(vars[i], dir.minus);
        }
      }
    }
    dep_.assign(N, {});
    for (int i = 0; i < N; ++i)
      for (int j : vars[i]) dep_[j].push_back(i);
  }

  const UNSGrid& grid_;
  const ConformalField* field_;
  int n_ = 0, k_ = 0;
  double p_area_ = 0.0, q_norm_ = 0.0;
  std::vector<double> psi_, u_, du_omega_;
  std::vector<std::vector<int>> dep_;

 public:
  /// Column-wise finite-difference Jacobian of the residual, exploiting the
  /// stencil locality (only nearby residuals change).
  Eigen::SparseMatrix<double> residual_jacobian(const std::vector<double>& H0) {
    const int N = size();
    std::vector<Eigen::Triplet<double>> trip;
    for (int j = 0; j < N; ++j) {
      const double h = std::max(1e-9, 1e-7 * std::abs(psi_[j]));
      const double saved_psi = psi_[j];
      const double saved_u = u_[j], saved_du = du_omega_[j];
      set_psi_node(j, saved_psi + h);
      for (int i : dep_[j]) {
        const double hij = (residual_node(i) - H0[i]) / h;
        if (hij != 0.0) trip.emplace_back(i, j, hij);
      }
      psi_[j] = saved_psi;
      u_[j] = saved_u;
      du_omega_[j] = saved_du;
    }
    Eigen::SparseMatrix<double> J(N, N);
    J.setFromTriplets(trip.begin(), trip.end());
    return J;
  }
};

}  // namespace detail

/// Area of the graph psi over the UNS grid in the conformal metric.
inline double graph_area(const ConformalField& field, const UNSGrid& grid,
                         const std::vector<double>& psi) {
  const double reach = grid.shape.reach();
  for (double v : psi)
    if (!(v > 0.0) || !(v < reach))
      throw DomainError("graph height outside (0, reach)");
  detail::GraphSystem sys(grid, &field);
  sys.set_psi(psi);
  return sys.area();
}

/// Same area in the Euclidean metric (u = 1).
inline double euclidean_graph_area(const UNSGrid& grid,
                                   const std::vector<double>& psi) {
  detail::GraphSystem sys(grid, nullptr);
  sys.set_psi(psi);
  return sys.area();
}

/// Per-node mean curvature of the graph in the conformal metric, computed as
/// the normalized first variation of the discrete area.
inline std::vector<double> mean_curvature_residual(const ConformalField& field,
                                                   const UNSGrid& grid,
                                                   const std::vector<double>& psi) {
  const double reach = grid.shape.reach();
  for (double v : psi)
    if (!(v > 0.0) || !(v < reach))
      throw DomainError("graph height outside (0, reach)");
  detail::GraphSystem sys(grid, &field);
  sys.set_psi(psi);
  return sys.residual();
}

struct BarrierReport {
  double epsilon = 0.0;
  double c_inner = 0.0;   // largest a/eps with max H < 0
  double c_outer = 0.0;   // smallest a/eps above it with min H > 0
  double r_outer = 0.0;   // largest tested a with min H > 0
  double r_end = 0.0;     // coordinate spheres beyond this have H > 0
  double critical = 0.0;  // model radius a_hat for reference
  struct Row {
    double a;
    double min_h;
    double max_h;
  };
  std::vector<Row> rows;
};

/// Min/max of the conformal mean curvature over tubes on a log grid of
/// radii, using the exact Euclidean tube curvature and the conformal
/// transformation law.
inline BarrierReport scan_barriers(const ConformalField& field,
                                   const UNSGrid& grid, double a_lo,
                                   double a_hi, int samples) {
  const auto& shape = grid.shape;
  const double reach = shape.reach();
  if (!(a_lo > 0.0) || !(a_hi > a_lo) || !(a_hi < reach))
    throw DomainError("barrier scan range must satisfy 0 < a_lo < a_hi < reach");
  if (samples < 2) throw DomainError("barrier scan needs >= 2 samples");

  BarrierReport rep;
  rep.epsilon = field.epsilon();
  rep.critical = critical_radius(shape.dims());
  for (int s = 0; s < samples; ++s) {
    const double a =
        a_lo * std::pow(a_hi / a_lo, static_cast<double>(s) / (samples - 1));
    double hmin = std::numeric_limits<double>::infinity();
    double hmax = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid.size(); ++i) {
      const Vec& x = grid.base_point[i];
      const Vec& w = grid.omega[i];
      const double he = shape.tube_mean_curvature(x, w, a);
      const double h = field.mean_curvature(x + a * w, he, w);
      hmin = std::min(hmin, h);
      hmax = std::max(hmax, h);
    }
    rep.rows.push_back({a, hmin, hmax});
  }

  const double eps = field.epsilon();
  int inner_idx = -1;
  for (std::size_t s = 0; s < rep.rows.size(); ++s)
    if (rep.rows[s].max_h < 0.0) inner_idx = static_cast<int>(s);
  if (inner_idx < 0)
    throw BarrierNotFoundError(
        "no tube with all-negative mean curvature in the scanned range");
  rep.c_inner = rep.rows[inner_idx].a / eps;
  int outer_idx = -1;
  for (std::size_t s = inner_idx + 1; s < rep.rows.size(); ++s)
    if (rep.rows[s].min_h > 0.0) {
      outer_idx = static_cast<int>(s);
      break;
    }
  if (outer_idx < 0)
    throw BarrierNotFoundError(
        "no tube with all-positive mean curvature above the inner barrier");
  rep.c_outer = rep.rows[outer_idx].a / eps;
  for (const auto& row : rep.rows)
    if (row.min_h > 0.0) rep.r_outer = std::max(rep.r_outer, row.a);

  // coordinate spheres: smallest scanned radius beyond which they all have
  // positive mean curvature
  {
    const int n = shape.dims().n;
    std::vector<Vec> dirs;
    for (int i = 0; i < n; ++i) {
      dirs.push_back(Vec::Unit(n, i));
      dirs.push_back(-Vec::Unit(n, i));
    }
    std::mt19937_64 rng(777);
    for (int s = 0; s < 128; ++s) {
      Vec v(n);
      for (int i = 0; i < n; ++i) {
        const double a1 = (static_cast<double>(rng() >> 11) + 0.5) * 0x1p-53;
        const double b1 = (static_cast<double>(rng() >> 11) + 0.5) * 0x1p-53;
        v[i] = std::sqrt(-2.0 * std::log(a1)) *
               std::cos(2.0 * std::numbers::pi * b1);
      }
      dirs.push_back(v.normalized());
    }
    const double r_lo = std::max(1.0, shape.diameter() + a_hi) * 1.5;
    const double r_hi = r_lo * 64.0;
    double last_bad = 0.0;
    double first_radius = 0.0;
    for (int s = 0; s < 40; ++s) {
      const double R = r_lo * std::pow(r_hi / r_lo, s / 39.0);
      if (s == 0) first_radius = R;
      double hmin = std::numeric_limits<double>::infinity();
      for (const auto& v : dirs) {
        const double he = (n - 1) / R;
        hmin = std::min(hmin, field.mean_curvature(R * v, he, v));
      }
      if (!(hmin > 0.0)) last_bad = R;
    }
    rep.r_end = last_bad > 0.0 ? last_bad * std::pow(r_hi / r_lo, 1.0 / 39.0)
                               : first_radius;
  }
  return rep;
}

struct SolveOptions {
  double tol = 1e-8;               // residual target in units of 1/epsilon
  double switch_threshold = 1e-2;  // flow -> Newton handover, units of 1/epsilon
  int max_iterations = 200000;
  std::optional<double> initial_psi;
  std::optional<std::pair<double, double>> confinement;  // barrier band on psi
  bool split_components = true;
};

struct HorizonGraph {
  std::vector<double> psi;
  std::vector<double> residual;
  double sup_residual = std::numeric_limits<double>::infinity();
  bool converged = false;
  int iterations = 0;
  int components = 1;
  double slope_sup = 0.0;  // sup |grad_UNS psi| / epsilon
  double psi_min = 0.0, psi_max = 0.0;
  std::vector<double> area_trace;  // accepted flow areas
};

namespace detail {

inline double sup_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

/// Flow-then-Newton driver for a single component.
inline HorizonGraph solve_single(const ConformalField& field,
                                 const UNSGrid& grid, const SolveOptions& opts) {
  const double eps = field.epsilon();
  const double reach = grid.shape.reach();
  const double ahat = critical_radius(grid.shape.dims());
  const double psi0 = opts.initial_psi.value_or(ahat * eps);
  if (!(psi0 > 0.0) || psi0 >= reach)
    throw ConfinementError("initial graph height outside (0, reach)");

  GraphSystem sys(grid, &field);
  const int N = grid.size();
  std::vector<double> psi(N, psi0);
  sys.set_psi(psi);

  HorizonGraph out;
  const double tol_abs = opts.tol / eps;
  const double switch_abs = opts.switch_threshold / eps;

  auto bounds_ok = [&](const std::vector<double>& p) {
    for (double v : p)
      if (!(v > 0.0) || !(v < reach)) return false;
    return true;
  };
  auto confinement_ok = [&](const std::vector<double>& p) {
    if (!opts.confinement) return true;
    for (double v : p)
      if (v <= opts.confinement->first || v >= opts.confinement->second)
        return false;
    return true;
  };

  std::vector<double> H = sys.residual();
  double sup = sup_abs(H);
  double area = sys.area();
  out.area_trace.push_back(area);

  // geometric spacing sets the stable explicit step
  double hmin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < N; ++i)
    for (const auto& dir : grid.dirs[i])
      hmin = std::min(hmin, psi0 / (2.0 * dir.inv_two_h));
  double dt = 0.25 * hmin * hmin;
  const double dt_min = dt * 1e-12;

  int accepted = 0;
  int iter = 0;
  while (sup > switch_abs && sup > tol_abs) {
    if (++iter > opts.max_iterations)
      throw ConvergenceError("flow iteration cap reached", sup * eps);
    std::vector<double> trial(N);
    for (int i = 0; i < N; ++i) trial[i] = psi[i] - dt * H[i];
    bool ok = bounds_ok(trial);
    double trial_area = 0.0;
    if (ok) {
      sys.set_psi(trial);
      trial_area = sys.area();
      ok = trial_area <= area * (1.0 + 1e-14);
    }
    if (ok) {
      psi = std::move(trial);
      area = trial_area;
      H = sys.residual();
      sup = sup_abs(H);
      out.area_trace.push_back(area);
      ++accepted;
      if (accepted > 10 && !confinement_ok(psi))
        throw ConfinementError("iterate left the barrier band");
      dt = std::min(dt * 1.3, 64.0 * hmin * hmin);
    } else {
      dt *= 0.4;
      if (dt < dt_min)
        throw ConvergenceError("flow stalled before reaching the handover",
                               sup * eps);
      sys.set_psi(psi);  // restore cached field state
    }
  }

  // damped Newton on the residual
  int newton_fails = 0;
  while (sup > tol_abs) {
    if (++iter > opts.max_iterations)
      throw ConvergenceError("Newton iteration cap reached", sup * eps);
    sys.set_psi(psi);
    H = sys.residual();
    Eigen::SparseMatrix<double> J = sys.residual_jacobian(H);
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(J);
    if (lu.info() != Eigen::Success)
      throw ConvergenceError("singular residual Jacobian", sup * eps);
    Eigen::VectorXd rhs(N);
    for (int i = 0; i < N; ++i) rhs[i] = -H[i];
    const Eigen::VectorXd delta = lu.solve(rhs);
    double s = 1.0;
    bool accepted_step = false;
    while (s >= 1.0 / 256.0) {
      std::vector<double> trial(N);
      for (int i = 0; i < N; ++i) trial[i] = psi[i] + s * delta[i];
      if (bounds_ok(trial) && confinement_ok(trial)) {
        sys.set_psi(trial);
        const auto Ht = sys.residual();
        const double sup_t = sup_abs(Ht);
        if (sup_t < sup * (1.0 - 0.25 * s)) {
          psi = std::move(trial);
          H = Ht;
          sup = sup_t;
          accepted_step = true;
          break;
        }
      }
      s *= 0.5;
    }
    if (!accepted_step) {
      if (++newton_fails > 8)
        throw ConvergenceError("Newton line search failed", sup * eps);
      // a few flow steps to re-enter the basin
      sys.set_psi(psi);
      H = sys.residual();
      for (int r = 0; r < 25; ++r) {
        std::vector<double> trial(N);
        for (int i = 0; i < N; ++i) trial[i] = psi[i] - dt * H[i];
        if (!bounds_ok(trial)) {
          dt *= 0.4;
          continue;
        }
        sys.set_psi(trial);
        psi = std::move(trial);
        H = sys.residual();
      }
      sup = sup_abs(H);
    }
  }

  sys.set_psi(psi);
  out.psi = psi;
  out.residual = sys.residual();
  out.sup_residual = sup_abs(out.residual);
  out.converged = out.sup_residual <= tol_abs;
  out.iterations = iter;
  out.slope_sup = sys.slope_sup() / eps;
  out.psi_min = *std::min_element(psi.begin(), psi.end());
  out.psi_max = *std::max_element(psi.begin(), psi.end());
  return out;
}

}  // namespace detail

/// Locate the horizon graph. Disconnected point sets whose clusters are
/// separated by at least ten horizon diameters are solved per component with
/// the component's own field (the superposition correction is below the
/// solver tolerance at that separation); otherwise the solve is coupled.
inline HorizonGraph solve_horizon(const ConformalField& field,
                                  const UNSGrid& grid,
                                  const SolveOptions& opts = {}) {
  const double eps = field.epsilon();
  if (opts.split_components && grid.shape.is_point_set() &&
      grid.shape.points().size() > 1) {
    // link clusters at ten horizon diameters, then verify the separation
    // against the cluster diameters before deciding to decouple
    const double link = 20.0 * eps;
    auto comps = grid.shape.component_indices(link);
    if (comps.size() > 1) {
      const auto& pts = grid.shape.points();
      auto cluster_diam = [&](const std::vector<int>& c) {
        double d = 0.0;
        for (std::size_t i = 0; i < c.size(); ++i)
          for (std::size_t j = i + 1; j < c.size(); ++j)
            d = std::max(d, (pts[c[i]] - pts[c[j]]).norm());
        return d;
      };
      bool separated = true;
      for (std::size_t a = 0; a < comps.size() && separated; ++a)
        for (std::size_t b = a + 1; b < comps.size() && separated; ++b) {
          double gap = std::numeric_limits<double>::infinity();
          for (int i : comps[a])
            for (int j : comps[b])
              gap = std::min(gap, (pts[i] - pts[j]).norm());
          const double scale =
              std::max({cluster_diam(comps[a]), cluster_diam(comps[b]), 2.0 * eps});
          if (gap < 10.0 * scale) separated = false;
        }
      if (!separated) comps.assign(1, {});
    }
    if (comps.size() > 1) {
      HorizonGraph merged;
      merged.psi.assign(grid.size(), 0.0);
      merged.residual.assign(grid.size(), 0.0);
      merged.converged = true;
      merged.sup_residual = 0.0;
      merged.components = static_cast<int>(comps.size());
      merged.psi_min = std::numeric_limits<double>::infinity();
      merged.psi_max = 0.0;
      for (const auto& comp : comps) {
        const Submanifold sub = grid.shape.sub_point_set(comp);
        const ConformalField sub_field(sub, eps, field.quad_tolerance());
        const UNSGrid sub_grid =
            build_grid(sub, 0, grid.fiber_counts, grid.mode);
        SolveOptions sub_opts = opts;
        sub_opts.split_components = false;
        const HorizonGraph part = detail::solve_single(sub_field, sub_grid, sub_opts);
        for (int bl = 0; bl < static_cast<int>(comp.size()); ++bl)
          for (int f = 0; f < grid.fiber_count; ++f) {
            const int src = bl * grid.fiber_count + f;
            const int dst = comp[bl] * grid.fiber_count + f;
            merged.psi[dst] = part.psi[src];
            merged.residual[dst] = part.residual[src];
          }
        merged.sup_residual = std::max(merged.sup_residual, part.sup_residual);
        merged.converged = merged.converged && part.converged;
        merged.iterations += part.iterations;
        merged.slope_sup = std::max(merged.slope_sup, part.slope_sup);
        merged.psi_min = std::min(merged.psi_min, part.psi_min);
        merged.psi_max = std::max(merged.psi_max, part.psi_max);
        for (double a : part.area_trace) merged.area_trace.push_back(a);
      }
      return merged;
    }
  }
  return detail::solve_single(field, grid, opts);
}

struct AreaBoundCheck {
  bool holds = false;
  double surface_area = 0.0;   // metric area of the graph inside the probe
  double boundary_area = 0.0;  // metric area of the probe boundary sphere
};

/// Outer-area-minimizing sanity check: the horizon area inside a probe ball
/// never exceeds the area of the ball's boundary.
inline AreaBoundCheck local_area_bound_check(const ConformalField& field,
                                             const UNSGrid& grid,
                                             const std::vector<double>& psi,
                                             const Vec& center, double radius) {
  if (!(radius > 0.0)) throw DomainError("probe radius must be positive");
  const int n = grid.shape.dims().n;
  if (center.size() != n) throw DimensionError("probe center dimension");
  detail::GraphSystem sys(grid, &field);
  sys.set_psi(psi);
  AreaBoundCheck out;
  for (int i = 0; i < grid.size(); ++i) {
    const Vec x = grid.base_point[i] + psi[i] * grid.omega[i];
    if ((x - center).norm() <= radius) out.surface_area += sys.node_measure(i);
  }
  const double p_area = 2.0 * (n - 1) / static_cast<double>(n - 2);
  std::vector<int> counts(static_cast<std::size_t>(n - 1), 24);
  counts.back() = 48;
  const SphereGrid sg = sphere_grid(n - 1, counts);
  for (std::size_t j = 0; j < sg.points.size(); ++j) {
    const Vec x = center + radius * sg.points[j];
    if (grid.shape.nearest(x).distance == 0.0)
      throw DomainError("degenerate probe: boundary touches the submanifold");
    out.boundary_area += sg.weights[j] * std::pow(radius, n - 1) *
                         std::pow(field.value(x), p_area);
  }
  out.holds = out.surface_area <= out.boundary_area * (1.0 + 1e-12);
  return out;
}

struct ResidualCertificate {
  double sup_area_route = 0.0;       // residual from the area first variation
  double sup_conformal_route = 0.0;  // conformal law on the discrete graph
  double sup_difference = 0.0;
};

/// Independent residual check: Euclidean discrete mean curvature transformed
/// by the conformal law, against the direct metric-area first variation.
/// Exact agreement (up to quadrature) on constant profiles; on curved
/// solutions the difference carries the O(h^2) discretization gap.
inline ResidualCertificate certify_residual(const ConformalField& field,
                                            const UNSGrid& grid,
                                            const std::vector<double>& psi) {
  detail::GraphSystem metric(grid, &field);
  metric.set_psi(psi);
  detail::GraphSystem euclid(grid, nullptr);
  euclid.set_psi(psi);
  const auto h_metric = metric.residual();
  const auto h_euclid = euclid.residual();
  const int n = grid.shape.dims().n;
  ResidualCertificate cert;
  for (int i = 0; i < grid.size(); ++i) {
    const Vec x = grid.base_point[i] + psi[i] * grid.omega[i];
    const FieldEval e = field.evaluate(x);
    const Vec nu = euclid.surface_normal(i);
    const double h_conf = ConformalField::conformal_mean_curvature(
        n, e.u, e.grad.dot(nu), h_euclid[i]);
    cert.sup_area_route = std::max(cert.sup_area_route, std::abs(h_metric[i]));
    cert.sup_conformal_route =
        std::max(cert.sup_conformal_route, std::abs(h_conf));
    cert.sup_difference =
        std::max(cert.sup_difference, std::abs(h_conf - h_metric[i]));
  }
  return cert;
}

struct BidirectionalCheck {
  HorizonGraph from_model;
  HorizonGraph from_outer;
  double sup_difference = 0.0;
};

/// Outermostness certificate: initializing at the model radius and at the
/// outer barrier must converge to the same graph.
inline BidirectionalCheck certify_outermost(const ConformalField& field,
                                            const UNSGrid& grid,
                                            const BarrierReport& barrier,
                                            SolveOptions opts = {}) {
  BidirectionalCheck out;
  opts.initial_psi.reset();
  out.from_model = solve_horizon(field, grid, opts);
  opts.initial_psi = barrier.c_outer * field.epsilon() * 0.999;
  out.from_outer = solve_horizon(field, grid, opts);
  for (std::size_t i = 0; i < out.from_model.psi.size(); ++i)
    out.sup_difference =
        std::max(out.sup_difference,
                 std::abs(out.from_model.psi[i] - out.from_outer.psi[i]));
  return out;
}

}  // namespace horizonlab
