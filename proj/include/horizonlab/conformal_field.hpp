#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "horizonlab/cylinder_model.hpp"
#include "horizonlab/errors.hpp"
#include "horizonlab/submanifold.hpp"
#include "horizonlab/vec.hpp"

namespace horizonlab {

struct FieldEval {
  double u = 1.0;
  Vec grad;
};

struct AsymptoticFit {
  double coefficient = 0.0;  // A in u - 1 ~ A |x|^{-(n-2)}
  double exponent = 0.0;     // fitted decay exponent, should be near n - 2
  double residual = 0.0;     // rms residual of the log-log fit
  double predicted = 0.0;    // eps^{n-m-2} * measure(S)
};

/// Central-difference Laplacian of f at x, normalized by the largest
/// second-difference magnitude (so the result is scale free; exact zeros
/// stay zero).
template <class F>
double normalized_laplacian(F&& f, const Vec& x, double step) {
  const double fc = f(x);
  double lap = 0.0, worst = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vec xp = x, xm = x;
    xp[i] += step;
    xm[i] -= step;
    const double second = f(xp) - 2.0 * fc + f(xm);
    lap += second;
    worst = std::max(worst, std::abs(second));
  }
  if (worst == 0.0) return 0.0;
  return std::abs(lap) / worst;
}

/// Conformal factor u(x) = 1 + eps^{n-m-2} * integral_S |x-y|^{-(n-2)} dy
/// and its analytic gradient. Evaluations build a kernel-adapted quadrature
/// rule per point; derivatives differentiate the kernel under the integral,
/// never the quadrature output.
class ConformalField {
 public:
  ConformalField(Submanifold shape, double epsilon, double quad_tol = 1e-9)
      : shape_(std::move(shape)), epsilon_(epsilon), quad_tol_(quad_tol) {
    if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
    if (!(quad_tol > 0.0)) throw DomainError("quadrature tolerance must be positive");
    critical_ = critical_radius(shape_.dims());
  }

  const Submanifold& shape() const { return shape_; }
  double epsilon() const { return epsilon_; }
  double quad_tolerance() const { return quad_tol_; }

  double value(const Vec& x) const { return evaluate(x).u; }
  Vec gradient(const Vec& x) const { return evaluate(x).grad; }

  /// u and grad u from one shared rule.
  FieldEval evaluate(const Vec& x) const {
    const auto& d = shape_.dims();
    const double g = static_cast<double>(d.n - 2);
    const QuadratureRule rule =
        shape_.kernel_quadrature(x, effective_tol(x), g);
    const double scale = std::pow(epsilon_, d.decay_exponent());
    FieldEval out;
    out.grad = Vec::Zero(d.n);
    double integral = 0.0;
    for (std::size_t i = 0; i < rule.points.size(); ++i) {
      const Vec diff = x - rule.points[i];
      const double r2 = diff.squaredNorm();
      if (r2 == 0.0)
        throw SingularityError("field evaluated on the submanifold");
      integral += rule.weights[i] * std::pow(r2, -0.5 * g);
      out.grad += rule.weights[i] * std::pow(r2, -0.5 * (g + 2.0)) * diff;
    }
    out.u = 1.0 + scale * integral;
    out.grad *= -g * scale;
    return out;
  }

  /// Mean curvature in g = u^{4/(n-2)} delta of a hypersurface through x with
  /// Euclidean mean curvature H and Euclidean unit normal nu:
  ///   u^{-2/(n-2)} (H + 2 (n-1)/(n-2) <grad u, nu> / u).
  double mean_curvature(const Vec& x, double h_euclid, const Vec& nu) const {
    const FieldEval e = evaluate(x);
    return conformal_mean_curvature(shape_.dims().n, e.u, e.grad.dot(nu), h_euclid);
  }

  static double conformal_mean_curvature(int n, double u, double du_nu,
                                         double h_euclid) {
    const double c = 2.0 * (n - 1) / static_cast<double>(n - 2);
    return std::pow(u, -2.0 / (n - 2)) * (h_euclid + c * du_nu / u);
  }

  /// Normalized Laplacian of u at x; near zero certifies harmonicity (and
  /// with it scalar-flatness of the metric) up to discretization noise.
  double harmonicity_residual(const Vec& x, double step = 0.0) const {
    const double dist = shape_.nearest(x).distance;
    if (dist == 0.0) throw SingularityError("point lies on the submanifold");
    const double h = step > 0.0 ? step : 1e-3 * dist;
    if (h * std::sqrt(static_cast<double>(shape_.dims().n)) >= dist)
      throw DomainError("harmonicity step too large: stencil would touch S");
    return normalized_laplacian([this](const Vec& y) { return value(y); }, x, h);
  }

  /// Least-squares fit of log(mean_dirs(u) - 1) against log r. Directions are
  /// an antipodally symmetric deterministic sample, so odd multipoles cancel
  /// and the fitted coefficient isolates the monopole.
  AsymptoticFit fit_asymptotic(const std::vector<double>& radii,
                               int direction_pairs = 128,
                               std::uint64_t seed = 20240229ull) const {
    const auto& d = shape_.dims();
    const double min_r = 10.0 * shape_.diameter();
    if (radii.size() < 2) throw DomainError("asymptotic fit needs >= 2 radii");
    for (double r : radii)
      if (!(r >= min_r) || !(r > 0.0))
        throw DomainError("asymptotic fit radii must be >= 10 * diameter(S)");

    std::mt19937_64 rng(seed);
    auto gauss = [&rng]() {
      // Box-Muller, fixed across platforms
      const double a = (static_cast<double>(rng() >> 11) + 0.5) * 0x1p-53;
      const double b = (static_cast<double>(rng() >> 11) + 0.5) * 0x1p-53;
      return std::sqrt(-2.0 * std::log(a)) * std::cos(2.0 * std::numbers::pi * b);
    };
    std::vector<Vec> dirs;
    for (int i = 0; i < direction_pairs; ++i) {
      Vec v(d.n);
      for (int j = 0; j < d.n; ++j) v[j] = gauss();
      if (v.norm() < 1e-8) {
        --i;
        continue;
      }
      v.normalize();
      dirs.push_back(v);
      dirs.push_back(-v);
    }

    std::vector<double> logs_r, logs_u;
    for (double r : radii) {
      double acc = 0.0;
      for (const auto& v : dirs) acc += value(r * v) - 1.0;
      acc /= static_cast<double>(dirs.size());
      if (!(acc > 0.0)) throw DomainError("asymptotic fit: u - 1 not positive");
      logs_r.push_back(std::log(r));
      logs_u.push_back(std::log(acc));
    }
    // least squares y = b0 + b1 x
    const auto k = static_cast<double>(logs_r.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < logs_r.size(); ++i) {
      sx += logs_r[i];
      sy += logs_u[i];
      sxx += logs_r[i] * logs_r[i];
      sxy += logs_r[i] * logs_u[i];
    }
    const double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    const double inter = (sy - slope * sx) / k;
    double rss = 0.0;
    for (std::size_t i = 0; i < logs_r.size(); ++i) {
      const double e = logs_u[i] - (inter + slope * logs_r[i]);
      rss += e * e;
    }
    AsymptoticFit fit;
    fit.coefficient = std::exp(inter);
    fit.exponent = -slope;
    fit.residual = std::sqrt(rss / k);
    fit.predicted =
        std::pow(epsilon_, d.decay_exponent()) * shape_.total_measure();
    return fit;
  }

 private:
  // Mean-curvature cancellations at the horizon are first-order sensitive to
  // u, so the tolerance tightens by 1e-3 inside the tube region.
  double effective_tol(const Vec& x) const {
    const double dist = shape_.nearest(x).distance;
    if (dist < 8.0 * critical_ * epsilon_) return quad_tol_ * 1e-3;
    return quad_tol_;
  }

  Submanifold shape_;
  double epsilon_;
  double quad_tol_;
  double critical_;
};

}  // namespace horizonlab
