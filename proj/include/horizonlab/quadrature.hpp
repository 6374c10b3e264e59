#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "horizonlab/errors.hpp"

namespace horizonlab::quad {

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK dqk15).
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691,
    0.7415311855993944, 0.5860872354676911, 0.4058451513773972,
    0.2077849550078985, 0.0};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.0229353220105292, 0.0630920926299785, 0.1047900103222502,
    0.1406532597155259, 0.1690047266392679, 0.1903505780647854,
    0.2044329400752989, 0.2094821410847278};
// Gauss weights pair with Kronrod nodes 1, 3, 5, 7.
inline constexpr std::array<double, 4> kGaussWeights = {
    0.1294849661688697, 0.2797053914892767, 0.3818300505051189,
    0.4179591836734694};

template <std::size_t NC>
using Values = std::array<double, NC>;

template <std::size_t NC>
struct PanelEstimate {
  Values<NC> kronrod{};
  Values<NC> error{};  // |K15 - G7| per component
};

/// One K15/G7 evaluation on [a, b] of a vector-valued integrand.
template <std::size_t NC, class F>
PanelEstimate<NC> gk15(F&& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  PanelEstimate<NC> out;
  Values<NC> gauss{};
  for (int i = 0; i < 8; ++i) {
    const double x = kKronrodNodes[i];
    Values<NC> fsum = f(c + h * x);
    if (x != 0.0) {
      const Values<NC> fm = f(c - h * x);
      for (std::size_t k = 0; k < NC; ++k) fsum[k] += fm[k];
    }
    for (std::size_t k = 0; k < NC; ++k)
      out.kronrod[k] += kKronrodWeights[i] * fsum[k];
    if (i % 2 == 1) {
      for (std::size_t k = 0; k < NC; ++k)
        gauss[k] += kGaussWeights[i / 2] * fsum[k];
    }
  }
  for (std::size_t k = 0; k < NC; ++k) {
    out.kronrod[k] *= h;
    out.error[k] = std::abs(out.kronrod[k] - gauss[k] * h);
  }
  return out;
}

struct Panel {
  double a, b;
  std::vector<double> value;  // per component
  std::vector<double> error;
};

template <std::size_t NC>
struct AdaptiveResult {
  Values<NC> value{};
  Values<NC> error{};
  std::vector<Panel> panels;  // final partition, ordered by interval
  std::size_t evaluations = 0;
};

/// Adaptive bisection on [a, b] until every component reaches the relative
/// tolerance (with a small absolute floor for components near zero).
/// The returned partition is what kernel-adapted rules are emitted from.
template <std::size_t NC, class F>
AdaptiveResult<NC> integrate_adaptive(F&& f, double a, double b, double rel_tol,
                                      int max_panels = 4000) {
  AdaptiveResult<NC> res;
  std::vector<Panel> work;
  auto push = [&](double lo, double hi) {
    const auto est = gk15<NC>(f, lo, hi);
    Panel p;
    p.a = lo;
    p.b = hi;
    p.value.assign(est.kronrod.begin(), est.kronrod.end());
    p.error.assign(est.error.begin(), est.error.end());
    work.push_back(std::move(p));
    res.evaluations += 15;
  };
  push(a, b);

  auto totals = [&] {
    Values<NC> v{}, e{};
    for (const auto& p : work)
      for (std::size_t k = 0; k < NC; ++k) {
        v[k] += p.value[k];
        e[k] += p.error[k];
      }
    return std::pair{v, e};
  };

  while (true) {
    auto [v, e] = totals();
    bool ok = true;
    for (std::size_t k = 0; k < NC; ++k) {
      const double goal = rel_tol * std::abs(v[k]) + 1e-300;
      if (!(e[k] <= goal) || !std::isfinite(v[k])) ok = false;
    }
    if (ok) {
      res.value = v;
      res.error = e;
      break;
    }
    if (static_cast<int>(work.size()) >= max_panels) {
      double worst = 0.0;
      for (std::size_t k = 0; k < NC; ++k)
        worst = std::max(worst, e[k] / (std::abs(v[k]) + 1e-300));
      throw AccuracyError("adaptive quadrature did not reach tolerance within panel budget",
                          worst);
    }
    // split the panel with the largest normalized error; non-finite first
    std::size_t idx = 0;
    double worst = -1.0;
    for (std::size_t i = 0; i < work.size(); ++i) {
      double score = 0.0;
      for (std::size_t k = 0; k < NC; ++k) {
        const double s = work[i].error[k] / (std::abs(v[k]) + 1e-300);
        score = std::max(score, std::isfinite(s) ? s
                                                 : std::numeric_limits<double>::max());
        if (!std::isfinite(work[i].value[k]))
          score = std::numeric_limits<double>::max();
      }
      if (score > worst) {
        worst = score;
        idx = i;
      }
    }
    const double lo = work[idx].a, hi = work[idx].b, mid = 0.5 * (lo + hi);
    work.erase(work.begin() + static_cast<std::ptrdiff_t>(idx));
    push(lo, mid);
    push(mid, hi);
  }

  std::sort(work.begin(), work.end(),
            [](const Panel& l, const Panel& r) { return l.a < r.a; });
  res.panels = std::move(work);
  return res;
}

/// Emit the Kronrod nodes and weights of a panel partition as an explicit
/// rule: integrating any f over the partition with these (t_i, w_i) pairs
/// reproduces the adaptive estimate.
inline void emit_nodes(const std::vector<Panel>& panels,
                       std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.clear();
  weights.clear();
  nodes.reserve(panels.size() * 15);
  weights.reserve(panels.size() * 15);
  for (const auto& p : panels) {
    const double c = 0.5 * (p.a + p.b);
    const double h = 0.5 * (p.b - p.a);
    for (int i = 0; i < 8; ++i) {
      const double x = kKronrodNodes[i];
      nodes.push_back(c + h * x);
      weights.push_back(h * kKronrodWeights[i]);
      if (x != 0.0) {
        nodes.push_back(c - h * x);
        weights.push_back(h * kKronrodWeights[i]);
      }
    }
  }
}

/// Scalar convenience wrapper.
template <class F>
double integrate(F&& f, double a, double b, double rel_tol, int max_panels = 4000) {
  auto wrapped = [&](double t) { return Values<1>{f(t)}; };
  return integrate_adaptive<1>(wrapped, a, b, rel_tol, max_panels).value[0];
}

}  // namespace horizonlab::quad
