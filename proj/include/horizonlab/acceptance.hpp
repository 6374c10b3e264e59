#pragma once

// Acceptance suite: one entry per release criterion, each with its pinned
// tolerance. Every criterion prints one PASS/FAIL line and contributes a row
// to acceptance.json. Criteria run on fresh objects so they are independent.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "horizonlab/runner.hpp"

namespace horizonlab {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string details;
  double seconds = 0.0;
};

namespace acceptance_detail {

namespace pi = std::numbers;

inline std::string run_hash() {
  return config_hash(Json{{"command", "run-acceptance"}, {"tool_version", kVersion}});
}

struct Check {
  bool ok = true;
  std::ostringstream details;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (details.tellp() > 0) details << "; ";
      details << "FAILED: " << what;
    }
  }
  void note(const std::string& what) {
    if (details.tellp() > 0) details << "; ";
    details << what;
  }
};

inline std::string num(double v, int prec = 6) {
  std::ostringstream s;
  s.precision(prec);
  s << v;
  return s.str();
}

// criterion 1: exact horizon of a single point source in R^3
inline Check schwarzschild_exactness(const std::filesystem::path& out) {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  const double eps = 0.1;
  const auto shape = Submanifold::point_set(3, {Vec::Zero(3)});
  const ConformalField field(shape, eps);
  const auto grid = build_grid(shape, 1, {64, 32}, GridMode::full);
  const auto h = solve_horizon(field, grid);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  double dev = 0.0;
  for (double p : h.psi) dev = std::max(dev, std::abs(p - eps));
  c.require(h.converged, "solver converged");
  c.require(h.sup_residual < 1e-8 / eps, "sup|H| < 1e-8/eps");
  c.require(dev < 1e-4, "|psi - 0.1| < 1e-4 everywhere");
  c.require(seconds < 30.0, "runtime < 30 s");
  c.note("sup|H|*eps=" + num(h.sup_residual * eps) + ", max|psi-eps|=" +
         num(dev) + ", " + num(seconds, 3) + " s");
  CsvWriter csv(out / "horizon.csv", {"base_index", "fiber_index", "psi", "residual"}, run_hash());
  for (int i = 0; i < grid.size(); ++i)
    csv.row({static_cast<double>(grid.base_index[i]),
             static_cast<double>(grid.fiber_index[i]), h.psi[i], h.residual[i]});
  return c;
}

// criterion 2: model constants, closed forms vs quadrature
inline Check model_constants(const std::filesystem::path& out) {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  for (int n = 3; n <= 9; ++n)
    c.require(critical_radius({n, 0}) == 1.0,
              "a_hat(" + std::to_string(n) + ",0) == 1 exactly");
  c.require(std::abs(critical_radius({4, 1}) - 0.5 * pi::pi) < 1e-12,
            "a_hat(4,1) = pi/2 to 1e-12");
  double worst = 0.0;
  for (int n = 3; n <= 9; ++n)
    for (int m = 0; m <= n - 3; ++m) {
      const double closed = plane_potential({n, m});
      double by_quad = 1.0;
      if (m > 0) {
        by_quad = unit_sphere_area(m - 1) *
                  quad::integrate(
                      [n, m](double t) {
                        return std::pow(std::sin(t), m - 1) *
                               std::pow(std::cos(t), n - m - 3);
                      },
                      0.0, 0.5 * pi::pi, 1e-12);
      }
      worst = std::max(worst, std::abs(closed / by_quad - 1.0));
    }
  c.require(worst < 1e-8, "closed form vs quadrature (<= 1e-8 relative)");
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  c.require(seconds < 5.0, "runtime < 5 s");
  c.note("worst D deviation " + num(worst) + ", " + num(seconds, 3) + " s");
  CsvWriter csv(out / "constants.csv", {"n", "m", "C", "D", "a_hat"}, run_hash());
  for (int n = 3; n <= 9; ++n)
    for (int m = 0; m <= n - 3; ++m)
      csv.row({static_cast<double>(n), static_cast<double>(m),
               curvature_ratio({n, m}), plane_potential({n, m}),
               critical_radius({n, m})});
  return c;
}

// criterion 3: cylinder sign structure for every n <= 7
inline Check cylinder_signs(const std::filesystem::path&) {
  Check c;
  for (int n = 3; n <= 7; ++n)
    for (int m = 0; m <= n - 3; ++m) {
      const Dimensions d{n, m};
      const double ahat = critical_radius(d);
      c.require(std::abs(cylinder_mean_curvature(d, ahat)) < 1e-10,
                "(n=" + std::to_string(n) + ",m=" + std::to_string(m) +
                    ") |H(a_hat)| < 1e-10");
      bool signs = true;
      for (int i = 0; i < 100; ++i) {
        const double f = (i + 0.5) / 100.0;
        if (!(cylinder_mean_curvature(d, ahat * std::pow(0.01, 1.0 - f)) < 0.0))
          signs = false;
        if (!(cylinder_mean_curvature(d, ahat * std::pow(100.0, f)) > 0.0))
          signs = false;
      }
      c.require(signs, "(n=" + std::to_string(n) + ",m=" + std::to_string(m) +
                           ") sign pattern on (a_hat/100, 100 a_hat)");
    }
  return c;
}

// criterion 4: barrier bracketing for the circle in R^4
inline Check barrier_bracketing(const std::filesystem::path& out,
                                BarrierReport& rep_out) {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  const double eps = 0.05;
  const auto shape = Submanifold::round_sphere(4, 1, 1.0);
  const ConformalField field(shape, eps);
  const auto grid = build_grid(shape, 1, {96}, GridMode::reduced_1d);
  const double ahat = critical_radius({4, 1});
  const auto rep = scan_barriers(field, grid, 0.2 * ahat * eps, 0.985, 100);
  rep_out = rep;
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  c.require(rep.c_inner < 0.5 * pi::pi, "C_inner < pi/2");
  c.require(0.5 * pi::pi < rep.c_outer, "pi/2 < C_outer");
  bool signs = true;
  for (const auto& row : rep.rows) {
    if (row.a <= rep.c_inner * eps && !(row.max_h < 0.0)) signs = false;
    if (row.a >= rep.c_outer * eps && row.a <= rep.r_outer && !(row.min_h > 0.0))
      signs = false;
  }
  c.require(signs, "sign pattern across the scan table");
  c.require(rep.r_outer >= 10.0 * rep.c_outer * eps, "R_outer >= 10 C_outer eps");
  c.require(seconds < 120.0, "runtime < 2 min");
  c.note("C_inner=" + num(rep.c_inner) + ", C_outer=" + num(rep.c_outer) +
         ", R_outer=" + num(rep.r_outer) + " vs 10*C_outer*eps=" +
         num(10.0 * rep.c_outer * eps) + ", " + num(seconds, 3) + " s");
  CsvWriter csv(out / "barrier_scan.csv", {"a", "a_over_eps", "min_h", "max_h"}, run_hash());
  for (const auto& row : rep.rows)
    csv.row({row.a, row.a / eps, row.min_h, row.max_h});
  return c;
}

// criterion 5: horizon confinement and graphicality for the circle
inline Check confinement_graphicality(const std::filesystem::path& out,
                                      const BarrierReport& rep) {
  Check c;
  const double eps = 0.05;
  const auto shape = Submanifold::round_sphere(4, 1, 1.0);
  const ConformalField field(shape, eps);
  const auto grid = build_grid(shape, 1, {128}, GridMode::reduced_1d);
  const auto h = solve_horizon(field, grid);
  c.require(h.converged, "reduced_1d solve converged");
  c.require(h.psi_min > rep.c_inner * eps && h.psi_max < rep.c_outer * eps,
            "psi inside (C_inner eps, C_outer eps) nodewise");
  c.require(h.slope_sup < 1.0, "sup |grad psi| / eps < 1");
  c.note("psi/eps in [" + num(h.psi_min / eps) + ", " + num(h.psi_max / eps) +
         "], band (" + num(rep.c_inner) + ", " + num(rep.c_outer) +
         "), slope=" + num(h.slope_sup));
  CsvWriter csv(out / "horizon.csv", {"fiber_index", "psi", "residual"}, run_hash());
  for (int i = 0; i < grid.size(); ++i)
    csv.row({static_cast<double>(grid.fiber_index[i]), h.psi[i], h.residual[i]});
  return c;
}

// criterion 6: rescaled horizon radius converges to the model radius
inline Check rescaled_limit(const std::filesystem::path& out) {
  Check c;
  const auto shape = Submanifold::round_sphere(4, 1, 1.0);
  const auto grid = build_grid(shape, 1, {128}, GridMode::reduced_1d);
  const double ahat = critical_radius({4, 1});
  std::vector<double> devs;
  CsvWriter csv(out / "limit.csv", {"epsilon", "sup_dev"}, run_hash());
  for (double eps : {0.1, 0.05, 0.025}) {
    const ConformalField field(shape, eps);
    const auto h = solve_horizon(field, grid);
    c.require(h.converged, "solve at eps=" + num(eps) + " converged");
    double dev = 0.0;
    for (double p : h.psi) dev = std::max(dev, std::abs(p / eps - ahat));
    devs.push_back(dev);
    csv.row({eps, dev});
  }
  c.require(devs[1] < devs[0] && devs[2] < devs[1],
            "sup|psi/eps - a_hat| strictly decreasing");
  c.require(devs[2] / devs[0] < 0.6, "d(0.025)/d(0.1) < 0.6");
  c.note("d = [" + num(devs[0]) + ", " + num(devs[1]) + ", " + num(devs[2]) +
         "], ratio " + num(devs[2] / devs[0]));
  return c;
}

// criterion 7: two point sources, two horizon components
inline Check disconnected_horizon(const std::filesystem::path& out) {
  Check c;
  const double eps = 0.1;
  Vec p2 = Vec::Zero(3);
  p2[0] = 10.0;
  const auto shape = Submanifold::point_set(3, {Vec::Zero(3), p2});
  const ConformalField field(shape, eps);
  const auto grid = build_grid(shape, 1, {32, 16}, GridMode::full);
  const auto h = solve_horizon(field, grid);
  c.require(h.converged, "solver converged");
  c.require(h.components == 2, "two components");
  double dev = 0.0;
  for (double p : h.psi) dev = std::max(dev, std::abs(p - eps));
  c.require(dev < 1e-3, "|psi - 0.1| < 1e-3 on both components");
  c.note("components=" + std::to_string(h.components) + ", max|psi-eps|=" +
         num(dev));
  CsvWriter csv(out / "horizon.csv", {"base_index", "fiber_index", "psi"}, run_hash());
  for (int i = 0; i < grid.size(); ++i)
    csv.row({static_cast<double>(grid.base_index[i]),
             static_cast<double>(grid.fiber_index[i]), h.psi[i]});
  return c;
}

// criterion 8: harmonicity of the sphere field at random off-S points
inline Check harmonicity(const std::filesystem::path& out) {
  Check c;
  const auto shape = Submanifold::round_sphere(4, 1, 1.0);
  const ConformalField field(shape, 0.05, 1e-11);
  std::mt19937_64 rng(424242);
  auto unif = [&rng](double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1p-53);
  };
  CsvWriter csv(out / "harmonicity.csv", {"x1", "x2", "x3", "x4", "residual"}, run_hash());
  double worst = 0.0;
  int found = 0;
  while (found < 100) {
    Vec x(4);
    for (int i = 0; i < 4; ++i) x[i] = unif(-2.0, 2.0);
    const double dist = shape.nearest(x).distance;
    if (dist < 0.2 || dist > 0.8) continue;
    ++found;
    const double r = field.harmonicity_residual(x);
    worst = std::max(worst, r);
    csv.row({x[0], x[1], x[2], x[3], r});
  }
  c.require(worst < 1e-4, "normalized Laplacian residual < 1e-4 at 100 points");
  c.note("worst residual " + num(worst));
  return c;
}

// criterion 9: asymptotic coefficient of the field expansion
inline Check asymptotic_coefficient(const std::filesystem::path& out) {
  Check c;
  CsvWriter csv(out / "fits.csv",
                {"case_id", "coefficient", "expected", "exponent"}, run_hash());
  {
    const auto shape = Submanifold::point_set(3, {Vec::Zero(3)});
    const ConformalField field(shape, 0.1);
    const auto fit = field.fit_asymptotic({5.0, 10.0, 20.0});
    c.require(std::abs(fit.coefficient / fit.predicted - 1.0) < 0.01,
              "single point: A within 1% of eps");
    csv.row({1.0, fit.coefficient, fit.predicted, fit.exponent});
  }
  {
    Vec a = Vec::Zero(3), b = Vec::Zero(3);
    a[0] = -5.0;
    b[0] = 5.0;
    const auto shape = Submanifold::point_set(3, {a, b});
    const ConformalField field(shape, 0.1);
    const auto fit = field.fit_asymptotic({100.0, 200.0, 400.0});
    c.require(std::abs(fit.coefficient / fit.predicted - 1.0) < 0.01,
              "point pair: A within 1% of 2 eps");
    csv.row({2.0, fit.coefficient, fit.predicted, fit.exponent});
  }
  {
    const auto shape = Submanifold::round_sphere(4, 1, 1.0);
    const ConformalField field(shape, 0.05, 1e-10);
    const auto fit = field.fit_asymptotic({20.0, 40.0, 80.0});
    c.require(std::abs(fit.coefficient / fit.predicted - 1.0) < 0.01,
              "circle: A within 1% of 2 pi eps");
    csv.row({3.0, fit.coefficient, fit.predicted, fit.exponent});
  }
  return c;
}

// criterion 10: blow-up convergence report
inline Check blowup_convergence(const std::filesystem::path& out) {
  Check c;
  const double ahat = critical_radius({4, 1});
  {
    const auto shape = Submanifold::round_sphere(4, 1, 1.0);
    Vec anchor = Vec::Zero(4);
    anchor[0] = 1.0;
    const auto window =
        ConvergenceWindow::build(shape, anchor, 3.0 * ahat, 0.5 * ahat, 2.0);
    const auto rep = convergence_report(shape, anchor, window, {0.2, 0.1, 0.05});
    c.require(rep.levels[1].sup_c0 < rep.levels[0].sup_c0 &&
                  rep.levels[2].sup_c0 < rep.levels[1].sup_c0,
              "sup C0 deviation strictly decreasing");
    c.require(rep.levels[1].sup_c1 < rep.levels[0].sup_c1 &&
                  rep.levels[2].sup_c1 < rep.levels[1].sup_c1,
              "sup C1 deviation strictly decreasing");
    CsvWriter csv(out / "levels.csv", {"epsilon", "sup_C0", "sup_C1", "metric_dev"}, run_hash());
    std::ostringstream devs;
    for (const auto& lev : rep.levels) {
      csv.row({lev.epsilon, lev.sup_c0, lev.sup_c1, lev.metric_dev});
      devs << " " << num(lev.sup_c0);
    }
    c.note("circle sup_C0:" + devs.str());
  }
  {
    const auto shape = Submanifold::point_set(3, {Vec::Zero(3)});
    const auto window =
        ConvergenceWindow::build(shape, Vec::Zero(3), 3.0, 0.5, 1.0);
    const auto rep = convergence_report(shape, Vec::Zero(3), window, {0.2, 0.1, 0.05});
    for (const auto& lev : rep.levels) {
      c.require(lev.sup_c0 <= 1e-12 && lev.metric_dev <= 1e-12 &&
                    lev.sup_c1 <= 1e-10,
                "point source deviations identically zero (roundoff)");
    }
  }
  return c;
}

// criterion 11: repeated runs produce byte-identical data artifacts
inline Check determinism(const std::filesystem::path& out) {
  Check c;
  const std::vector<std::pair<std::string, std::string>> jobs = {
      {"analyze-cylinder",
       R"({"n":4,"m":1,"shape":{"sphere":{"radius":1.0}},"epsilon":0.05})"},
      {"field-eval",
       R"({"n":4,"m":1,"shape":{"sphere":{"radius":1.0}},"epsilon":0.05,
           "points":[[1.2,0.0,0.1,0.0],[0.0,1.5,0.0,0.2],[2.0,2.0,2.0,2.0]]})"},
      {"scan-barriers",
       R"({"n":4,"m":1,"shape":{"sphere":{"radius":1.0}},"epsilon":0.05,
           "grid":{"mode":"reduced_1d","fiber":[48]},
           "scan":{"a_min":0.02,"a_max":0.9,"samples":40}})"},
      {"find-horizon",
       R"({"n":4,"m":1,"shape":{"sphere":{"radius":1.0}},"epsilon":0.05,
           "grid":{"mode":"reduced_1d","fiber":[48]}})"},
      {"verify-rescaling",
       R"({"n":4,"m":1,"shape":{"sphere":{"radius":1.0}},"epsilon":0.05,
           "rescaling":{"epsilons":[0.1,0.05],"tangent_samples":2,"normal_samples":4}})"},
      {"export-mesh",
       R"({"n":4,"m":1,"shape":{"sphere":{"radius":1.0}},"epsilon":0.05})"}};
  for (const auto& [cmd, cfg_text] : jobs) {
    const RunConfig cfg = parse_config_text(cfg_text);
    const auto dir_a = out / (cmd + "_run1");
    const auto dir_b = out / (cmd + "_run2");
    run_subcommand(cfg, cmd, dir_a);
    run_subcommand(cfg, cmd, dir_b);
    for (const auto& entry : std::filesystem::directory_iterator(dir_a)) {
      const std::string fname = entry.path().filename().string();
      if (fname == "run_manifest.json") continue;  // carries wall time
      std::ifstream fa(entry.path(), std::ios::binary);
      std::ifstream fb(dir_b / fname, std::ios::binary);
      std::stringstream sa, sb;
      sa << fa.rdbuf();
      sb << fb.rdbuf();
      c.require(fb.good() && sa.str() == sb.str(),
                cmd + ": " + fname + " byte-identical across runs");
    }
  }
  return c;
}

}  // namespace acceptance_detail

inline std::vector<CriterionResult> run_acceptance(
    const std::filesystem::path& out_dir, std::ostream& log) {
  namespace ad = acceptance_detail;
  std::filesystem::create_directories(out_dir);
  std::vector<CriterionResult> results;
  BarrierReport barrier_rep;  // shared between criteria 4 and 5

  using Fn = std::function<ad::Check(const std::filesystem::path&)>;
  const std::vector<std::pair<std::string, Fn>> criteria = {
      {"schwarzschild exactness", ad::schwarzschild_exactness},
      {"model constants", ad::model_constants},
      {"cylinder sign structure", ad::cylinder_signs},
      {"barrier bracketing",
       [&](const std::filesystem::path& p) {
         return ad::barrier_bracketing(p, barrier_rep);
       }},
      {"horizon confinement and graphicality",
       [&](const std::filesystem::path& p) {
         return ad::confinement_graphicality(p, barrier_rep);
       }},
      {"rescaled-limit convergence", ad::rescaled_limit},
      {"disconnected horizon", ad::disconnected_horizon},
      {"harmonicity / scalar flatness", ad::harmonicity},
      {"asymptotic coefficient", ad::asymptotic_coefficient},
      {"blow-up convergence", ad::blowup_convergence},
      {"determinism", ad::determinism},
  };

  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    char dirname[32];
    std::snprintf(dirname, sizeof(dirname), "criterion_%02d", id);
    const auto dir = out_dir / dirname;
    std::filesystem::create_directories(dir);
    CriterionResult r;
    r.id = id;
    r.name = criteria[i].first;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const ad::Check c = criteria[i].second(dir);
      r.passed = c.ok;
      r.details = c.details.str();
    } catch (const Error& e) {
      r.passed = false;
      r.details = std::string("exception: ") + e.what();
    }
    r.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    log << (r.passed ? "PASS" : "FAIL") << "  criterion " << r.id << ": "
        << r.name << " (" << ad::num(r.seconds, 3) << " s)";
    if (!r.details.empty()) log << " -- " << r.details;
    log << "\n";
    results.push_back(std::move(r));
  }

  Json j;
  Json arr = Json::array();
  for (const auto& r : results)
    arr.push_back(Json{{"id", r.id},
                       {"name", r.name},
                       {"passed", r.passed},
                       {"details", r.details}});
  j["criteria"] = arr;
  j["tool_version"] = kVersion;
  write_json_file(out_dir / "acceptance.json", j);
  return results;
}

}  // namespace horizonlab
