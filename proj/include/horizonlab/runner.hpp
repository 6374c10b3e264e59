#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <string>

#include "horizonlab/config.hpp"
#include "horizonlab/horizon.hpp"
#include "horizonlab/rescaling.hpp"
#include "horizonlab/version.hpp"

namespace horizonlab {

namespace detail {

inline void write_manifest(const std::filesystem::path& out,
                           const std::string& command, const RunConfig& cfg,
                           double wall_ms) {
  Json m;
  m["command"] = command;
  m["tool_version"] = kVersion;
  m["config"] = cfg.echo;
  m["config_hash"] = config_hash(cfg.echo);
  m["wall_ms"] = wall_ms;  // timing lives here and only here
  write_json_file(out / "run_manifest.json", m);
}

}  // namespace detail

inline void run_analyze_cylinder(const RunConfig& cfg,
                                 const std::filesystem::path& out) {
  const auto model = CylinderModel::build(cfg.dims);
  Json j;
  j["config_hash"] = config_hash(cfg.echo);
  j["n"] = cfg.dims.n;
  j["m"] = cfg.dims.m;
  j["C"] = model.ratio;
  j["D"] = model.potential;
  j["a_hat"] = model.critical;
  j["u_infinity_at_a_hat"] = cylinder_conformal_factor(cfg.dims, model.critical);
  write_json_file(out / "cylinder.json", j);

  CsvWriter csv(out / "cylinder_scan.csv",
                {"a", "u_infinity", "mean_curvature"}, config_hash(cfg.echo));
  const int rows = 200;
  for (int i = 0; i < rows; ++i) {
    const double a =
        model.critical * std::pow(100.0, -1.0 + 2.0 * i / (rows - 1.0));
    csv.row({a, cylinder_conformal_factor(cfg.dims, a),
             cylinder_mean_curvature(cfg.dims, a)});
  }
}

inline void run_field_eval(const RunConfig& cfg,
                           const std::filesystem::path& out) {
  if (cfg.eval_points.empty())
    throw ConfigError("points", "field-eval needs evaluation points");
  const ConformalField field(cfg.make_shape(), cfg.epsilon(), cfg.quad_tol);
  std::vector<std::string> header;
  for (int i = 0; i < cfg.dims.n; ++i) header.push_back("x" + std::to_string(i + 1));
  header.push_back("u");
  for (int i = 0; i < cfg.dims.n; ++i) header.push_back("du" + std::to_string(i + 1));
  CsvWriter csv(out / "field_eval.csv", header, config_hash(cfg.echo));
  for (const auto& x : cfg.eval_points) {
    const FieldEval e = field.evaluate(x);
    std::vector<double> row;
    for (int i = 0; i < cfg.dims.n; ++i) row.push_back(x[i]);
    row.push_back(e.u);
    for (int i = 0; i < cfg.dims.n; ++i) row.push_back(e.grad[i]);
    csv.row(row);
  }
  Json j;
  j["config_hash"] = config_hash(cfg.echo);
  j["points"] = cfg.eval_points.size();
  j["epsilon"] = cfg.epsilon();
  write_json_file(out / "field_eval.json", j);
}

inline BarrierReport run_scan_barriers(const RunConfig& cfg,
                                       const std::filesystem::path& out) {
  const ConformalField field(cfg.make_shape(), cfg.epsilon(), cfg.quad_tol);
  const UNSGrid grid = cfg.make_grid();
  const auto rep =
      scan_barriers(field, grid, cfg.scan_a_min, cfg.scan_a_max, cfg.scan_samples);
  Json j;
  j["config_hash"] = config_hash(cfg.echo);
  j["epsilon"] = rep.epsilon;
  j["a_hat"] = rep.critical;
  j["c_inner"] = rep.c_inner;
  j["c_outer"] = rep.c_outer;
  j["r_outer"] = rep.r_outer;
  j["r_end"] = rep.r_end;
  write_json_file(out / "barriers.json", j);
  CsvWriter csv(out / "barrier_scan.csv", {"a", "a_over_eps", "min_h", "max_h"},
                config_hash(cfg.echo));
  for (const auto& row : rep.rows)
    csv.row({row.a, row.a / rep.epsilon, row.min_h, row.max_h});
  return rep;
}

inline void run_find_horizon(const RunConfig& cfg,
                             const std::filesystem::path& out) {
  const Submanifold shape = cfg.make_shape();
  const UNSGrid grid = cfg.make_grid();
  Json runs = Json::array();
  for (std::size_t e = 0; e < cfg.epsilons.size(); ++e) {
    const ConformalField field(shape, cfg.epsilons[e], cfg.quad_tol);
    const HorizonGraph h = solve_horizon(field, grid, cfg.solve_options());
    CsvWriter csv(out / ("horizon_" + std::to_string(e) + ".csv"),
                  {"base_index", "fiber_index", "psi", "residual"},
                  config_hash(cfg.echo));
    for (int i = 0; i < grid.size(); ++i)
      csv.row({static_cast<double>(grid.base_index[i]),
               static_cast<double>(grid.fiber_index[i]), h.psi[i],
               h.residual[i]});
    Json r;
    r["epsilon"] = cfg.epsilons[e];
    r["a_hat"] = critical_radius(cfg.dims);
    r["psi_min"] = h.psi_min;
    r["psi_max"] = h.psi_max;
    r["sup_residual"] = h.sup_residual;
    r["iterations"] = h.iterations;
    r["converged"] = h.converged;
    r["components"] = h.components;
    r["slope_sup"] = h.slope_sup;
    if (cfg.certify) {
      // barrier confinement, bidirectional initialization, and the
      // independent conformal-law residual on the solved graph
      const auto rep = scan_barriers(field, grid, cfg.scan_a_min,
                                     cfg.scan_a_max, cfg.scan_samples);
      const auto both = certify_outermost(field, grid, rep, cfg.solve_options());
      const auto cert = certify_residual(field, grid, h.psi);
      const double eps = cfg.epsilons[e];
      r["certificate"] =
          Json{{"c_inner", rep.c_inner},
               {"c_outer", rep.c_outer},
               {"confined", h.psi_min > rep.c_inner * eps &&
                                h.psi_max < rep.c_outer * eps},
               {"bidirectional_sup_diff", both.sup_difference},
               {"conformal_route_sup", cert.sup_conformal_route},
               {"route_difference", cert.sup_difference}};
    }
    runs.push_back(r);
  }
  Json j;
  j["config_hash"] = config_hash(cfg.echo);
  j["runs"] = runs;
  write_json_file(out / "horizon.json", j);
}

inline void run_verify_rescaling(const RunConfig& cfg,
                                 const std::filesystem::path& out) {
  const Submanifold shape = cfg.make_shape();
  Vec anchor;
  if (shape.is_point_set())
    anchor = shape.points().front();
  else {
    anchor = Vec::Zero(cfg.dims.n);
    anchor[0] = shape.blocks()[0].radius;
  }
  const auto window =
      ConvergenceWindow::build(shape, anchor, cfg.resc_beta1, cfg.resc_beta2,
                               cfg.resc_gamma, cfg.resc_tangent_samples,
                               cfg.resc_normal_samples);
  const auto rep =
      convergence_report(shape, anchor, window, cfg.resc_epsilons, cfg.quad_tol);
  Json j;
  j["config_hash"] = config_hash(cfg.echo);
  j["gamma"] = cfg.resc_gamma;
  j["beta1"] = cfg.resc_beta1;
  j["beta2"] = cfg.resc_beta2;
  Json levels = Json::array();
  for (const auto& lev : rep.levels)
    levels.push_back(Json{{"epsilon", lev.epsilon},
                          {"sup_C0", lev.sup_c0},
                          {"sup_C1", lev.sup_c1},
                          {"metric_dev", lev.metric_dev}});
  j["levels"] = levels;
  write_json_file(out / "rescaling.json", j);

  std::vector<std::string> header{"level", "epsilon"};
  for (int i = 0; i < cfg.dims.n; ++i) header.push_back("zeta" + std::to_string(i + 1));
  header.insert(header.end(), {"f_k", "f_limit", "deviation"});
  CsvWriter csv(out / "rescaling_points.csv", header, config_hash(cfg.echo));
  for (const auto& pt : rep.table) {
    std::vector<double> row{static_cast<double>(pt.level),
                            rep.levels[pt.level].epsilon};
    for (int i = 0; i < cfg.dims.n; ++i) row.push_back(pt.zeta[i]);
    row.insert(row.end(), {pt.f_k, pt.f_limit, std::abs(pt.f_k - pt.f_limit)});
    csv.row(row);
  }
}

/// Tube section mesh: for n = 3 the full tube spheres around each point; for
/// n >= 4 a two-parameter section (first base angle x colatitude toward the
/// first flat normal direction), projected to the first three coordinates.
inline void run_export_mesh(const RunConfig& cfg,
                            const std::filesystem::path& out) {
  const Submanifold shape = cfg.make_shape();
  const double a = cfg.mesh_tube_radius;
  if (!(a > 0.0) || a >= shape.reach())
    throw DomainError("export tube radius must lie in (0, reach)");
  const int seg = std::max(8, cfg.mesh_segments);
  std::ofstream obj(out / "tube.obj");
  if (!obj) throw Error("cannot write tube.obj");
  obj << "# config_hash=" << config_hash(cfg.echo) << "\n";
  obj << "# tubular hypersurface export, radius " << fmt17(a) << "\n";
  std::size_t vertices = 0, faces = 0;

  auto emit_vertex = [&](const Vec& p) {
    obj << "v";
    for (int i = 0; i < 3; ++i)
      obj << " " << fmt17(i < p.size() ? p[i] : 0.0);
    obj << "\n";
    ++vertices;
  };

  if (shape.is_point_set() && cfg.dims.n == 3) {
    for (const auto& p : shape.points()) {
      const std::size_t base = vertices;
      const int nt = seg / 2, np = seg;
      for (int i = 0; i <= nt; ++i)
        for (int j = 0; j < np; ++j) {
          const double th = std::numbers::pi * i / nt;
          const double ph = 2.0 * std::numbers::pi * j / np;
          Vec v(3);
          v << p[0] + a * std::cos(th),
              p[1] + a * std::sin(th) * std::cos(ph),
              p[2] + a * std::sin(th) * std::sin(ph);
          emit_vertex(v);
        }
      for (int i = 0; i < nt; ++i)
        for (int j = 0; j < np; ++j) {
          const auto id = [&](int ii, int jj) {
            return base + ii * np + (jj % np) + 1;  // OBJ is 1-based
          };
          obj << "f " << id(i, j) << " " << id(i + 1, j) << " "
              << id(i + 1, j + 1) << " " << id(i, j + 1) << "\n";
          ++faces;
        }
    }
  } else {
    // (theta, phi) section: base angle along the first block, normal angle
    // between the radial direction and the first flat normal axis
    const auto blocks = shape.blocks();
    if (blocks.empty())
      throw DomainError("mesh export for point sets needs n = 3");
    const double R = blocks[0].radius;
    const int flat_axis = [&] {
      int off = 0;
      for (const auto& b : blocks) off = std::max(off, b.offset + b.m + 1);
      return off;
    }();
    const std::size_t base = vertices;
    for (int i = 0; i < seg; ++i)
      for (int j = 0; j < seg; ++j) {
        const double th = 2.0 * std::numbers::pi * i / seg;
        const double ph = 2.0 * std::numbers::pi * j / seg;
        Vec v = Vec::Zero(cfg.dims.n);
        v[0] = (R + a * std::cos(ph)) * std::cos(th);
        v[1] = (R + a * std::cos(ph)) * std::sin(th);
        v[flat_axis] = a * std::sin(ph);
        emit_vertex(v);
      }
    for (int i = 0; i < seg; ++i)
      for (int j = 0; j < seg; ++j) {
        const auto id = [&](int ii, int jj) {
          return base + (ii % seg) * seg + (jj % seg) + 1;
        };
        obj << "f " << id(i, j) << " " << id(i + 1, j) << " "
            << id(i + 1, j + 1) << " " << id(i, j + 1) << "\n";
        ++faces;
      }
  }
  Json j;
  j["config_hash"] = config_hash(cfg.echo);
  j["vertices"] = vertices;
  j["faces"] = faces;
  write_json_file(out / "export.json", j);
}

/// Dispatch a subcommand, writing its artifacts and the run manifest.
/// Throws typed errors; the CLI maps them to exit codes.
inline void run_subcommand(const RunConfig& cfg, const std::string& command,
                           const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const auto t0 = std::chrono::steady_clock::now();
  if (command == "analyze-cylinder")
    run_analyze_cylinder(cfg, out_dir);
  else if (command == "field-eval")
    run_field_eval(cfg, out_dir);
  else if (command == "scan-barriers")
    run_scan_barriers(cfg, out_dir);
  else if (command == "find-horizon")
    run_find_horizon(cfg, out_dir);
  else if (command == "verify-rescaling")
    run_verify_rescaling(cfg, out_dir);
  else if (command == "export-mesh")
    run_export_mesh(cfg, out_dir);
  else
    throw ConfigError("command", "unknown subcommand " + command);
  const double ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
  detail::write_manifest(out_dir, command, cfg, ms);
}

}  // namespace horizonlab
