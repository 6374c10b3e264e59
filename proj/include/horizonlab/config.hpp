#pragma once

#include <algorithm>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "horizonlab/cylinder_model.hpp"
#include "horizonlab/horizon.hpp"
#include "horizonlab/report.hpp"
#include "horizonlab/submanifold.hpp"
#include "horizonlab/uns_grid.hpp"

namespace horizonlab {

/// Fully validated run configuration with defaults applied. The `echo`
/// member is the canonical JSON (inputs plus defaults) that artifacts embed
/// and hash, so a run is reproducible from its own outputs.
struct RunConfig {
  enum class ShapeKind { points, sphere, product };

  Dimensions dims;
  ShapeKind kind = ShapeKind::points;
  std::vector<Vec> shape_points;
  double sphere_radius = 1.0;
  std::vector<int> product_block_dims;
  std::vector<double> product_radii;

  std::vector<double> epsilons;

  GridMode mode = GridMode::full;
  int base_count = 16;
  std::vector<int> fiber_counts;

  double quad_tol = 1e-9;
  double solver_tol = 1e-8;
  double switch_threshold = 1e-2;
  int max_iterations = 200000;
  std::optional<double> initial_psi;
  bool split_components = true;
  bool certify = false;  // barrier scan + bidirectional + conformal cross-check

  double scan_a_min = 0.0;  // defaulted from the model radius when <= 0
  double scan_a_max = 0.0;
  int scan_samples = 60;

  double resc_gamma = 0.0;  // defaulted to n - 2 when <= 0
  double resc_beta1 = 0.0;  // defaulted to 3 * a_hat
  double resc_beta2 = 0.0;  // defaulted to a_hat / 2
  std::vector<double> resc_epsilons;
  int resc_tangent_samples = 3;
  int resc_normal_samples = 6;

  std::vector<Vec> eval_points;

  double mesh_tube_radius = 0.0;  // defaulted to a_hat * epsilon
  int mesh_segments = 48;

  Json echo;

  Submanifold make_shape() const {
    switch (kind) {
      case ShapeKind::points:
        return Submanifold::point_set(dims.n, shape_points);
      case ShapeKind::sphere:
        return Submanifold::round_sphere(dims.n, dims.m, sphere_radius);
      case ShapeKind::product:
        return Submanifold::product_of_spheres(dims.n, product_block_dims,
                                               product_radii);
    }
    throw Error("unreachable shape kind");
  }

  UNSGrid make_grid() const {
    return build_grid(make_shape(), base_count, fiber_counts, mode);
  }

  double epsilon() const { return epsilons.front(); }

  SolveOptions solve_options() const {
    SolveOptions o;
    o.tol = solver_tol;
    o.switch_threshold = switch_threshold;
    o.max_iterations = max_iterations;
    o.initial_psi = initial_psi;
    o.split_components = split_components;
    return o;
  }
};

namespace detail {

inline const Json& require_field(const Json& j, const std::string& key) {
  if (!j.contains(key)) throw ConfigError(key, "missing required field");
  return j.at(key);
}

template <class T>
T field_as(const Json& j, const std::string& key) {
  try {
    return require_field(j, key).get<T>();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(key, e.what());
  }
}

template <class T>
T field_or(const Json& j, const std::string& key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const std::exception& e) {
    throw ConfigError(key, e.what());
  }
}

}  // namespace detail

inline RunConfig parse_config(const Json& j) {
  using detail::field_as;
  using detail::field_or;
  RunConfig c;
  c.dims = Dimensions{field_as<int>(j, "n"), field_as<int>(j, "m")};
  try {
    c.dims.validate();
  } catch (const DimensionError& e) {
    throw ConfigError("m", e.what());
  }

  const Json& shape = detail::require_field(j, "shape");
  if (shape.contains("points")) {
    c.kind = RunConfig::ShapeKind::points;
    if (c.dims.m != 0) throw ConfigError("m", "point sets require m = 0");
    for (const auto& p : shape.at("points")) {
      if (!p.is_array() || static_cast<int>(p.size()) != c.dims.n)
        throw ConfigError("shape.points", "each point needs n coordinates");
      Vec v(c.dims.n);
      for (int i = 0; i < c.dims.n; ++i) v[i] = p.at(i).get<double>();
      c.shape_points.push_back(v);
    }
    if (c.shape_points.empty())
      throw ConfigError("shape.points", "need at least one point");
  } else if (shape.contains("sphere")) {
    c.kind = RunConfig::ShapeKind::sphere;
    if (c.dims.m < 1) throw ConfigError("m", "spheres require m >= 1");
    c.sphere_radius = field_as<double>(shape.at("sphere"), "radius");
    if (!(c.sphere_radius > 0.0))
      throw ConfigError("shape.sphere.radius", "must be positive");
  } else if (shape.contains("product")) {
    c.kind = RunConfig::ShapeKind::product;
    const Json& pr = shape.at("product");
    c.product_block_dims = field_as<std::vector<int>>(pr, "block_dims");
    c.product_radii = field_as<std::vector<double>>(pr, "radii");
    int msum = 0;
    for (int b : c.product_block_dims) msum += b;
    if (msum != c.dims.m)
      throw ConfigError("shape.product.block_dims", "block dims must sum to m");
  } else {
    throw ConfigError("shape", "expected one of points / sphere / product");
  }

  if (j.contains("epsilons")) {
    c.epsilons = field_as<std::vector<double>>(j, "epsilons");
  } else if (j.contains("epsilon")) {
    c.epsilons = {field_as<double>(j, "epsilon")};
  } else {
    throw ConfigError("epsilon", "missing required field");
  }
  for (double e : c.epsilons)
    if (!(e > 0.0)) throw ConfigError("epsilon", "must be positive");

  const Json grid = field_or<Json>(j, "grid", Json::object());
  const std::string mode = detail::field_or<std::string>(grid, "mode", "full");
  if (mode == "full")
    c.mode = GridMode::full;
  else if (mode == "reduced_1d")
    c.mode = GridMode::reduced_1d;
  else
    throw ConfigError("grid.mode", "expected full or reduced_1d");
  c.base_count = detail::field_or<int>(grid, "base", 16);
  if (grid.contains("fiber")) {
    c.fiber_counts = detail::field_as<std::vector<int>>(grid, "fiber");
  } else {
    if (c.mode == GridMode::reduced_1d)
      c.fiber_counts = {64};
    else {
      c.fiber_counts.assign(static_cast<std::size_t>(c.dims.fiber_dimension()), 16);
      if (!c.fiber_counts.empty()) c.fiber_counts.back() = 32;
    }
  }

  const Json tol = field_or<Json>(j, "tolerances", Json::object());
  c.quad_tol = detail::field_or<double>(tol, "quadrature", 1e-9);
  c.solver_tol = detail::field_or<double>(tol, "solver", 1e-8);
  if (!(c.quad_tol > 0.0)) throw ConfigError("tolerances.quadrature", "must be positive");
  if (!(c.solver_tol > 0.0)) throw ConfigError("tolerances.solver", "must be positive");

  const Json solver = field_or<Json>(j, "solver", Json::object());
  c.switch_threshold = detail::field_or<double>(solver, "switch_threshold", 1e-2);
  c.max_iterations = detail::field_or<int>(solver, "max_iterations", 200000);
  if (solver.contains("initial_psi") && !solver.at("initial_psi").is_null())
    c.initial_psi = solver.at("initial_psi").get<double>();
  c.split_components = detail::field_or<bool>(solver, "split_components", true);
  c.certify = detail::field_or<bool>(solver, "certify", false);

  const double ahat = critical_radius(c.dims);
  const Json scan = field_or<Json>(j, "scan", Json::object());
  c.scan_a_min = detail::field_or<double>(scan, "a_min", 0.2 * ahat * c.epsilons.front());
  double reach_cap = 0.0;
  {
    // default upper end: just inside the reach, or a few model radii for
    // shapes with infinite reach
    const Submanifold s = c.make_shape();
    const double reach = s.reach();
    const double wide = std::max(1.0, 20.0 * ahat * c.epsilons.front());
    reach_cap = std::isfinite(reach) ? 0.9 * reach : wide;
  }
  c.scan_a_max = detail::field_or<double>(scan, "a_max", reach_cap);
  c.scan_samples = detail::field_or<int>(scan, "samples", 60);

  const Json resc = field_or<Json>(j, "rescaling", Json::object());
  c.resc_gamma = detail::field_or<double>(resc, "gamma", static_cast<double>(c.dims.n - 2));
  c.resc_beta1 = detail::field_or<double>(resc, "beta1", 3.0 * ahat);
  c.resc_beta2 = detail::field_or<double>(resc, "beta2", 0.5 * ahat);
  c.resc_epsilons = detail::field_or<std::vector<double>>(resc, "epsilons", c.epsilons);
  c.resc_tangent_samples = detail::field_or<int>(resc, "tangent_samples", 3);
  c.resc_normal_samples = detail::field_or<int>(resc, "normal_samples", 6);

  if (j.contains("points")) {
    for (const auto& p : j.at("points")) {
      if (!p.is_array() || static_cast<int>(p.size()) != c.dims.n)
        throw ConfigError("points", "each point needs n coordinates");
      Vec v(c.dims.n);
      for (int i = 0; i < c.dims.n; ++i) v[i] = p.at(i).get<double>();
      c.eval_points.push_back(v);
    }
  }
  if (j.contains("points_csv")) {
    const std::string path = field_as<std::string>(j, "points_csv");
    std::ifstream in(path);
    if (!in) throw ConfigError("points_csv", "cannot open " + path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      if (line.find_first_not_of("0123456789+-.eE, \t\r") != std::string::npos)
        continue;  // header row
      Vec v(c.dims.n);
      std::size_t pos = 0;
      for (int i = 0; i < c.dims.n; ++i) {
        std::size_t used = 0;
        try {
          v[i] = std::stod(line.substr(pos), &used);
        } catch (const std::exception&) {
          throw ConfigError("points_csv", "bad row: " + line);
        }
        pos += used;
        if (i + 1 < c.dims.n) {
          pos = line.find(',', pos);
          if (pos == std::string::npos)
            throw ConfigError("points_csv", "row needs n columns: " + line);
          ++pos;
        }
      }
      c.eval_points.push_back(v);
    }
  }

  const Json mesh = field_or<Json>(j, "export", Json::object());
  c.mesh_tube_radius =
      detail::field_or<double>(mesh, "tube_radius", ahat * c.epsilons.front());
  c.mesh_segments = detail::field_or<int>(mesh, "segments", 48);

  // canonical echo with every default materialized
  Json echo;
  echo["n"] = c.dims.n;
  echo["m"] = c.dims.m;
  switch (c.kind) {
    case RunConfig::ShapeKind::points: {
      Json pts = Json::array();
      for (const auto& p : c.shape_points) {
        Json row = Json::array();
        for (int i = 0; i < c.dims.n; ++i) row.push_back(p[i]);
        pts.push_back(row);
      }
      echo["shape"] = Json{{"points", pts}};
      break;
    }
    case RunConfig::ShapeKind::sphere:
      echo["shape"] = Json{{"sphere", Json{{"radius", c.sphere_radius}}}};
      break;
    case RunConfig::ShapeKind::product:
      echo["shape"] = Json{{"product", Json{{"block_dims", c.product_block_dims},
                                            {"radii", c.product_radii}}}};
      break;
  }
  echo["epsilons"] = c.epsilons;
  echo["grid"] = Json{{"mode", c.mode == GridMode::full ? "full" : "reduced_1d"},
                      {"base", c.base_count},
                      {"fiber", c.fiber_counts}};
  echo["tolerances"] = Json{{"quadrature", c.quad_tol}, {"solver", c.solver_tol}};
  echo["solver"] =
      Json{{"switch_threshold", c.switch_threshold},
           {"max_iterations", c.max_iterations},
           {"initial_psi", c.initial_psi ? Json(*c.initial_psi) : Json(nullptr)},
           {"split_components", c.split_components},
           {"certify", c.certify}};
  echo["scan"] = Json{{"a_min", c.scan_a_min},
                      {"a_max", c.scan_a_max},
                      {"samples", c.scan_samples}};
  echo["rescaling"] = Json{{"gamma", c.resc_gamma},
                           {"beta1", c.resc_beta1},
                           {"beta2", c.resc_beta2},
                           {"epsilons", c.resc_epsilons},
                           {"tangent_samples", c.resc_tangent_samples},
                           {"normal_samples", c.resc_normal_samples}};
  if (!c.eval_points.empty()) {
    Json pts = Json::array();
    for (const auto& p : c.eval_points) {
      Json row = Json::array();
      for (int i = 0; i < c.dims.n; ++i) row.push_back(p[i]);
      pts.push_back(row);
    }
    echo["points"] = pts;
  }
  echo["export"] = Json{{"tube_radius", c.mesh_tube_radius},
                        {"segments", c.mesh_segments}};
  c.echo = std::move(echo);
  return c;
}

inline RunConfig parse_config_text(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

}  // namespace horizonlab
