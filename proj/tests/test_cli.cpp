#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "horizonlab/runner.hpp"

using namespace horizonlab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path temp_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("horizonlab_test_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("config parsing accepts a minimal point configuration") {
  const auto cfg = parse_config_text(
      R"({"n":3,"m":0,"shape":{"points":[[0,0,0]]},"epsilon":0.1})");
  CHECK(cfg.dims.n == 3);
  CHECK(cfg.kind == RunConfig::ShapeKind::points);
  CHECK(cfg.epsilon() == 0.1);
  CHECK(cfg.echo.contains("tolerances"));
  // defaults echoed back
  CHECK(cfg.echo["tolerances"]["quadrature"] == 1e-9);
}

TEST_CASE("config parsing rejects bad inputs with field names") {
  SECTION("codimension violation") {
    try {
      parse_config_text(
          R"({"n":4,"m":2,"shape":{"sphere":{"radius":1.0}},"epsilon":0.1})");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("codimension") != std::string::npos);
    }
  }
  SECTION("missing epsilon") {
    try {
      parse_config_text(R"({"n":3,"m":0,"shape":{"points":[[0,0,0]]}})");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.field == "epsilon");
    }
  }
  SECTION("unknown shape") {
    CHECK_THROWS_AS(
        parse_config_text(R"({"n":3,"m":0,"shape":{"cube":{}},"epsilon":0.1})"),
        ConfigError);
  }
  SECTION("wrong point arity") {
    CHECK_THROWS_AS(
        parse_config_text(
            R"({"n":3,"m":0,"shape":{"points":[[0,0]]},"epsilon":0.1})"),
        ConfigError);
  }
  SECTION("invalid JSON") {
    CHECK_THROWS_AS(parse_config_text("{nope"), ConfigError);
  }
}

TEST_CASE("analyze-cylinder artifacts") {
  const auto dir = temp_dir("cyl");
  const auto cfg = parse_config_text(
      R"({"n":4,"m":1,"shape":{"sphere":{"radius":1.0}},"epsilon":0.05})");
  run_subcommand(cfg, "analyze-cylinder", dir);
  REQUIRE(fs::exists(dir / "cylinder.json"));
  const Json j = Json::parse(slurp(dir / "cylinder.json"));
  CHECK(j["a_hat"].get<double>() ==
        Catch::Approx(0.5 * std::numbers::pi).epsilon(1e-12));
  CHECK(j["config_hash"].get<std::string>().size() == 16);
  REQUIRE(fs::exists(dir / "run_manifest.json"));
  const Json m = Json::parse(slurp(dir / "run_manifest.json"));
  CHECK(m["command"] == "analyze-cylinder");
  CHECK(m["config"]["n"] == 4);
}

TEST_CASE("field-eval writes the evaluation table") {
  const auto dir = temp_dir("fe");
  const auto cfg = parse_config_text(
      R"({"n":3,"m":0,"shape":{"points":[[0,0,0]]},"epsilon":0.1,
          "points":[[0.1,0,0],[1,1,1]]})");
  run_subcommand(cfg, "field-eval", dir);
  const std::string csv = slurp(dir / "field_eval.csv");
  CHECK(csv.find("# config_hash=") == 0);
  CHECK(csv.find("x1,x2,x3,u,du1,du2,du3") != std::string::npos);
  // first point: u = 2 exactly
  CHECK(csv.find("\n0.10000000000000001,0,0,2,") != std::string::npos);
}

TEST_CASE("field-eval accepts a CSV of input points") {
  const auto dir = temp_dir("fecsv");
  const auto csv_in = dir / "pts.csv";
  {
    std::ofstream f(csv_in);
    f << "x1,x2,x3\n0.1,0,0\n0.5,0.5,0\n";
  }
  const auto cfg = parse_config_text(
      R"({"n":3,"m":0,"shape":{"points":[[0,0,0]]},"epsilon":0.1,
          "points_csv":")" +
      csv_in.string() + R"("})");
  CHECK(cfg.eval_points.size() == 2);
  run_subcommand(cfg, "field-eval", dir);
  const std::string csv = slurp(dir / "field_eval.csv");
  CHECK(csv.find("\n0.10000000000000001,0,0,2,") != std::string::npos);
}

TEST_CASE("find-horizon and scan-barriers artifacts") {
  const auto dir = temp_dir("fh");
  const auto cfg = parse_config_text(
      R"({"n":3,"m":0,"shape":{"points":[[0,0,0]]},"epsilon":0.1,
          "grid":{"fiber":[16,8]},
          "scan":{"a_min":0.02,"a_max":0.8,"samples":30}})");
  run_subcommand(cfg, "scan-barriers", dir);
  const Json b = Json::parse(slurp(dir / "barriers.json"));
  CHECK(b["c_inner"].get<double>() < 1.0);
  CHECK(b["c_outer"].get<double>() > 1.0);

  run_subcommand(cfg, "find-horizon", dir);
  const Json h = Json::parse(slurp(dir / "horizon.json"));
  REQUIRE(h["runs"].size() == 1);
  CHECK(h["runs"][0]["converged"].get<bool>());
  CHECK(h["runs"][0]["psi_min"].get<double>() == Catch::Approx(0.1).margin(1e-4));
  REQUIRE(fs::exists(dir / "horizon_0.csv"));
}

TEST_CASE("find-horizon certification block") {
  const auto dir = temp_dir("cert");
  const auto cfg = parse_config_text(
      R"({"n":4,"m":1,"shape":{"sphere":{"radius":1.0}},"epsilon":0.05,
          "grid":{"mode":"reduced_1d","fiber":[48]},
          "scan":{"a_min":0.02,"a_max":0.9,"samples":40},
          "solver":{"certify":true}})");
  run_subcommand(cfg, "find-horizon", dir);
  const Json h = Json::parse(slurp(dir / "horizon.json"));
  const Json& cert = h["runs"][0]["certificate"];
  CHECK(cert["confined"].get<bool>());
  CHECK(cert["bidirectional_sup_diff"].get<double>() < 1e-5);
  CHECK(cert["c_inner"].get<double>() < cert["c_outer"].get<double>());
}

TEST_CASE("verify-rescaling artifacts") {
  const auto dir = temp_dir("vr");
  const auto cfg = parse_config_text(
      R"({"n":4,"m":1,"shape":{"sphere":{"radius":1.0}},"epsilon":0.05,
          "rescaling":{"epsilons":[0.1,0.05],"tangent_samples":2,"normal_samples":4}})");
  run_subcommand(cfg, "verify-rescaling", dir);
  const Json r = Json::parse(slurp(dir / "rescaling.json"));
  REQUIRE(r["levels"].size() == 2);
  CHECK(r["levels"][1]["sup_C0"].get<double>() <
        r["levels"][0]["sup_C0"].get<double>());
}

TEST_CASE("export-mesh emits a valid OBJ") {
  SECTION("spheres for n = 3 point sets") {
    const auto dir = temp_dir("objp");
    const auto cfg = parse_config_text(
        R"({"n":3,"m":0,"shape":{"points":[[0,0,0]]},"epsilon":0.1,
            "export":{"tube_radius":0.2,"segments":16}})");
    run_subcommand(cfg, "export-mesh", dir);
    const std::string obj = slurp(dir / "tube.obj");
    CHECK(obj.find("v ") != std::string::npos);
    CHECK(obj.find("f ") != std::string::npos);
  }
  SECTION("projected section for n = 4") {
    const auto dir = temp_dir("objs");
    const auto cfg = parse_config_text(
        R"({"n":4,"m":1,"shape":{"sphere":{"radius":1.0}},"epsilon":0.05,
            "export":{"tube_radius":0.1,"segments":24}})");
    run_subcommand(cfg, "export-mesh", dir);
    const Json e = Json::parse(slurp(dir / "export.json"));
    CHECK(e["vertices"].get<int>() == 24 * 24);
    CHECK(e["faces"].get<int>() == 24 * 24);
  }
}

TEST_CASE("identical configs produce byte-identical artifacts") {
  const auto cfg = parse_config_text(
      R"({"n":4,"m":1,"shape":{"sphere":{"radius":1.0}},"epsilon":0.05,
          "grid":{"mode":"reduced_1d","fiber":[32]}})");
  const auto d1 = temp_dir("det1");
  const auto d2 = temp_dir("det2");
  run_subcommand(cfg, "find-horizon", d1);
  run_subcommand(cfg, "find-horizon", d2);
  CHECK(slurp(d1 / "horizon_0.csv") == slurp(d2 / "horizon_0.csv"));
  CHECK(slurp(d1 / "horizon.json") == slurp(d2 / "horizon.json"));
}

TEST_CASE("unknown subcommand rejected") {
  const auto cfg = parse_config_text(
      R"({"n":3,"m":0,"shape":{"points":[[0,0,0]]},"epsilon":0.1})");
  CHECK_THROWS_AS(run_subcommand(cfg, "frobnicate", temp_dir("bad")),
                  ConfigError);
}
