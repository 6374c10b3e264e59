// horizonlab: conformally flat initial data around a submanifold, tube
// barriers, and the outermost apparent horizon as a graph over the unit
// normal bundle.
//
// Usage: horizonlab <subcommand> --config <path> [--out <dir>]
//
// Exit codes: 0 ok, 2 config error, 3 numerical non-convergence,
//             4 regime error (no barrier found), 1 other failures.

#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "horizonlab/acceptance.hpp"
#include "horizonlab/runner.hpp"
#include "horizonlab/version.hpp"

namespace {

horizonlab::RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw horizonlab::ConfigError("<config>", "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return horizonlab::parse_config_text(ss.str());
}

void emit_error(const std::string& kind, const std::string& what) {
  horizonlab::Json j;
  j["error"] = kind;
  j["message"] = what;
  std::cerr << j.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"horizonlab: apparent horizons of conformally flat data "
               "concentrated near a submanifold"};
  app.set_version_flag("--version", horizonlab::kVersion);
  app.require_subcommand(1);

  const std::vector<std::string> commands = {
      "analyze-cylinder", "field-eval", "scan-barriers",
      "find-horizon",     "verify-rescaling", "export-mesh"};
  std::string config_path;
  std::string out_dir = "out";
  for (const auto& name : commands) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON run configuration")
        ->required();
    sub->add_option("--out", out_dir, "output directory");
  }
  auto* acc = app.add_subcommand("run-acceptance",
                                 "run every release criterion and report");
  acc->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    if (command == "run-acceptance") {
      const auto results = horizonlab::run_acceptance(out_dir, std::cout);
      bool all = true;
      for (const auto& r : results) all = all && r.passed;
      std::cout << (all ? "all criteria passed" : "some criteria FAILED")
                << std::endl;
      return all ? 0 : 1;
    }
    const horizonlab::RunConfig cfg = load_config(config_path);
    horizonlab::run_subcommand(cfg, command, out_dir);
    return 0;
  } catch (const horizonlab::ConfigError& e) {
    emit_error("config", e.what());
    return 2;
  } catch (const horizonlab::DimensionError& e) {
    emit_error("config", e.what());
    return 2;
  } catch (const horizonlab::BarrierNotFoundError& e) {
    emit_error("regime", e.what());
    return 4;
  } catch (const horizonlab::ConvergenceError& e) {
    emit_error("non-convergence", e.what());
    return 3;
  } catch (const horizonlab::ConfinementError& e) {
    emit_error("non-convergence", e.what());
    return 3;
  } catch (const std::exception& e) {
    emit_error("internal", e.what());
    return 1;
  }
}
