#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include "epshape/scenario.hpp"
#include "epshape/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPropertyFailed = 1;
constexpr int kExitBadInput = 2;
constexpr int kExitDiverged = 3;
constexpr int kExitNotEquilibrium = 4;

unsigned default_seed() {
  const char* s = std::getenv("EPSHAPE_SEED");
  if (s == nullptr || *s == '\0') return 42;
  char* end = nullptr;
  const unsigned long v = std::strtoul(s, &end, 10);
  if (end == s || *end != '\0') return 42;
  return static_cast<unsigned>(v);
}

int cmd_run(const std::string& path, const std::string& out_dir, bool force_reconstruct) {
  epshape::ParsedScenario parsed;
  try {
    parsed = epshape::load_scenario(path);
  } catch (const epshape::ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadInput;
  }
  epshape::Scenario& sc = parsed.scenario;
  if (force_reconstruct) sc.reconstruct = true;
  for (const std::string& w : parsed.warnings) std::cerr << "warning: " << w << "\n";

  epshape::Trajectory traj;
  try {
    traj = epshape::simulate(sc.system, sc.inertia, sc.controller, sc.initial, sc.integrator);
    if (sc.reconstruct) traj = epshape::reconstruct(traj, sc.initial_pose);
  } catch (const epshape::NonFiniteState& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDiverged;
  }

  std::ostringstream csv;
  epshape::write_trajectory_csv(sc.inertia, traj, csv);
  const std::string report = epshape::run_report_json(sc, traj, parsed.warnings);
  const std::filesystem::path base(out_dir);
  epshape::write_text_atomic((base / sc.outputs.trajectory_csv).string(), csv.str());
  epshape::write_text_atomic((base / sc.outputs.report_json).string(), report);
  std::cout << report;
  return kExitOk;
}

int cmd_verify(unsigned seed, const std::string& filter, const std::string& mutate) {
  const std::optional<epshape::ControlMutation> m = epshape::mutation_from_string(mutate);
  if (!m) {
    std::cerr << "error: unknown mutation \"" << mutate << "\"\n";
    return kExitBadInput;
  }
  epshape::VerifyOptions opts;
  opts.seed = seed;
  opts.filter = filter;
  opts.mutation = *m;
  const epshape::VerificationReport rep = epshape::run_verification(opts);
  for (const epshape::PropertyResult& p : rep.properties) {
    std::cerr << (p.pass ? "[PASS] " : "[FAIL] ") << p.name << " (measured " << p.measured
              << ", tolerance " << p.tolerance << ")\n";
  }
  if (rep.properties.empty()) {
    std::cerr << "error: no property name contains \"" << filter << "\"\n";
  }
  std::cout << epshape::verification_report_json(rep);
  return rep.all_pass ? kExitOk : kExitPropertyFailed;
}

int cmd_stability(const std::string& path) {
  epshape::ParsedScenario parsed;
  try {
    parsed = epshape::load_scenario(path);
  } catch (const epshape::ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadInput;
  }
  const epshape::Scenario& sc = parsed.scenario;
  for (const std::string& w : parsed.warnings) std::cerr << "warning: " << w << "\n";
  try {
    const epshape::StabilityReport rep =
        epshape::stability_report(sc.system, sc.inertia, sc.controller);
    std::cout << epshape::stability_report_json(sc, rep);
    return kExitOk;
  } catch (const epshape::NotAnEquilibrium& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNotEquilibrium;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rigid-body simulation with advected parameters: run, certify, assess stability"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir = ".";
  std::string filter;
  std::string mutate;
  bool force_reconstruct = false;
  unsigned seed = default_seed();

  CLI::App* run = app.add_subcommand("run", "Integrate a scenario; write trajectory CSV and run report JSON");
  run->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  run->add_option("--out", out_dir, "Output directory (created if missing)");
  run->add_flag("--reconstruct", force_reconstruct, "Also reconstruct the pose path");

  CLI::App* verify = app.add_subcommand("verify", "Run the self-certification property suite");
  verify->add_option("--seed", seed, "Seed for the property suite (default EPSHAPE_SEED or 42)");
  verify->add_option("--filter", filter, "Run only properties whose name contains this substring");
  verify->add_option("--mutate", mutate, "")->group("");  // test hook: flip one control term

  CLI::App* stability = app.add_subcommand("stability", "Assess the scenario's desired equilibrium");
  stability->add_option("scenario", scenario_path, "Scenario JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitBadInput;
  }

  try {
    if (run->parsed()) return cmd_run(scenario_path, out_dir, force_reconstruct);
    if (verify->parsed()) return cmd_verify(seed, filter, mutate);
    return cmd_stability(scenario_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadInput;
  }
}
