#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "epshape/sim.hpp"

namespace epshape {

/// Output file names, joined to the run command's --out directory.
struct OutputConfig {
  std::string trajectory_csv = "trajectory.csv";
  std::string report_json = "report.json";
};

/// A fully validated run description.
struct Scenario {
  SystemId system = SystemId::UnderwaterVehicle;
  InertiaParams inertia = InertiaParams::defaults();
  Controller controller{};
  ReducedState initial{};
  IntegratorConfig integrator{};
  OutputConfig outputs{};
  bool reconstruct = false;
  SE3Element initial_pose{};
};

struct ParsedScenario {
  Scenario scenario;
  /// Non-fatal validation notes (e.g. gain conditions violated).
  std::vector<std::string> warnings;
};

/// Parse and validate scenario JSON. Unknown keys, malformed values, missing
/// required fields, non-finite numbers, invalid rotations, non-SPD matrices,
/// a zero Gamma, or a t_final that is not a whole number of steps all throw
/// ScenarioError carrying the offending field path.
ParsedScenario parse_scenario(const std::string& text);

/// Read the file and parse it. A missing/unreadable file throws ScenarioError
/// with field "file".
ParsedScenario load_scenario(const std::string& path);

/// Canonical JSON for a scenario; parse_scenario(serialize_scenario(s)) is
/// idempotent.
std::string serialize_scenario(const Scenario& s);

const char* to_string(SystemId id);
const char* to_string(ControllerId id);
const char* to_string(StabilityClass c);

/// Header `t,Pi_x,...`: impulses, velocities, then the advected fields the
/// layout carries; pose columns (R row-major, x) appended when the trajectory
/// was reconstructed. Full precision (%.17g), one row per sample.
void write_trajectory_csv(const InertiaParams& p, const Trajectory& traj,
                          std::ostream& os);

/// Run summary: conservation table (initial/final/max drift per invariant),
/// sample count, warnings.
std::string run_report_json(const Scenario& s, const Trajectory& traj,
                            const std::vector<std::string>& warnings);

/// JSON for a stability assessment.
std::string stability_report_json(const Scenario& s, const StabilityReport& rep);

/// Write via a temp file in the same directory plus rename, so readers never
/// observe a partial file.
void write_text_atomic(const std::string& path, const std::string& content);

}  // namespace epshape
