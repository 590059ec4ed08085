#include "epshape/scenario.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace epshape {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ScenarioError(path, msg);
}

std::string join(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

const json& need(const json& j, const std::string& base, const std::string& key) {
  if (!j.is_object() || !j.contains(key)) fail(join(base, key), "required field is missing");
  return j.at(key);
}

void check_keys(const json& j, const std::string& base,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(base.empty() ? "(document)" : base, "must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* a : allowed) {
      if (it.key() == a) {
        known = true;
        break;
      }
    }
    if (!known) fail(join(base, it.key()), "unknown field");
  }
}

double get_num(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "must be finite");
  return v;
}

bool get_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "must be a boolean");
  return j.get<bool>();
}

std::string get_str(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "must be a string");
  return j.get<std::string>();
}

Vec3 get_vec3(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) fail(path, "must be an array of 3 numbers");
  Vec3 v;
  for (int i = 0; i < 3; ++i) v(i) = get_num(j.at(i), path);
  return v;
}

Vec4 get_vec4(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 4) fail(path, "must be an array of 4 numbers");
  Vec4 v;
  for (int i = 0; i < 3; ++i) v.spatial(i) = get_num(j.at(i), path);
  v.scalar = get_num(j.at(3), path);
  return v;
}

Mat3 get_mat3(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) fail(path, "must be a 3x3 array of numbers");
  Mat3 m;
  for (int r = 0; r < 3; ++r) m.row(r) = get_vec3(j.at(r), path).transpose();
  return m;
}

/// 3x3 block given either as nested rows or as a length-3 diagonal.
Mat3 get_block3(const json& j, const std::string& path) {
  if (j.is_array() && j.size() == 3 && j.at(0).is_number()) {
    return get_vec3(j, path).asDiagonal();
  }
  return get_mat3(j, path);
}

Eigen::Matrix2d get_mat2(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) fail(path, "must be a 2x2 array of numbers");
  Eigen::Matrix2d m;
  for (int r = 0; r < 2; ++r) {
    const json& row = j.at(r);
    if (!row.is_array() || row.size() != 2) fail(path, "must be a 2x2 array of numbers");
    for (int c = 0; c < 2; ++c) m(r, c) = get_num(row.at(c), path);
  }
  return m;
}

json to_json(const Vec3& v) { return json::array({v(0), v(1), v(2)}); }
json to_json(const Vec4& v) {
  return json::array({v.spatial(0), v.spatial(1), v.spatial(2), v.scalar});
}
json to_json(const Mat3& m) {
  json rows = json::array();
  for (int r = 0; r < 3; ++r) rows.push_back(to_json(Vec3(m.row(r))));
  return rows;
}

SystemId parse_system(const json& j) {
  const std::string s = get_str(j, "system");
  if (s == "underwater_vehicle") return SystemId::UnderwaterVehicle;
  if (s == "heavy_top") return SystemId::HeavyTop;
  fail("system", "must be \"underwater_vehicle\" or \"heavy_top\"");
}

ControllerId parse_controller_id(const json& j) {
  const std::string s = get_str(j, "controller.type");
  if (s == "none") return ControllerId::None;
  if (s == "weight_compensation") return ControllerId::WeightCompensation;
  if (s == "steady_motion") return ControllerId::SteadyMotion;
  if (s == "drift_correction") return ControllerId::DriftCorrection;
  fail("controller.type",
       "must be one of \"none\", \"weight_compensation\", \"steady_motion\", "
       "\"drift_correction\"");
}

InertiaParams parse_inertia(const json& j) {
  check_keys(j, "inertia",
             {"inertia", "coupling", "mass_matrix", "mass", "total_mass", "gravity",
              "arm", "com_dir", "chi"});
  const InertiaParams d = InertiaParams::defaults();
  const Mat3 inertia =
      j.contains("inertia") ? get_block3(j.at("inertia"), "inertia.inertia") : d.inertia();
  const Mat3 coupling =
      j.contains("coupling") ? get_block3(j.at("coupling"), "inertia.coupling") : d.coupling();
  const Mat3 mass_matrix = j.contains("mass_matrix")
                               ? get_block3(j.at("mass_matrix"), "inertia.mass_matrix")
                               : d.mass_matrix();
  const double mass = j.contains("mass") ? get_num(j.at("mass"), "inertia.mass") : d.mass();
  const double total_mass =
      j.contains("total_mass") ? get_num(j.at("total_mass"), "inertia.total_mass")
                               : d.total_mass();
  const double gravity =
      j.contains("gravity") ? get_num(j.at("gravity"), "inertia.gravity") : d.gravity();
  const double arm = j.contains("arm") ? get_num(j.at("arm"), "inertia.arm") : d.arm();
  if (j.contains("com_dir") && j.contains("chi")) {
    fail("inertia.chi", "alias of inertia.com_dir; give only one");
  }
  const std::string dir_key = j.contains("chi") ? "chi" : "com_dir";
  const Vec3 com_dir = j.contains(dir_key)
                           ? get_vec3(j.at(dir_key), join("inertia", dir_key))
                           : d.com_dir();
  if (std::abs(com_dir.norm() - 1.0) > 1e-9) {
    fail(join("inertia", dir_key), "must be a unit vector");
  }
  try {
    return InertiaParams(inertia, coupling, mass_matrix, mass, total_mass, gravity, arm,
                         com_dir);
  } catch (const SingularInertia& e) {
    fail("inertia", e.what());
  }
}

Controller parse_controller(const json& j, SystemId system) {
  check_keys(j, "controller", {"type", "gains", "desired"});
  Controller c;
  c.id = parse_controller_id(need(j, "controller", "type"));
  if (j.contains("gains")) {
    const json& g = j.at("gains");
    check_keys(g, "controller.gains", {"alpha", "beta", "k_matrix"});
    if (g.contains("alpha")) c.gains.alpha = get_num(g.at("alpha"), "controller.gains.alpha");
    if (g.contains("beta")) c.gains.beta = get_num(g.at("beta"), "controller.gains.beta");
    if (g.contains("k_matrix")) {
      c.gains.k_matrix = get_mat2(g.at("k_matrix"), "controller.gains.k_matrix");
    }
  }
  if (j.contains("desired")) {
    const json& d = j.at("desired");
    check_keys(d, "controller.desired", {"attitude", "velocity"});
    const Mat3 att = get_mat3(need(d, "controller.desired", "attitude"),
                              "controller.desired.attitude");
    const Vec3 vel = get_vec3(need(d, "controller.desired", "velocity"),
                              "controller.desired.velocity");
    try {
      c.desired = DesiredMotion(att, vel);
    } catch (const InvalidRotation& e) {
      fail("controller.desired.attitude", e.what());
    } catch (const ZeroDesiredVelocity& e) {
      fail("controller.desired.velocity", e.what());
    }
  }

  const bool needs_vehicle =
      c.id == ControllerId::SteadyMotion || c.id == ControllerId::DriftCorrection;
  if (c.id == ControllerId::WeightCompensation && system != SystemId::HeavyTop) {
    fail("controller.type", "weight_compensation applies to the heavy_top system");
  }
  if (needs_vehicle && system != SystemId::UnderwaterVehicle) {
    fail("controller.type", "this law applies to the underwater_vehicle system");
  }
  if (needs_vehicle && !c.desired) {
    fail("controller.desired", "required for this controller");
  }
  if (c.id == ControllerId::DriftCorrection) {
    try {
      validate_drift_gains(c.gains);
    } catch (const ScenarioError& e) {
      fail("controller." + e.field, e.detail);
    }
  }
  return c;
}

void add_initial_field(ReducedState& s, const std::string& key, const json& v,
                       const std::string& base, bool perturb) {
  const std::string path = join(base, key);
  auto set3 = [&](std::optional<Vec3>& slot) {
    const Vec3 val = get_vec3(v, path);
    if (perturb) {
      if (!slot) fail(path, "cannot perturb a field the state does not carry");
      *slot += val;
    } else {
      slot = val;
    }
  };
  if (key == "omega") {
    const Vec3 val = get_vec3(v, path);
    s.xi.omega = perturb ? Vec3(s.xi.omega + val) : val;
  } else if (key == "velocity") {
    const Vec3 val = get_vec3(v, path);
    s.xi.vel = perturb ? Vec3(s.xi.vel + val) : val;
  } else if (key == "gamma") {
    set3(s.a_r3);
  } else if (key == "theta") {
    set3(s.theta);
  } else if (key == "gamma_h") {
    const Vec4 val = get_vec4(v, path);
    if (perturb) {
      if (!s.a_r4) fail(path, "cannot perturb a field the state does not carry");
      *s.a_r4 = *s.a_r4 + val;
    } else {
      s.a_r4 = val;
    }
  } else if (key == "delta1" || key == "delta2") {
    const Vec4 val = get_vec4(v, path);
    const int idx = key == "delta1" ? 0 : 1;
    if (perturb) {
      if (!s.deltas) fail(path, "cannot perturb a field the state does not carry");
      (*s.deltas)[idx] = (*s.deltas)[idx] + val;
    } else {
      if (!s.deltas) s.deltas = {Vec4{}, Vec4{}};
      (*s.deltas)[idx] = val;
    }
  } else {
    fail(path, "unknown field");
  }
}

ReducedState parse_initial(const json& j, SystemId system, const InertiaParams& p,
                           const Controller& c) {
  static constexpr const char* kFields[] = {"omega",   "velocity", "gamma",  "gamma_h",
                                            "theta",   "delta1",   "delta2"};
  check_keys(j, "initial",
             {"at_equilibrium", "perturb", "omega", "velocity", "gamma", "gamma_h",
              "theta", "delta1", "delta2"});

  ReducedState s;
  const bool at_eq =
      j.contains("at_equilibrium") && get_bool(j.at("at_equilibrium"), "initial.at_equilibrium");
  if (at_eq) {
    if (!c.desired) {
      fail("initial.at_equilibrium", "needs controller.desired to build the equilibrium");
    }
    for (const char* f : kFields) {
      if (j.contains(f)) fail(join("initial", f), "must go under initial.perturb when at_equilibrium is set");
    }
    s = equilibrium_state(system, p, c);
    if (j.contains("perturb")) {
      const json& pj = j.at("perturb");
      check_keys(pj, "initial.perturb",
                 {"omega", "velocity", "gamma", "gamma_h", "theta", "delta1", "delta2"});
      for (const char* f : kFields) {
        if (pj.contains(f)) add_initial_field(s, f, pj.at(f), "initial.perturb", true);
      }
    }
  } else {
    if (j.contains("perturb")) fail("initial.perturb", "only allowed with at_equilibrium");
    if (!j.contains("omega")) fail("initial.omega", "required field is missing");
    if (!j.contains("velocity")) fail("initial.velocity", "required field is missing");
    for (const char* f : kFields) {
      if (j.contains(f)) add_initial_field(s, f, j.at(f), "initial", false);
    }
  }

  if (system == SystemId::UnderwaterVehicle) {
    if (!s.a_r3) fail("initial.gamma", "required for the underwater_vehicle system");
    if (s.a_r4) fail("initial.gamma_h", "not used by the underwater_vehicle system");
    if (s.a_r3->norm() == 0.0) fail("initial.gamma", "must be nonzero");
  } else {
    if (!s.a_r4) fail("initial.gamma_h", "required for the heavy_top system");
    if (s.a_r3) fail("initial.gamma", "not used by the heavy_top system");
    if (s.a_r4->spatial.norm() == 0.0) fail("initial.gamma_h", "direction part must be nonzero");
  }
  if (c.id == ControllerId::SteadyMotion && !s.theta) {
    fail("initial.theta", "required by the steady_motion controller");
  }
  if (c.id == ControllerId::DriftCorrection && !s.deltas) {
    fail("initial.delta1", "drift markers required by the drift_correction controller");
  }
  return s;
}

IntegratorConfig parse_integrator(const json& j) {
  check_keys(j, "integrator", {"step", "t_final"});
  IntegratorConfig cfg;
  cfg.step = get_num(need(j, "integrator", "step"), "integrator.step");
  cfg.t_final = get_num(need(j, "integrator", "t_final"), "integrator.t_final");
  if (cfg.step <= 0.0) fail("integrator.step", "must be positive");
  if (cfg.t_final < 0.0) fail("integrator.t_final", "must be non-negative");
  const double n = std::round(cfg.t_final / cfg.step);
  if (std::abs(n * cfg.step - cfg.t_final) > 1e-9 * std::max(1.0, cfg.t_final)) {
    fail("integrator.t_final", "must be a whole number of steps");
  }
  return cfg;
}

}  // namespace

ParsedScenario parse_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail("", std::string("invalid JSON: ") + e.what());
  }
  check_keys(j, "",
             {"system", "inertia", "controller", "initial", "integrator", "outputs",
              "reconstruct", "initial_pose"});

  ParsedScenario out;
  Scenario& s = out.scenario;
  s.system = parse_system(need(j, "", "system"));
  if (j.contains("inertia")) s.inertia = parse_inertia(j.at("inertia"));
  if (j.contains("controller")) {
    s.controller = parse_controller(j.at("controller"), s.system);
  }
  s.initial = parse_initial(need(j, "", "initial"), s.system, s.inertia, s.controller);
  s.integrator = parse_integrator(need(j, "", "integrator"));

  if (j.contains("outputs")) {
    const json& o = j.at("outputs");
    check_keys(o, "outputs", {"trajectory_csv", "report_json"});
    if (o.contains("trajectory_csv")) {
      s.outputs.trajectory_csv = get_str(o.at("trajectory_csv"), "outputs.trajectory_csv");
    }
    if (o.contains("report_json")) {
      s.outputs.report_json = get_str(o.at("report_json"), "outputs.report_json");
    }
    if (s.outputs.trajectory_csv.empty()) fail("outputs.trajectory_csv", "must be non-empty");
    if (s.outputs.report_json.empty()) fail("outputs.report_json", "must be non-empty");
  }
  if (j.contains("reconstruct")) s.reconstruct = get_bool(j.at("reconstruct"), "reconstruct");
  if (j.contains("initial_pose")) {
    const json& ip = j.at("initial_pose");
    check_keys(ip, "initial_pose", {"rotation", "translation"});
    s.initial_pose.rotation =
        get_mat3(need(ip, "initial_pose", "rotation"), "initial_pose.rotation");
    s.initial_pose.translation =
        get_vec3(need(ip, "initial_pose", "translation"), "initial_pose.translation");
    try {
      validate_rotation(s.initial_pose.rotation);
    } catch (const InvalidRotation& e) {
      fail("initial_pose.rotation", e.what());
    }
  }

  if (s.controller.id == ControllerId::SteadyMotion ||
      s.controller.id == ControllerId::DriftCorrection) {
    for (const std::string& w : gain_warnings(s.inertia, s.controller.gains)) {
      out.warnings.push_back("controller." + w);
    }
  }
  return out;
}

ParsedScenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.is_open()) fail("file", "cannot open scenario file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string serialize_scenario(const Scenario& s) {
  json j;
  j["system"] = to_string(s.system);
  j["inertia"] = {{"inertia", to_json(s.inertia.inertia())},
                  {"coupling", to_json(s.inertia.coupling())},
                  {"mass_matrix", to_json(s.inertia.mass_matrix())},
                  {"mass", s.inertia.mass()},
                  {"total_mass", s.inertia.total_mass()},
                  {"gravity", s.inertia.gravity()},
                  {"arm", s.inertia.arm()},
                  {"com_dir", to_json(s.inertia.com_dir())}};
  json ctl;
  ctl["type"] = to_string(s.controller.id);
  ctl["gains"] = {{"alpha", s.controller.gains.alpha},
                  {"beta", s.controller.gains.beta},
                  {"k_matrix",
                   json::array({json::array({s.controller.gains.k_matrix(0, 0),
                                             s.controller.gains.k_matrix(0, 1)}),
                                json::array({s.controller.gains.k_matrix(1, 0),
                                             s.controller.gains.k_matrix(1, 1)})})}};
  if (s.controller.desired) {
    ctl["desired"] = {{"attitude", to_json(s.controller.desired->r_d)},
                      {"velocity", to_json(s.controller.desired->v_d)}};
  }
  j["controller"] = ctl;

  json init;
  init["omega"] = to_json(s.initial.xi.omega);
  init["velocity"] = to_json(s.initial.xi.vel);
  if (s.initial.a_r3) init["gamma"] = to_json(*s.initial.a_r3);
  if (s.initial.a_r4) init["gamma_h"] = to_json(*s.initial.a_r4);
  if (s.initial.theta) init["theta"] = to_json(*s.initial.theta);
  if (s.initial.deltas) {
    init["delta1"] = to_json((*s.initial.deltas)[0]);
    init["delta2"] = to_json((*s.initial.deltas)[1]);
  }
  j["initial"] = init;

  j["integrator"] = {{"step", s.integrator.step}, {"t_final", s.integrator.t_final}};
  j["outputs"] = {{"trajectory_csv", s.outputs.trajectory_csv},
                  {"report_json", s.outputs.report_json}};
  j["reconstruct"] = s.reconstruct;
  j["initial_pose"] = {{"rotation", to_json(s.initial_pose.rotation)},
                       {"translation", to_json(s.initial_pose.translation)}};
  return j.dump(2) + "\n";
}

const char* to_string(SystemId id) {
  switch (id) {
    case SystemId::UnderwaterVehicle:
      return "underwater_vehicle";
    case SystemId::HeavyTop:
      return "heavy_top";
  }
  return "?";
}

const char* to_string(ControllerId id) {
  switch (id) {
    case ControllerId::None:
      return "none";
    case ControllerId::WeightCompensation:
      return "weight_compensation";
    case ControllerId::SteadyMotion:
      return "steady_motion";
    case ControllerId::DriftCorrection:
      return "drift_correction";
  }
  return "?";
}

const char* to_string(StabilityClass c) {
  switch (c) {
    case StabilityClass::SpectrallyStable:
      return "spectrally_stable";
    case StabilityClass::Marginal:
      return "marginal";
    case StabilityClass::Unstable:
      return "unstable";
  }
  return "?";
}

namespace {

void append_num(std::string& row, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  row += buf;
}

}  // namespace

void write_trajectory_csv(const InertiaParams& p, const Trajectory& traj,
                          std::ostream& os) {
  std::string header = "t,Pi_x,Pi_y,Pi_z,P_x,P_y,P_z,Omega_x,Omega_y,Omega_z,v_x,v_y,v_z";
  if (traj.layout.a_r3) header += ",Gamma_x,Gamma_y,Gamma_z";
  if (traj.layout.a_r4) header += ",Gamma_x,Gamma_y,Gamma_z,h";
  if (traj.layout.theta) header += ",Theta_x,Theta_y,Theta_z";
  if (traj.layout.deltas) {
    header += ",Delta1_x,Delta1_y,Delta1_z,delta_1,Delta2_x,Delta2_y,Delta2_z,delta_2";
  }
  const bool poses = !traj.poses.empty();
  if (poses) {
    header += ",R_xx,R_xy,R_xz,R_yx,R_yy,R_yz,R_zx,R_zy,R_zz,x_x,x_y,x_z";
  }
  os << header << "\n";

  std::string row;
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    row.clear();
    const ReducedState& s = traj.states[i];
    const MomentumCovector m = legendre(p, s.xi);
    std::vector<double> vals;
    vals.reserve(32);
    vals.push_back(traj.times[i]);
    for (int k = 0; k < 3; ++k) vals.push_back(m.pi(k));
    for (int k = 0; k < 3; ++k) vals.push_back(m.p(k));
    for (int k = 0; k < 3; ++k) vals.push_back(s.xi.omega(k));
    for (int k = 0; k < 3; ++k) vals.push_back(s.xi.vel(k));
    if (s.a_r3) {
      for (int k = 0; k < 3; ++k) vals.push_back((*s.a_r3)(k));
    }
    if (s.a_r4) {
      for (int k = 0; k < 3; ++k) vals.push_back(s.a_r4->spatial(k));
      vals.push_back(s.a_r4->scalar);
    }
    if (s.theta) {
      for (int k = 0; k < 3; ++k) vals.push_back((*s.theta)(k));
    }
    if (s.deltas) {
      for (const Vec4& d : *s.deltas) {
        for (int k = 0; k < 3; ++k) vals.push_back(d.spatial(k));
        vals.push_back(d.scalar);
      }
    }
    if (poses) {
      const SE3Element& g = traj.poses[i];
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) vals.push_back(g.rotation(r, c));
      }
      for (int k = 0; k < 3; ++k) vals.push_back(g.translation(k));
    }
    for (std::size_t k = 0; k < vals.size(); ++k) {
      if (k) row += ',';
      append_num(row, vals[k]);
    }
    os << row << "\n";
  }
}

std::string run_report_json(const Scenario& s, const Trajectory& traj,
                            const std::vector<std::string>& warnings) {
  json rep;
  const std::string canon = serialize_scenario(s);
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char digest[17];
  std::snprintf(digest, sizeof(digest), "%016llx", static_cast<unsigned long long>(h));
  rep["scenario_digest"] = digest;
  rep["exit_status"] = 0;
  rep["system"] = to_string(s.system);
  rep["controller"] = to_string(s.controller.id);
  rep["step"] = s.integrator.step;
  rep["t_final"] = s.integrator.t_final;
  rep["samples"] = traj.states.size();
  rep["reconstructed"] = !traj.poses.empty();
  rep["warnings"] = warnings;

  json cons = json::array();
  for (std::size_t q = 0; q < traj.diagnostic_names.size(); ++q) {
    const double first = traj.diagnostics.front()[q];
    double max_drift = 0.0;
    for (const std::vector<double>& row : traj.diagnostics) {
      max_drift = std::max(max_drift, std::abs(row[q] - first));
    }
    cons.push_back({{"name", traj.diagnostic_names[q]},
                    {"initial", first},
                    {"final", traj.diagnostics.back()[q]},
                    {"max_drift", max_drift}});
  }
  rep["conservation"] = cons;
  return rep.dump(2) + "\n";
}

std::string stability_report_json(const Scenario& s, const StabilityReport& rep) {
  json j;
  j["system"] = to_string(s.system);
  j["controller"] = to_string(s.controller.id);
  j["classification"] = to_string(rep.classification);
  j["max_real_part"] = rep.max_real_part;
  j["second_variation_min"] = rep.second_variation_min;
  j["energy_definite"] = rep.energy_definite;
  json ev = json::array();
  for (const std::complex<double>& e : rep.eigenvalues) {
    ev.push_back({{"re", e.real()}, {"im", e.imag()}});
  }
  j["eigenvalues"] = ev;
  j["notes"] = rep.notes;
  return j.dump(2) + "\n";
}

void write_text_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out.is_open()) throw Error("cannot open output file: " + tmp.string());
    out << content;
    out.flush();
    if (!out.good()) throw Error("failed writing output file: " + tmp.string());
  }
  fs::rename(tmp, target);
}

}  // namespace epshape
