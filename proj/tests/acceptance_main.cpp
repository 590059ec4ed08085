// Acceptance gate for the toolkit: one pass/fail line per criterion, with the
// tolerance and runtime budget pinned next to each check. Exits nonzero if any
// criterion fails.
#include <sys/wait.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include <json.hpp>

#include "epshape/control.hpp"
#include "epshape/poisson.hpp"
#include "epshape/sim.hpp"
#include "epshape/systems.hpp"

#include "test_util.hpp"

namespace {

using namespace epshape;
using epshape::test::Draw;
using epshape::test::sup;
using epshape::test::top_state;
using epshape::test::vehicle_state;

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double secs() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

int g_index = 0;
int g_failures = 0;

void report(const std::string& label, bool pass, const std::string& measured, double secs) {
  ++g_index;
  if (!pass) ++g_failures;
  std::printf("[%s] %d/9 %s: %s (%.2fs)\n", pass ? "PASS" : "FAIL", g_index, label.c_str(),
              measured.c_str(), secs);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

DesiredMotion tilted_desired() {
  return DesiredMotion(exp_so3(Vec3(0.3, -0.2, 0.1)), Vec3(0.8, 0.2, 0.1));
}

Gains default_gains() {
  Gains g;
  g.alpha = 25.0;
  g.beta = 10.0;
  g.k_matrix << 2.0, 0.5, 0.5, 1.0;
  return g;
}

Controller steady_controller() {
  Controller c;
  c.id = ControllerId::SteadyMotion;
  c.gains = default_gains();
  c.desired = tilted_desired();
  return c;
}

Controller drift_controller() {
  Controller c = steady_controller();
  c.id = ControllerId::DriftCorrection;
  return c;
}

ReducedState kicked_equilibrium(SystemId id, const InertiaParams& p, const Controller& c) {
  ReducedState s = equilibrium_state(id, p, c);
  s.xi.omega += Vec3(0.05, -0.03, 0.02);
  s.xi.vel += Vec3(0.02, 0.04, -0.01);
  if (s.a_r3) *s.a_r3 += Vec3(0.01, -0.02, 0.015);
  if (s.theta) *s.theta += Vec3(-0.01, 0.02, 0.01);
  if (s.deltas) {
    (*s.deltas)[0] = (*s.deltas)[0] + Vec4(Vec3(0.01, -0.005, 0.02), 0.03);
    (*s.deltas)[1] = (*s.deltas)[1] + Vec4(Vec3(-0.015, 0.01, 0.005), -0.02);
  }
  return s;
}

PhasePoint to_drift_phase(const InertiaParams& p, const ReducedState& s) {
  const MomentumCovector m = legendre(p, s.xi);
  PhasePoint z;
  z.pi = m.pi;
  z.p = m.p;
  z.gamma = *s.a_r3;
  z.d1 = (*s.deltas)[0];
  z.d2 = (*s.deltas)[1];
  return z;
}

struct CmdResult {
  int status = -1;
  std::string output;
};

CmdResult run_cmd(const std::string& cmd) {
  CmdResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  std::size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof(buf), pipe)) > 0) r.output.append(buf, n);
  const int rc = pclose(pipe);
  if (WIFEXITED(rc)) r.status = WEXITSTATUS(rc);
  return r;
}

// 1. Both shaped-potential matching identities hold on random states.
void criterion_matching_steady_drift(const InertiaParams& p) {
  Timer t;
  const Gains g = default_gains();
  const DesiredMotion d = tilted_desired();
  Draw draw(201);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const ReducedState s = vehicle_state(draw, true, true);
    worst = std::max(worst, matching_residual_steady(p, g, d, s));
    worst = std::max(worst, matching_residual_drift(p, g, d, s));
  }
  const double secs = t.secs();
  report("steady_drift_matching", worst < 1e-12 && secs < 1.0,
         "max residual " + fmt(worst) + ", tol 1e-12", secs);
}

// 2. Weight compensation reduces the heavy top to the vehicle equations.
void criterion_matching_weight(const InertiaParams& p) {
  Timer t;
  Draw draw(202);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    worst = std::max(worst, matching_residual_weight(p, top_state(draw)));
  }
  const double secs = t.secs();
  report("weight_compensation_matching", worst < 1e-12 && secs < 1.0,
         "max residual " + fmt(worst) + ", tol 1e-12", secs);
}

// 3. Every shipped right-hand side agrees with its bracket form.
void criterion_bracket_agreement(const InertiaParams& p) {
  Timer t;
  const Gains g = default_gains();
  const DesiredMotion d = tilted_desired();
  const Vec3 grav = p.mgl() * p.com_dir();
  double worst = 0.0;

  Draw draw(203);
  for (int i = 0; i < 200; ++i) {
    const ReducedState s = vehicle_state(draw);
    const MomentumCovector m = legendre(p, s.xi);
    PhasePoint z;
    z.pi = m.pi;
    z.p = m.p;
    z.gamma = *s.a_r3;
    GradientEval dh;
    dh.d_pi = s.xi.omega;
    dh.d_p = s.xi.vel;
    dh.d_gamma = grav;
    const PhasePoint zdot = hamiltonian_rhs(BracketId::Se3R3, z, dh);
    const StateRates r = ep_rhs_underwater_vehicle(p, s);
    worst = std::max({worst, sup(Vec3(zdot.pi - r.mom.pi)), sup(Vec3(zdot.p - r.mom.p)),
                      sup(Vec3(*zdot.gamma - *r.a_r3))});
  }

  Draw draw_top(204);
  const Controller comp{ControllerId::WeightCompensation, Gains{}, std::nullopt,
                        ControlMutation::None};
  for (int i = 0; i < 200; ++i) {
    const ReducedState s = top_state(draw_top);
    const MomentumCovector m = legendre(p, s.xi);
    GenericPhase z;
    z.pi = m.pi;
    z.p = m.p;
    z.r4 = {*s.a_r4};
    GenericGradient dh;
    dh.d_pi = s.xi.omega;
    dh.d_p = s.xi.vel;

    dh.r4 = {Vec4(grav, p.total_mass() * p.gravity())};
    const GenericPhase free_dot = bracket_rhs_generic(z, dh);
    const StateRates free = ep_rhs_heavy_top(p, s);
    worst = std::max({worst, sup(Vec3(free_dot.pi - free.mom.pi)),
                      sup(Vec3(free_dot.p - free.mom.p)), sup(free_dot.r4[0] - *free.a_r4)});

    dh.r4 = {Vec4(grav, 0.0)};
    const GenericPhase comp_dot = bracket_rhs_generic(z, dh);
    const StateRates loop = closed_loop_rhs(SystemId::HeavyTop, p, comp, s);
    worst = std::max({worst, sup(Vec3(comp_dot.pi - loop.mom.pi)),
                      sup(Vec3(comp_dot.p - loop.mom.p)), sup(comp_dot.r4[0] - *loop.a_r4)});
  }

  Draw draw_steady(205);
  const Controller sc = steady_controller();
  const ShapedGradSteady sg = shaped_potential_steady_grad(p, g, d);
  for (int i = 0; i < 200; ++i) {
    const ReducedState s = vehicle_state(draw_steady, true);
    const MomentumCovector m = legendre(p, s.xi);
    GenericPhase z;
    z.pi = m.pi;
    z.p = m.p;
    z.r3 = {*s.a_r3, *s.theta};
    GenericGradient dh;
    dh.d_pi = s.xi.omega;
    dh.d_p = s.xi.vel;
    dh.r3 = {Vec3(grav + sg.d_gamma), sg.d_theta};
    const GenericPhase zdot = bracket_rhs_generic(z, dh);
    const StateRates r = closed_loop_rhs(SystemId::UnderwaterVehicle, p, sc, s);
    worst = std::max({worst, sup(Vec3(zdot.pi - r.mom.pi)), sup(Vec3(zdot.p - r.mom.p)),
                      sup(Vec3(zdot.r3[0] - *r.a_r3)), sup(Vec3(zdot.r3[1] - *r.theta))});
  }

  Draw draw_drift(206);
  const Controller dc = drift_controller();
  for (int i = 0; i < 200; ++i) {
    const ReducedState s = vehicle_state(draw_drift, false, true);
    const PhasePoint z = to_drift_phase(p, s);
    const ShapedGradDrift gd = shaped_potential_drift_grad(p, g, d, *s.deltas);
    GradientEval dh;
    dh.d_pi = s.xi.omega;
    dh.d_p = s.xi.vel;
    dh.d_gamma = Vec3(grav + gd.d_gamma);
    dh.d_d1 = gd.d_d1;
    dh.d_d2 = gd.d_d2;
    const PhasePoint zdot = hamiltonian_rhs(BracketId::Drift, z, dh);
    const StateRates r = closed_loop_rhs(SystemId::UnderwaterVehicle, p, dc, s);
    worst = std::max({worst, sup(Vec3(zdot.pi - r.mom.pi)), sup(Vec3(zdot.p - r.mom.p)),
                      sup(Vec3(*zdot.gamma - *r.a_r3)), sup(*zdot.d1 - (*r.deltas)[0]),
                      sup(*zdot.d2 - (*r.deltas)[1])});
  }

  const double secs = t.secs();
  report("bracket_equation_agreement", worst < 1e-10 && secs < 2.0,
         "max gap " + fmt(worst) + ", tol 1e-10", secs);
}

// 4. The drift bracket's seven Casimirs annihilate the bracket and stay
//    constant along a controlled run.
void criterion_casimirs(const InertiaParams& p) {
  Timer t;
  const std::vector<CasimirFn> cs = drift_casimirs();
  bool ok = cs.size() == 7;
  double worst_bracket = 0.0;

  Draw draw(207);
  for (int pt = 0; pt < 5; ++pt) {
    PhasePoint z;
    z.pi = draw.vec3();
    z.p = draw.vec3();
    z.gamma = draw.vec3();
    z.d1 = draw.vec4();
    z.d2 = draw.vec4();
    for (const CasimirFn& c : cs) {
      const GradientEval dc = c.gradient(z);
      for (int k = 0; k < 50; ++k) {
        GradientEval g;
        g.d_pi = draw.vec3();
        g.d_p = draw.vec3();
        g.d_gamma = draw.vec3();
        g.d_d1 = draw.vec4();
        g.d_d2 = draw.vec4();
        worst_bracket = std::max(worst_bracket, std::abs(bracket(BracketId::Drift, z, dc, g)));
      }
    }
  }
  ok = ok && worst_bracket < 1e-12;

  const Controller dc = drift_controller();
  const ReducedState s0 = kicked_equilibrium(SystemId::UnderwaterVehicle, p, dc);
  const Trajectory traj =
      simulate(SystemId::UnderwaterVehicle, p, dc, s0, IntegratorConfig{1e-3, 10.0});
  std::vector<double> first;
  double worst_drift = 0.0;
  for (const ReducedState& s : traj.states) {
    const PhasePoint z = to_drift_phase(p, s);
    for (std::size_t q = 0; q < cs.size(); ++q) {
      const double v = cs[q].value(z);
      if (first.size() <= q) first.push_back(v);
      worst_drift =
          std::max(worst_drift, std::abs(v - first[q]) / std::max(1.0, std::abs(first[q])));
    }
  }
  ok = ok && worst_drift < 1e-8;

  const double secs = t.secs();
  ok = ok && secs < 10.0;
  report("drift_casimirs",
         ok, "max bracket " + fmt(worst_bracket) + " (tol 1e-12), max run drift " +
                 fmt(worst_drift) + " (tol 1e-8)",
         secs);
}

// 5. The documented relative equilibria are fixed points of the closed loops.
void criterion_equilibria(const InertiaParams& p) {
  Timer t;
  double worst = 0.0;
  for (const Controller& c : {steady_controller(), drift_controller()}) {
    const ReducedState eq = equilibrium_state(SystemId::UnderwaterVehicle, p, c);
    worst = std::max(worst, sup(closed_loop_rhs(SystemId::UnderwaterVehicle, p, c, eq)));
  }
  const double secs = t.secs();
  report("closed_loop_equilibria", worst < 1e-12, "max rate " + fmt(worst) + ", tol 1e-12",
         secs);
}

// 6. Stabilizing gains give a marginal spectrum in an energy well; violating
//    the gain condition is flagged.
void criterion_stability(const InertiaParams& p) {
  Timer t;
  const StabilityReport good = stability_report(SystemId::UnderwaterVehicle, p,
                                                steady_controller());
  Controller bad_c = steady_controller();
  bad_c.gains.beta = -10.0;
  const StabilityReport bad = stability_report(SystemId::UnderwaterVehicle, p, bad_c);
  const bool ok = good.classification == StabilityClass::SpectrallyStable &&
                  good.max_real_part < 1e-6 &&
                  bad.classification != StabilityClass::SpectrallyStable;
  const double secs = t.secs();
  report("spectral_stability", ok && secs < 5.0,
         "stable max Re " + fmt(good.max_real_part) + " (tol 1e-6), violated gains classify " +
             (bad.classification == StabilityClass::Unstable ? "unstable" : "non-stable"),
         secs);
}

// 7. Advected fields match their group-transported counterparts along
//    reconstructed runs.
void criterion_transport(const InertiaParams& p) {
  Timer t;
  const IntegratorConfig cfg{1e-3, 10.0};
  const SE3Element pose0{exp_so3(Vec3(0.2, 0.1, -0.3)), Vec3(1.0, -2.0, 0.5)};
  double worst = 0.0;

  const auto run = [&](const Controller& c, SystemId id, const ReducedState& s0) {
    Trajectory traj = simulate(id, p, c, s0, cfg);
    return reconstruct(traj, pose0);
  };

  {
    ReducedState s0;
    s0.xi = AlgebraVector(Vec3(0.3, -0.2, 0.5), Vec3(0.4, 0.1, -0.3));
    s0.a_r3 = Vec3(0.36, 0.48, 0.8);
    const Trajectory traj = run(Controller{}, SystemId::UnderwaterVehicle, s0);
    const Vec3 w = pose0.rotation * *s0.a_r3;
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
      worst = std::max(
          worst, sup(Vec3(*traj.states[i].a_r3 - traj.poses[i].rotation.transpose() * w)));
    }
  }

  {
    const Controller c = steady_controller();
    const ReducedState s0 = kicked_equilibrium(SystemId::UnderwaterVehicle, p, c);
    const Trajectory traj = run(c, SystemId::UnderwaterVehicle, s0);
    const Vec3 w = pose0.rotation * *s0.theta;
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
      worst = std::max(
          worst, sup(Vec3(*traj.states[i].theta - traj.poses[i].rotation.transpose() * w)));
    }
  }

  {
    const Controller c = drift_controller();
    ReducedState s0 = kicked_equilibrium(SystemId::UnderwaterVehicle, p, c);
    s0.theta = Vec3((*s0.deltas)[0].spatial.cross((*s0.deltas)[1].spatial));
    const Trajectory traj = run(c, SystemId::UnderwaterVehicle, s0);
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
      const ReducedState& s = traj.states[i];
      const SE3Element& g = traj.poses[i];
      for (int leg = 0; leg < 2; ++leg) {
        const Vec4& d0 = (*s0.deltas)[leg];
        const Vec4& d = (*s.deltas)[leg];
        const Vec3 w = pose0.rotation * d0.spatial;
        worst = std::max(worst, sup(Vec3(d.spatial - g.rotation.transpose() * w)));
        worst = std::max(
            worst,
            std::abs(d.scalar - (d0.scalar + w.dot(g.translation - pose0.translation))));
      }
      worst = std::max(
          worst, sup(Vec3(*s.theta - (*s.deltas)[0].spatial.cross((*s.deltas)[1].spatial))));
    }
  }

  {
    const Controller comp{ControllerId::WeightCompensation, Gains{}, std::nullopt,
                          ControlMutation::None};
    ReducedState s0;
    s0.xi = AlgebraVector(Vec3(0.05, -0.03, 0.02), Vec3(0.02, 0.04, -0.01));
    s0.a_r4 = Vec4(Vec3(0.36, 0.48, 0.8), 0.2);
    const Trajectory traj = run(comp, SystemId::HeavyTop, s0);
    const Vec3 w = pose0.rotation * s0.a_r4->spatial;
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
      const Vec4& a = *traj.states[i].a_r4;
      const SE3Element& g = traj.poses[i];
      worst = std::max(worst, sup(Vec3(a.spatial - g.rotation.transpose() * w)));
      worst = std::max(
          worst,
          std::abs(a.scalar -
                   (s0.a_r4->scalar + w.dot(g.translation - pose0.translation))));
    }
  }

  const double secs = t.secs();
  report("transport_consistency", worst < 1e-6 && secs < 10.0,
         "max gap " + fmt(worst) + ", tol 1e-6", secs);
}

// 8. RK4 shows fourth-order step response and conserves the vehicle invariants.
void criterion_integrator(const InertiaParams& p) {
  Timer t;
  ReducedState s0;
  s0.xi = AlgebraVector(Vec3(0.3, -0.2, 0.5), Vec3(0.4, 0.1, -0.3));
  s0.a_r3 = Vec3(0.36, 0.48, 0.8);

  const Trajectory traj =
      simulate(SystemId::UnderwaterVehicle, p, Controller{}, s0, IntegratorConfig{1e-3, 10.0});
  double worst_drift = 0.0;
  const std::vector<double>& first = traj.diagnostics.front();
  for (const std::vector<double>& row : traj.diagnostics) {
    for (std::size_t q = 0; q < row.size(); ++q) {
      worst_drift =
          std::max(worst_drift, std::abs(row[q] - first[q]) / std::max(1.0, std::abs(first[q])));
    }
  }

  const auto endpoint = [&](double h) {
    const Trajectory tr =
        simulate(SystemId::UnderwaterVehicle, p, Controller{}, s0, IntegratorConfig{h, 2.0});
    return pack_state(p, tr.states.back());
  };
  const Eigen::VectorXd ref = endpoint(0.00125);
  const double coarse = (endpoint(0.02) - ref).cwiseAbs().maxCoeff();
  const double fine = (endpoint(0.01) - ref).cwiseAbs().maxCoeff();
  const double ratio = coarse / fine;

  const bool ok = worst_drift < 1e-8 && ratio > 12.0 && ratio < 20.0;
  const double secs = t.secs();
  report("integrator_order_conservation", ok,
         "halving ratio " + fmt(ratio) + " (want 12..20), max drift " + fmt(worst_drift) +
             " (tol 1e-8)",
         secs);
}

// 9. Each single sign flip produces a visible residual and a named property
//    failure through the command-line suite.
void criterion_mutation_detection(const InertiaParams& p, const std::string& bin) {
  Timer t;
  const Gains g = default_gains();
  const DesiredMotion d = tilted_desired();

  struct Case {
    ControlMutation mutation;
    const char* spelling;
    const char* property;
  };
  const std::vector<Case> cases{
      {ControlMutation::WeightTerm, "weight_term", "matching_weight_compensation"},
      {ControlMutation::SteadyGravityTerm, "steady_gravity_term", "matching_steady_control"},
      {ControlMutation::SteadyVelocityTerm, "steady_velocity_term", "matching_steady_control"},
      {ControlMutation::DriftGravityTerm, "drift_gravity_term", "matching_drift_control"},
      {ControlMutation::DriftVelocityTerm, "drift_velocity_term", "matching_drift_control"},
      {ControlMutation::DriftForceTerm, "drift_force_term", "matching_drift_control"},
  };

  bool ok = !bin.empty();
  std::string note = bin.empty() ? "missing --epshape-bin" : "";
  double min_residual = 1e300;

  Draw draw(209);
  for (const Case& c : cases) {
    double least = 1e300;
    for (int i = 0; i < 20; ++i) {
      double r = 0.0;
      switch (c.mutation) {
        case ControlMutation::WeightTerm:
          r = matching_residual_weight(p, top_state(draw), c.mutation);
          break;
        case ControlMutation::SteadyGravityTerm:
        case ControlMutation::SteadyVelocityTerm:
          r = matching_residual_steady(p, g, d, vehicle_state(draw, true), c.mutation);
          break;
        default:
          r = matching_residual_drift(p, g, d, vehicle_state(draw, false, true), c.mutation);
          break;
      }
      least = std::min(least, r);
    }
    min_residual = std::min(min_residual, least);
    if (least <= 1e-3) {
      ok = false;
      note += std::string(note.empty() ? "" : "; ") + c.spelling + " residual " + fmt(least);
    }

    if (!bin.empty()) {
      const CmdResult res = run_cmd("\"" + bin + "\" verify --mutate " + c.spelling +
                                    " --filter matching 2>/dev/null");
      bool named = false;
      try {
        const nlohmann::json rep = nlohmann::json::parse(res.output);
        for (const nlohmann::json& prop : rep.at("properties")) {
          if (prop.at("name").get<std::string>() == c.property &&
              !prop.at("pass").get<bool>()) {
            named = true;
          }
        }
      } catch (const std::exception&) {
        named = false;
      }
      if (res.status == 0 || !named) {
        ok = false;
        note += std::string(note.empty() ? "" : "; ") + c.spelling + " not flagged as " +
                c.property;
      }
    }
  }

  const double secs = t.secs();
  report("mutation_detection", ok,
         note.empty() ? "min residual " + fmt(min_residual) + " (want > 1e-3), all named"
                      : note,
         secs);
}

}  // namespace

int main(int argc, char** argv) {
  std::string bin;
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::strcmp(argv[i], "--epshape-bin") == 0) bin = argv[i + 1];
  }

  const InertiaParams p = InertiaParams::defaults();
  criterion_matching_steady_drift(p);
  criterion_matching_weight(p);
  criterion_bracket_agreement(p);
  criterion_casimirs(p);
  criterion_equilibria(p);
  criterion_stability(p);
  criterion_transport(p);
  criterion_integrator(p);
  criterion_mutation_detection(p, bin);

  std::printf("acceptance: %d/9 criteria passed\n", 9 - g_failures);
  return g_failures == 0 ? 0 : 1;
}
