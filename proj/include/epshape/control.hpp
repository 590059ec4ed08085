#pragma once

#include <vector>

#include "epshape/systems.hpp"

namespace epshape {

/// Feedback gains. alpha scales the velocity-shaping term, beta the
/// attitude-restoring term; k_matrix is the 2x2 drift-feedback matrix and must
/// be symmetric positive definite when the drift controller is active.
struct Gains {
  double alpha = 0.0;
  double beta = 0.0;
  Eigen::Matrix2d k_matrix = Eigen::Matrix2d::Identity();
};

/// Throws ScenarioError("gains.k_matrix", ...) unless k_matrix is symmetric
/// with positive leading principal minors.
void validate_drift_gains(const Gains& g);

/// Target steady motion: attitude r_d and nonzero body velocity v_d. The
/// constructor validates r_d (InvalidRotation) and v_d (ZeroDesiredVelocity).
struct DesiredMotion {
  Mat3 r_d;
  Vec3 v_d;
  DesiredMotion(const Mat3& r, const Vec3& v);
};

/// Right-handed orthonormal frame adapted to the desired spatial velocity:
/// w3 = r_d v_d / |v_d|, w1 from the coordinate axis least aligned with w3
/// (Gram-Schmidt, lowest index wins ties), w2 = w3 x w1. q stacks w1, w2, w3
/// as rows, so q w3 = e3.
struct DesiredFrame {
  Vec3 w1, w2, w3;
  Mat3 q;
};

DesiredFrame frame_from_desired(const DesiredMotion& d);

/// Force/torque pair produced by a feedback law, added to (Pi', P').
struct ControlOutput {
  Vec3 u_rot = Vec3::Zero();
  Vec3 u_lin = Vec3::Zero();
};

enum class ControllerId { None, WeightCompensation, SteadyMotion, DriftCorrection };

/// Test hook: evaluate a law with one term's sign flipped, to demonstrate
/// that the matching checks actually reject wrong implementations. Production
/// paths use None.
enum class ControlMutation {
  None,
  WeightTerm,          // weight compensation force
  SteadyGravityTerm,   // gravity-shaping torque in the steady-motion law
  SteadyVelocityTerm,  // velocity-shaping torque in the steady-motion law
  DriftGravityTerm,    // gravity-shaping torque in the drift-correction law
  DriftVelocityTerm,   // velocity-shaping torque in the drift-correction law
  DriftForceTerm       // translational drift feedback
};

/// Cancels the net weight on the heavy top's base: u = (0, total_mass g Gamma).
/// Needs a_r4.
ControlOutput u_weight_compensation(const InertiaParams& p, const ReducedState& s,
                                    ControlMutation mutation = ControlMutation::None);

/// Steady-motion stabilizer for the underwater vehicle. With
/// gamma_e = -r_d^T e3 and mt = |v_d| (M - alpha I) v_d:
///   u_rot = mgl (com_dir + beta gamma_e) x Gamma + Theta x mt,  u_lin = 0.
/// Needs a_r3 and theta.
ControlOutput u_steady_motion(const InertiaParams& p, const Gains& g,
                              const DesiredMotion& d, const ReducedState& s,
                              ControlMutation mutation = ControlMutation::None);

/// Drift-corrected stabilizer. Same gravity shaping; the velocity term uses
/// the marker normal Delta1 x Delta2 in place of Theta, and the marker
/// offsets are fed back on the translational channel:
///   u_lin = -(K delta)_1 Delta1 - (K delta)_2 Delta2.
/// Needs a_r3 and deltas.
ControlOutput u_drift_correction(const InertiaParams& p, const Gains& g,
                                 const DesiredMotion& d, const ReducedState& s,
                                 ControlMutation mutation = ControlMutation::None);

/// Potential added by the steady-motion law:
///   -mgl (com_dir + beta gamma_e) . Gamma + mt . Theta.
double shaped_potential_steady(const InertiaParams& p, const Gains& g,
                               const DesiredMotion& d, const Vec3& gamma,
                               const Vec3& theta);

/// Potential added by the drift-correction law:
///   -mgl (com_dir + beta gamma_e) . Gamma + Delta1 . (Delta2 x mt)
///   + 1/2 delta^T K delta.
double shaped_potential_drift(const InertiaParams& p, const Gains& g,
                              const DesiredMotion& d, const Vec3& gamma,
                              const std::array<Vec4, 2>& deltas);

/// Analytic gradients of the shaped potentials (used by the matching
/// residuals and the bracket-form checks).
struct ShapedGradSteady {
  Vec3 d_gamma, d_theta;
};
struct ShapedGradDrift {
  Vec3 d_gamma;
  Vec4 d_d1, d_d2;
};
ShapedGradSteady shaped_potential_steady_grad(const InertiaParams& p, const Gains& g,
                                              const DesiredMotion& d);
ShapedGradDrift shaped_potential_drift_grad(const InertiaParams& p, const Gains& g,
                                            const DesiredMotion& d,
                                            const std::array<Vec4, 2>& deltas);

/// Sup-norm gap between the weight-compensated heavy-top equations restricted
/// to (Pi, P, Gamma) and the underwater-vehicle form with the same inertia.
/// Zero (to rounding) when the compensation is implemented correctly.
double matching_residual_weight(const InertiaParams& p, const ReducedState& s,
                                  ControlMutation mutation = ControlMutation::None);

/// Sup-norm gap between the controlled vehicle equations under
/// u_steady_motion and the uncontrolled equations generated by the shaped
/// potential (forces assembled through the momentum maps instead of the law).
double matching_residual_steady(const InertiaParams& p, const Gains& g,
                                const DesiredMotion& d, const ReducedState& s,
                                ControlMutation mutation = ControlMutation::None);

/// Same gap for u_drift_correction.
double matching_residual_drift(const InertiaParams& p, const Gains& g,
                               const DesiredMotion& d, const ReducedState& s,
                               ControlMutation mutation = ControlMutation::None);

/// A feedback law bundled with its data, as scenarios carry it.
struct Controller {
  ControllerId id = ControllerId::None;
  Gains gains{};
  std::optional<DesiredMotion> desired;
  ControlMutation mutation = ControlMutation::None;
};

/// Dispatch to the active law (zero output for ControllerId::None).
ControlOutput evaluate_control(const InertiaParams& p, const Controller& c,
                               const ReducedState& s);

/// Full closed-loop rates: system equations plus controller-owned advected
/// fields plus the feedback force on the impulses.
StateRates closed_loop_rhs(SystemId id, const InertiaParams& p, const Controller& c,
                           const ReducedState& s);

/// Conserved energy of the closed loop (kinetic + potential + shaped
/// potential where applicable).
double closed_loop_energy(SystemId id, const InertiaParams& p, const Controller& c,
                          const ReducedState& s);

/// Candidate relative equilibrium for the desired motion: xi = (0, v_d),
/// Gamma = -r_d^T e3, plus theta = v_d/|v_d| (steady motion) or
/// deltas = ((r_d^T w1, 0), (r_d^T w2, 0)) (drift correction). It is a true
/// fixed point for those two laws; for ControllerId::None and
/// WeightCompensation it is generally not one, which linearize() reports.
/// Throws Error when the controller carries no desired motion.
ReducedState equilibrium_state(SystemId id, const InertiaParams& p, const Controller& c);

/// Sufficient-condition check for the stabilizing gains:
/// alpha l I - M positive definite and l beta > 0. Violations are reported as
/// warnings (the laws still run; the equilibrium may be unstable).
std::vector<std::string> gain_warnings(const InertiaParams& p, const Gains& g);

}  // namespace epshape
