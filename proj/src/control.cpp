#include "epshape/control.hpp"

#include <cmath>
#include <sstream>

namespace epshape {

namespace {

double sign_for(ControlMutation active, ControlMutation term) {
  return active == term ? -1.0 : 1.0;
}

/// |v_d| (M - alpha I) v_d, the velocity-shaping torque arm.
Vec3 shaping_arm(const InertiaParams& p, const Gains& g, const DesiredMotion& d) {
  return d.v_d.norm() * ((p.mass_matrix() - g.alpha * Mat3::Identity()) * d.v_d);
}

Vec3 equilibrium_gamma(const DesiredMotion& d) { return -(d.r_d.transpose() * Vec3::UnitZ()); }

/// Gravity-shaping torque shared by both vehicle laws.
Vec3 gravity_shaping(const InertiaParams& p, const Gains& g, const DesiredMotion& d,
                     const Vec3& gamma) {
  return p.mgl() * (p.com_dir() + g.beta * equilibrium_gamma(d)).cross(gamma);
}

const Vec3& require_gamma3(const ReducedState& s, const char* who) {
  if (!s.a_r3) throw MissingField(std::string(who) + " needs a_r3 (Gamma)");
  return *s.a_r3;
}

const Vec3& require_theta(const ReducedState& s, const char* who) {
  if (!s.theta) throw MissingField(std::string(who) + " needs theta");
  return *s.theta;
}

const std::array<Vec4, 2>& require_deltas(const ReducedState& s, const char* who) {
  if (!s.deltas) throw MissingField(std::string(who) + " needs drift markers");
  return *s.deltas;
}

double sup3(const Vec3& v) { return v.cwiseAbs().maxCoeff(); }

}  // namespace

void validate_drift_gains(const Gains& g) {
  const Eigen::Matrix2d& k = g.k_matrix;
  const double scale = 1.0 + k.cwiseAbs().maxCoeff();
  if (!k.allFinite() || std::abs(k(0, 1) - k(1, 0)) > 1e-12 * scale) {
    throw ScenarioError("gains.k_matrix", "drift feedback matrix must be symmetric");
  }
  if (k(0, 0) <= 0.0 || k.determinant() <= 0.0) {
    throw ScenarioError("gains.k_matrix",
                        "drift feedback matrix must be positive definite "
                        "(leading principal minors must be positive)");
  }
}

DesiredMotion::DesiredMotion(const Mat3& r, const Vec3& v) : r_d(r), v_d(v) {
  validate_rotation(r_d);
  if (!v_d.allFinite()) throw ZeroDesiredVelocity("desired velocity must be finite");
  if (v_d.norm() == 0.0) throw ZeroDesiredVelocity("desired velocity must be nonzero");
}

DesiredFrame frame_from_desired(const DesiredMotion& d) {
  DesiredFrame f;
  f.w3 = (d.r_d * d.v_d).normalized();
  int k = 0;
  f.w3.cwiseAbs().minCoeff(&k);
  const Vec3 e = Vec3::Unit(k);
  f.w1 = (e - e.dot(f.w3) * f.w3).normalized();
  f.w2 = f.w3.cross(f.w1);
  f.q.row(0) = f.w1;
  f.q.row(1) = f.w2;
  f.q.row(2) = f.w3;
  return f;
}

ControlOutput u_weight_compensation(const InertiaParams& p, const ReducedState& s,
                                    ControlMutation mutation) {
  if (!s.a_r4) throw MissingField("weight compensation needs a_r4 (Gamma, h)");
  ControlOutput u;
  u.u_lin = sign_for(mutation, ControlMutation::WeightTerm) * p.total_mass() *
            p.gravity() * s.a_r4->spatial;
  return u;
}

ControlOutput u_steady_motion(const InertiaParams& p, const Gains& g,
                              const DesiredMotion& d, const ReducedState& s,
                              ControlMutation mutation) {
  const Vec3& gamma = require_gamma3(s, "steady-motion law");
  const Vec3& theta = require_theta(s, "steady-motion law");
  ControlOutput u;
  u.u_rot = sign_for(mutation, ControlMutation::SteadyGravityTerm) *
                gravity_shaping(p, g, d, gamma) +
            sign_for(mutation, ControlMutation::SteadyVelocityTerm) *
                theta.cross(shaping_arm(p, g, d));
  return u;
}

ControlOutput u_drift_correction(const InertiaParams& p, const Gains& g,
                                 const DesiredMotion& d, const ReducedState& s,
                                 ControlMutation mutation) {
  const Vec3& gamma = require_gamma3(s, "drift-correction law");
  const std::array<Vec4, 2>& dl = require_deltas(s, "drift-correction law");
  const Eigen::Vector2d offsets(dl[0].scalar, dl[1].scalar);
  const Eigen::Vector2d kd = g.k_matrix * offsets;
  ControlOutput u;
  u.u_rot = sign_for(mutation, ControlMutation::DriftGravityTerm) *
                gravity_shaping(p, g, d, gamma) +
            sign_for(mutation, ControlMutation::DriftVelocityTerm) *
                dl[0].spatial.cross(dl[1].spatial).cross(shaping_arm(p, g, d));
  u.u_lin = -sign_for(mutation, ControlMutation::DriftForceTerm) *
            (kd(0) * dl[0].spatial + kd(1) * dl[1].spatial);
  return u;
}

double shaped_potential_steady(const InertiaParams& p, const Gains& g,
                               const DesiredMotion& d, const Vec3& gamma,
                               const Vec3& theta) {
  return -p.mgl() * (p.com_dir() + g.beta * equilibrium_gamma(d)).dot(gamma) +
         shaping_arm(p, g, d).dot(theta);
}

double shaped_potential_drift(const InertiaParams& p, const Gains& g,
                              const DesiredMotion& d, const Vec3& gamma,
                              const std::array<Vec4, 2>& deltas) {
  const Eigen::Vector2d offsets(deltas[0].scalar, deltas[1].scalar);
  return -p.mgl() * (p.com_dir() + g.beta * equilibrium_gamma(d)).dot(gamma) +
         deltas[0].spatial.dot(deltas[1].spatial.cross(shaping_arm(p, g, d))) +
         0.5 * offsets.dot(g.k_matrix * offsets);
}

ShapedGradSteady shaped_potential_steady_grad(const InertiaParams& p, const Gains& g,
                                              const DesiredMotion& d) {
  return {-p.mgl() * (p.com_dir() + g.beta * equilibrium_gamma(d)), shaping_arm(p, g, d)};
}

ShapedGradDrift shaped_potential_drift_grad(const InertiaParams& p, const Gains& g,
                                            const DesiredMotion& d,
                                            const std::array<Vec4, 2>& deltas) {
  const Vec3 arm = shaping_arm(p, g, d);
  const Eigen::Vector2d kd =
      g.k_matrix * Eigen::Vector2d(deltas[0].scalar, deltas[1].scalar);
  ShapedGradDrift out;
  out.d_gamma = -p.mgl() * (p.com_dir() + g.beta * equilibrium_gamma(d));
  out.d_d1 = {deltas[1].spatial.cross(arm), kd(0)};
  out.d_d2 = {arm.cross(deltas[0].spatial), kd(1)};
  return out;
}

double matching_residual_weight(const InertiaParams& p, const ReducedState& s,
                                  ControlMutation mutation) {
  if (!s.a_r4) throw MissingField("weight-compensation residual needs a_r4 (Gamma, h)");
  const StateRates controlled = ep_rhs_heavy_top(p, s);
  const ControlOutput u = u_weight_compensation(p, s, mutation);

  ReducedState restricted;
  restricted.xi = s.xi;
  restricted.a_r3 = s.a_r4->spatial;
  const StateRates target = ep_rhs_underwater_vehicle(p, restricted);

  double r = sup3(controlled.mom.pi + u.u_rot - target.mom.pi);
  r = std::max(r, sup3(controlled.mom.p + u.u_lin - target.mom.p));
  r = std::max(r, sup3(controlled.a_r4->spatial - *target.a_r3));
  return r;
}

namespace {

/// Sup-norm gap between the law-driven impulse rates and the rates generated
/// by the shaped potential through the momentum maps. The advection equations
/// coincide by construction, so only (Pi', P') can differ.
double matching_gap(const InertiaParams& p, const ReducedState& s,
                    const ControlOutput& u, const MomentumCovector& shaped_force) {
  const StateRates base = ep_rhs_underwater_vehicle(p, s);
  const MomentumCovector controlled{base.mom.pi + u.u_rot, base.mom.p + u.u_lin};

  const MomentumCovector m = legendre(p, s.xi);
  const MomentumCovector matched{
      m.pi.cross(s.xi.omega) + m.p.cross(s.xi.vel) + shaped_force.pi,
      m.p.cross(s.xi.omega) + shaped_force.p};
  return std::max(sup3(controlled.pi - matched.pi), sup3(controlled.p - matched.p));
}

}  // namespace

double matching_residual_steady(const InertiaParams& p, const Gains& g,
                                const DesiredMotion& d, const ReducedState& s,
                                ControlMutation mutation) {
  const Vec3& gamma = require_gamma3(s, "steady matching residual");
  const Vec3& theta = require_theta(s, "steady matching residual");
  const ShapedGradSteady sg = shaped_potential_steady_grad(p, g, d);
  const MomentumCovector force =
      momentum_rot3(-(p.mgl() * p.com_dir() + sg.d_gamma), gamma) +
      momentum_rot3(-sg.d_theta, theta);
  return matching_gap(p, s, u_steady_motion(p, g, d, s, mutation), force);
}

double matching_residual_drift(const InertiaParams& p, const Gains& g,
                               const DesiredMotion& d, const ReducedState& s,
                               ControlMutation mutation) {
  const Vec3& gamma = require_gamma3(s, "drift matching residual");
  const std::array<Vec4, 2>& dl = require_deltas(s, "drift matching residual");
  const ShapedGradDrift dg = shaped_potential_drift_grad(p, g, d, dl);
  const MomentumCovector force =
      momentum_rot3(-(p.mgl() * p.com_dir() + dg.d_gamma), gamma) +
      momentum_hom4_pair(-1.0 * dg.d_d1, -1.0 * dg.d_d2, dl[0], dl[1]);
  return matching_gap(p, s, u_drift_correction(p, g, d, s, mutation), force);
}

ControlOutput evaluate_control(const InertiaParams& p, const Controller& c,
                               const ReducedState& s) {
  switch (c.id) {
    case ControllerId::None:
      return {};
    case ControllerId::WeightCompensation:
      return u_weight_compensation(p, s, c.mutation);
    case ControllerId::SteadyMotion:
      if (!c.desired) throw MissingField("steady-motion controller needs desired motion");
      return u_steady_motion(p, c.gains, *c.desired, s, c.mutation);
    case ControllerId::DriftCorrection:
      if (!c.desired) throw MissingField("drift-correction controller needs desired motion");
      return u_drift_correction(p, c.gains, *c.desired, s, c.mutation);
  }
  throw Error("unknown controller id");
}

StateRates closed_loop_rhs(SystemId id, const InertiaParams& p, const Controller& c,
                           const ReducedState& s) {
  StateRates rates = ep_rhs(id, p, s);
  const StateRates extras = advect_extras_rhs(s);
  rates.theta = extras.theta;
  rates.deltas = extras.deltas;
  const ControlOutput u = evaluate_control(p, c, s);
  rates.mom.pi += u.u_rot;
  rates.mom.p += u.u_lin;
  return rates;
}

double closed_loop_energy(SystemId id, const InertiaParams& p, const Controller& c,
                          const ReducedState& s) {
  switch (c.id) {
    case ControllerId::None:
      return energy(p, s,
                    id == SystemId::HeavyTop ? PotentialId::OffsetAndHeightGravity
                                             : PotentialId::OffsetGravity);
    case ControllerId::WeightCompensation:
      // The compensated loop conserves kinetic + offset-gravity energy; the
      // height coordinate decouples.
      return energy(p, s, PotentialId::OffsetGravity);
    case ControllerId::SteadyMotion: {
      if (!c.desired) throw MissingField("steady-motion controller needs desired motion");
      const Vec3& theta = require_theta(s, "steady-motion energy");
      return energy(p, s, PotentialId::OffsetGravity) +
             shaped_potential_steady(p, c.gains, *c.desired, s.gamma(), theta);
    }
    case ControllerId::DriftCorrection: {
      if (!c.desired) throw MissingField("drift-correction controller needs desired motion");
      const std::array<Vec4, 2>& dl = require_deltas(s, "drift-correction energy");
      return energy(p, s, PotentialId::OffsetGravity) +
             shaped_potential_drift(p, c.gains, *c.desired, s.gamma(), dl);
    }
  }
  throw Error("unknown controller id");
}

ReducedState equilibrium_state(SystemId id, const InertiaParams& p, const Controller& c) {
  (void)p;
  if (!c.desired) throw Error("equilibrium construction needs a desired motion");
  const DesiredMotion& d = *c.desired;
  ReducedState s;
  s.xi = {Vec3::Zero(), d.v_d};
  if (id == SystemId::HeavyTop) {
    s.a_r4 = Vec4{equilibrium_gamma(d), 0.0};
  } else {
    s.a_r3 = equilibrium_gamma(d);
  }
  switch (c.id) {
    case ControllerId::SteadyMotion:
      s.theta = d.v_d.normalized();
      return s;
    case ControllerId::DriftCorrection: {
      const DesiredFrame f = frame_from_desired(d);
      s.deltas = {Vec4{d.r_d.transpose() * f.w1, 0.0}, Vec4{d.r_d.transpose() * f.w2, 0.0}};
      return s;
    }
    default:
      return s;
  }
}

std::vector<std::string> gain_warnings(const InertiaParams& p, const Gains& g) {
  std::vector<std::string> warnings;
  const Mat3 shaped = g.alpha * p.arm() * Mat3::Identity() - p.mass_matrix();
  Eigen::SelfAdjointEigenSolver<Mat3> eig(0.5 * (shaped + shaped.transpose()));
  const double min_eig = eig.eigenvalues().minCoeff();
  if (min_eig <= 0.0) {
    std::ostringstream os;
    os << "gains.alpha: alpha*l*I - M is not positive definite (min eigenvalue "
       << min_eig << "); the closed loop may not be stable";
    warnings.push_back(os.str());
  }
  if (p.arm() * g.beta <= 0.0) {
    std::ostringstream os;
    os << "gains.beta: l*beta = " << p.arm() * g.beta
       << " is not positive; the closed loop may not be stable";
    warnings.push_back(os.str());
  }
  return warnings;
}

}  // namespace epshape
