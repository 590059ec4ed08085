#include "epshape/systems.hpp"

#include <cmath>

namespace epshape {

InertiaParams::InertiaParams(const Mat3& inertia, const Mat3& coupling,
                             const Mat3& mass_matrix, double mass, double total_mass,
                             double gravity, double arm, const Vec3& com_dir)
    : inertia_(inertia),
      coupling_(coupling),
      mass_matrix_(mass_matrix),
      mass_(mass),
      total_mass_(total_mass),
      gravity_(gravity),
      arm_(arm),
      com_dir_(com_dir) {
  const Mat6 k = kinetic_matrix();
  if (!k.allFinite() || !std::isfinite(mass_) || !std::isfinite(total_mass_) ||
      !std::isfinite(gravity_) || !std::isfinite(arm_) || !com_dir_.allFinite()) {
    throw SingularInertia("inertia parameters must be finite");
  }
  if ((k - k.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + k.cwiseAbs().maxCoeff())) {
    throw SingularInertia("kinetic-energy matrix is not symmetric");
  }
  factor_.compute(k);
  if (factor_.info() != Eigen::Success) {
    throw SingularInertia("kinetic-energy matrix is not positive definite");
  }
  if (std::abs(com_dir_.norm() - 1.0) > 1e-9) {
    throw SingularInertia("com_dir must be a unit vector");
  }
  if (mass_ < 0.0) {
    throw SingularInertia("mass must be non-negative");
  }
}

InertiaParams InertiaParams::defaults() {
  const double g = 9.81;
  return InertiaParams(Vec3(3.0, 2.0, 1.0).asDiagonal(), Mat3::Zero(),
                       Vec3(1.2, 1.5, 2.0).asDiagonal(),
                       /*mass=*/1.0, /*total_mass=*/1.5, g, /*arm=*/1.0 / g,
                       Vec3::UnitZ());
}

Mat6 InertiaParams::kinetic_matrix() const {
  Mat6 k;
  k.topLeftCorner<3, 3>() = inertia_;
  k.topRightCorner<3, 3>() = coupling_;
  k.bottomLeftCorner<3, 3>() = coupling_.transpose();
  k.bottomRightCorner<3, 3>() = mass_matrix_;
  return k;
}

const Vec3& ReducedState::gamma() const {
  if (a_r3) return *a_r3;
  if (a_r4) return a_r4->spatial;
  throw MissingField("state carries no advected gravity direction");
}

MomentumCovector legendre(const InertiaParams& p, const AlgebraVector& xi) {
  Vec6 v;
  v << xi.omega, xi.vel;
  const Vec6 m = p.kinetic_matrix() * v;
  return {m.head<3>(), m.tail<3>()};
}

AlgebraVector legendre_inverse(const InertiaParams& p, const MomentumCovector& m) {
  if (p.kinetic_factor().info() != Eigen::Success) {
    throw SingularInertia("kinetic-energy factorization is unusable");
  }
  Vec6 rhs;
  rhs << m.pi, m.p;
  const Vec6 xi = p.kinetic_factor().solve(rhs);
  return {xi.head<3>(), xi.tail<3>()};
}

StateRates ep_rhs_underwater_vehicle(const InertiaParams& p, const ReducedState& s) {
  if (!s.a_r3) throw MissingField("underwater vehicle needs a_r3 (Gamma)");
  const Vec3& gamma = *s.a_r3;
  const MomentumCovector m = legendre(p, s.xi);
  StateRates out;
  out.mom.pi = m.pi.cross(s.xi.omega) + m.p.cross(s.xi.vel) -
               p.mgl() * p.com_dir().cross(gamma);
  out.mom.p = m.p.cross(s.xi.omega);
  out.a_r3 = advect_rot3(s.xi, gamma);
  return out;
}

StateRates ep_rhs_heavy_top(const InertiaParams& p, const ReducedState& s) {
  if (!s.a_r4) throw MissingField("heavy top needs a_r4 (Gamma, h)");
  const Vec4& a = *s.a_r4;
  const MomentumCovector m = legendre(p, s.xi);
  StateRates out;
  out.mom.pi = m.pi.cross(s.xi.omega) + m.p.cross(s.xi.vel) -
               p.mgl() * p.com_dir().cross(a.spatial);
  out.mom.p = m.p.cross(s.xi.omega) - p.total_mass() * p.gravity() * a.spatial;
  out.a_r4 = advect_hom4(s.xi, a);
  return out;
}

StateRates ep_rhs(SystemId id, const InertiaParams& p, const ReducedState& s) {
  switch (id) {
    case SystemId::UnderwaterVehicle:
      return ep_rhs_underwater_vehicle(p, s);
    case SystemId::HeavyTop:
      return ep_rhs_heavy_top(p, s);
  }
  throw Error("unknown system id");
}

StateRates advect_extras_rhs(const ReducedState& s) {
  StateRates out;
  if (s.theta) out.theta = advect_rot3(s.xi, *s.theta);
  if (s.deltas) {
    out.deltas = {advect_hom4(s.xi, (*s.deltas)[0]), advect_hom4(s.xi, (*s.deltas)[1])};
  }
  return out;
}

double kinetic_energy(const InertiaParams& p, const AlgebraVector& xi) {
  return 0.5 * pair(legendre(p, xi), xi);
}

double energy(const InertiaParams& p, const ReducedState& s, PotentialId potential) {
  double u = 0.0;
  switch (potential) {
    case PotentialId::KineticOnly:
      break;
    case PotentialId::OffsetGravity:
      u = p.mgl() * p.com_dir().dot(s.gamma());
      break;
    case PotentialId::OffsetAndHeightGravity: {
      if (!s.a_r4) throw MissingField("height potential needs a_r4 (Gamma, h)");
      u = p.mgl() * p.com_dir().dot(s.a_r4->spatial) +
          p.total_mass() * p.gravity() * s.a_r4->scalar;
      break;
    }
  }
  return kinetic_energy(p, s.xi) + u;
}

}  // namespace epshape
