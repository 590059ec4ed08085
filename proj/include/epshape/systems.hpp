#pragma once

#include <Eigen/Cholesky>

#include "epshape/algebra.hpp"
#include "epshape/types.hpp"

namespace epshape {

/// The two shipped rigid-body models.
///  - UnderwaterVehicle: neutrally buoyant body, rotation about the center of
///    buoyancy, gravity direction advected in the body frame (Gamma).
///  - HeavyTop: top on a movable point-mass base; Gamma plus the base height h
///    are advected, and the net weight pulls the base down.
enum class SystemId { UnderwaterVehicle, HeavyTop };

/// Potential energy selector for energy():
///  - KineticOnly: no potential term.
///  - OffsetGravity: m g l * com_dir . Gamma (center of mass offset torque).
///  - OffsetAndHeightGravity: adds total_mass * g * h (base weight).
enum class PotentialId { KineticOnly, OffsetGravity, OffsetAndHeightGravity };

/// Inertial data shared by both models. The 6x6 kinetic-energy matrix
/// [J D; D^T M] must be symmetric positive definite (checked by Cholesky at
/// construction; throws SingularInertia) and com_dir must be a unit vector
/// within 1e-9.
class InertiaParams {
 public:
  InertiaParams(const Mat3& inertia, const Mat3& coupling, const Mat3& mass_matrix,
                double mass, double total_mass, double gravity, double arm,
                const Vec3& com_dir);

  /// Desk-scale defaults: J = diag(3,2,1), M = diag(1.2,1.5,2.0), D = 0,
  /// m g l = 1 with g = 9.81, com_dir = e3, total_mass = 1.5.
  static InertiaParams defaults();

  const Mat3& inertia() const { return inertia_; }
  const Mat3& coupling() const { return coupling_; }
  const Mat3& mass_matrix() const { return mass_matrix_; }
  double mass() const { return mass_; }
  double total_mass() const { return total_mass_; }
  double gravity() const { return gravity_; }
  double arm() const { return arm_; }
  const Vec3& com_dir() const { return com_dir_; }

  /// m * g * l, the gravity-torque coefficient.
  double mgl() const { return mass_ * gravity_ * arm_; }

  Mat6 kinetic_matrix() const;
  const Eigen::LLT<Mat6>& kinetic_factor() const { return factor_; }

 private:
  Mat3 inertia_, coupling_, mass_matrix_;
  double mass_, total_mass_, gravity_, arm_;
  Vec3 com_dir_;
  Eigen::LLT<Mat6> factor_;
};

/// Reduced state: body velocities plus whatever advected parameters the
/// active system/controller tracks. Absent fields stay disengaged; evaluators
/// throw MissingField when they need one that is not set.
struct ReducedState {
  AlgebraVector xi;
  std::optional<Vec3> a_r3;                 // Gamma
  std::optional<Vec4> a_r4;                 // (Gamma, h)
  std::optional<Vec3> theta;                // desired-direction tracker
  std::optional<std::array<Vec4, 2>> deltas;  // drift markers (Delta_i, delta_i)

  /// Gamma from whichever advected slot carries it.
  const Vec3& gamma() const;
};

/// Time derivative of a ReducedState in momentum coordinates, same optional
/// layout. Fields absent from the input stay absent here.
struct StateRates {
  MomentumCovector mom;
  std::optional<Vec3> a_r3;
  std::optional<Vec4> a_r4;
  std::optional<Vec3> theta;
  std::optional<std::array<Vec4, 2>> deltas;
};

/// Impulses from velocities: (Pi, P) = [J D; D^T M] (Omega, v).
MomentumCovector legendre(const InertiaParams& p, const AlgebraVector& xi);

/// Velocities from impulses via the cached Cholesky factor.
AlgebraVector legendre_inverse(const InertiaParams& p, const MomentumCovector& m);

/// Uncontrolled equations for the neutrally buoyant vehicle:
///   Pi' = Pi x Omega + P x v - mgl com_dir x Gamma,  P' = P x Omega,
///   Gamma' = Gamma x Omega.
/// Needs xi and a_r3; impulses are computed internally.
StateRates ep_rhs_underwater_vehicle(const InertiaParams& p, const ReducedState& s);

/// Uncontrolled heavy top on a movable base:
///   Pi' as above,  P' = P x Omega - total_mass g Gamma,
///   (Gamma, h)' = (Gamma x Omega, Gamma . v).
/// Needs xi and a_r4.
StateRates ep_rhs_heavy_top(const InertiaParams& p, const ReducedState& s);

/// Dispatch on SystemId.
StateRates ep_rhs(SystemId id, const InertiaParams& p, const ReducedState& s);

/// Advection rates for the controller-owned fields (theta, deltas) that are
/// present in s; never touches momenta or the system's own parameters.
StateRates advect_extras_rhs(const ReducedState& s);

double kinetic_energy(const InertiaParams& p, const AlgebraVector& xi);

/// Kinetic plus selected potential. OffsetGravity reads Gamma from either
/// advected slot; OffsetAndHeightGravity requires a_r4.
double energy(const InertiaParams& p, const ReducedState& s, PotentialId potential);

}  // namespace epshape
