#pragma once

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <stdexcept>
#include <string>

namespace epshape {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

/// 4-vector split into a spatial part and a scalar slot, e.g. (Gamma, h) or a
/// drift marker leg (Delta_i, delta_i).
struct Vec4 {
  Vec3 spatial = Vec3::Zero();
  double scalar = 0.0;

  Vec4() = default;
  Vec4(const Vec3& s, double c) : spatial(s), scalar(c) {}

  double dot(const Vec4& o) const { return spatial.dot(o.spatial) + scalar * o.scalar; }
  double norm() const { return std::sqrt(dot(*this)); }

  Vec4 operator+(const Vec4& o) const { return {spatial + o.spatial, scalar + o.scalar}; }
  Vec4 operator-(const Vec4& o) const { return {spatial - o.spatial, scalar - o.scalar}; }
  Vec4 operator*(double c) const { return {spatial * c, scalar * c}; }
};
inline Vec4 operator*(double c, const Vec4& v) { return v * c; }

/// Body-frame velocity pair (Omega, v): angular and linear velocity.
struct AlgebraVector {
  Vec3 omega = Vec3::Zero();
  Vec3 vel = Vec3::Zero();

  AlgebraVector() = default;
  AlgebraVector(const Vec3& w, const Vec3& v) : omega(w), vel(v) {}

  AlgebraVector operator+(const AlgebraVector& o) const { return {omega + o.omega, vel + o.vel}; }
  AlgebraVector operator-(const AlgebraVector& o) const { return {omega - o.omega, vel - o.vel}; }
  AlgebraVector operator*(double c) const { return {omega * c, vel * c}; }
};
inline AlgebraVector operator*(double c, const AlgebraVector& x) { return x * c; }

/// Impulse pair (Pi, P): angular and linear impulse, dual to AlgebraVector.
struct MomentumCovector {
  Vec3 pi = Vec3::Zero();
  Vec3 p = Vec3::Zero();

  MomentumCovector() = default;
  MomentumCovector(const Vec3& a, const Vec3& b) : pi(a), p(b) {}

  MomentumCovector operator+(const MomentumCovector& o) const { return {pi + o.pi, p + o.p}; }
  MomentumCovector operator-(const MomentumCovector& o) const { return {pi - o.pi, p - o.p}; }
  MomentumCovector operator*(double c) const { return {pi * c, p * c}; }
};
inline MomentumCovector operator*(double c, const MomentumCovector& m) { return m * c; }

/// Natural pairing <(Pi,P),(Omega,v)> = Pi.Omega + P.v.
inline double pair(const MomentumCovector& m, const AlgebraVector& x) {
  return m.pi.dot(x.omega) + m.p.dot(x.vel);
}

/// Rigid placement (R, x): rotation plus translation, acting as y -> R y + x.
struct SE3Element {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  SE3Element() = default;
  SE3Element(const Mat3& r, const Vec3& t) : rotation(r), translation(t) {}
};

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// vee() input is not skew-symmetric within tolerance.
struct NotSkew : Error { using Error::Error; };
/// A claimed rotation matrix fails R^T R = I or det R = 1 within tolerance.
struct InvalidRotation : Error { using Error::Error; };
/// The 6x6 kinetic-energy matrix is not symmetric positive definite.
struct SingularInertia : Error { using Error::Error; };
/// A state lacks a field the requested evaluation needs.
struct MissingField : Error { using Error::Error; };
/// Desired translational velocity is zero; no frame can be built from it.
struct ZeroDesiredVelocity : Error { using Error::Error; };
/// Gradient arity does not match the bracket's phase-space fields.
struct ArityMismatch : Error { using Error::Error; };
/// A NaN or Inf appeared in an integrated state.
struct NonFiniteState : Error { using Error::Error; };
/// Linearization was requested at a point that is not a fixed point.
struct NotAnEquilibrium : Error { using Error::Error; };
/// The eigenvalue iteration failed to converge.
struct NoConvergence : Error { using Error::Error; };
/// Scenario input is malformed or violates a validation rule. `field` is the
/// dotted path of the offending entry ("" for file-level problems).
struct ScenarioError : Error {
  std::string field;
  std::string detail;
  ScenarioError(const std::string& f, const std::string& msg)
      : Error(f.empty() ? msg : f + ": " + msg), field(f), detail(msg) {}
};

inline bool finite(const Vec3& v) { return v.allFinite(); }
inline bool finite(const Vec4& v) { return v.spatial.allFinite() && std::isfinite(v.scalar); }
inline bool finite(const AlgebraVector& x) { return finite(x.omega) && finite(x.vel); }
inline bool finite(const MomentumCovector& m) { return finite(m.pi) && finite(m.p); }

}  // namespace epshape
