#pragma once

#include <functional>

#include "epshape/types.hpp"

namespace epshape {

/// Skew-symmetric matrix of w, so that hat(w) * y = w x y.
Mat3 hat(const Vec3& w);

/// Inverse of hat(). Throws NotSkew if |W + W^T| exceeds tol in any entry.
Vec3 vee(const Mat3& W, double tol = 1e-9);

/// Rotation about axis w by angle |w| (Rodrigues). Switches to the Taylor
/// expansion of the coefficients below |w| = 1e-8 to avoid 0/0.
Mat3 exp_so3(const Vec3& w);

/// Throws InvalidRotation unless R^T R = I (entrywise tol) and det R > 0.
void validate_rotation(const Mat3& r, double tol = 1e-9);

/// Commutator ad_x y = [x, y] on body velocity pairs:
/// (Omega x eta, Omega x w - eta x v).
AlgebraVector ad(const AlgebraVector& x, const AlgebraVector& y);

/// Dual of ad: <coad(x, m), y> = <m, ad(x, y)> for all y. On impulse pairs:
/// (mu x Omega - v x alpha, alpha x Omega).
MomentumCovector coad(const AlgebraVector& x, const MomentumCovector& m);

/// Force pairing for the rotation action on R^3: y diamond b = y x b.
Vec3 diamond(const Vec3& y, const Vec3& b);

/// Momentum map of the rotation action on R^3 applied to a potential
/// gradient y at parameter gamma: (y x gamma, 0).
MomentumCovector momentum_rot3(const Vec3& y, const Vec3& gamma);

/// Momentum map of the homogeneous 4-vector action: with y = (ys, y4) and
/// a = (as, a4), gives (ys x as, y4 * as).
MomentumCovector momentum_hom4(const Vec4& y, const Vec4& a);

/// Two-slot version of momentum_hom4 for a pair of advected 4-vectors;
/// contributions add.
MomentumCovector momentum_hom4_pair(const Vec4& y, const Vec4& z,
                                    const Vec4& d1, const Vec4& d2);

/// Body rate of an advected 3-vector: gamma x Omega.
Vec3 advect_rot3(const AlgebraVector& xi, const Vec3& gamma);

/// Body rate of an advected 4-vector (as, a4): (as x Omega, as . v).
Vec4 advect_hom4(const AlgebraVector& xi, const Vec4& a);

/// Group product (R1 R2, R1 x2 + x1).
SE3Element se3_compose(const SE3Element& s1, const SE3Element& s2);

/// Group inverse (R^T, -R^T x).
SE3Element se3_inverse(const SE3Element& s);

/// 4x4 homogeneous matrix [R x; 0 1].
Eigen::Matrix4d se3_matrix(const SE3Element& s);

/// Dual action of s on an advected 4-vector: (s^T)^{-1} a, i.e.
/// (R as, a4 - x . (R as)). Validates the rotation block.
Vec4 dual_act_hom4(const SE3Element& s, const Vec4& a);

/// Extension point: a semidirect-product mechanical group as plain data.
/// Slots operate on flat coordinate vectors (velocity block of size
/// algebra_dim, advected block of size advected_dim); the two rigid-body
/// instantiations below are the only ones shipped.
struct GroupDescriptor {
  int algebra_dim = 0;
  int advected_dim = 0;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)> ad;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)> coad;
  /// Potential force on impulses from gradient block and advected block.
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)> momentum;
  /// Body rate of the advected block given the velocity block.
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)> advect;
};

/// Rigid body with a single advected direction (gravity in body frame).
GroupDescriptor se3_rot3_descriptor();

/// Rigid body with an advected direction plus height scalar.
GroupDescriptor se3_hom4_descriptor();

}  // namespace epshape
