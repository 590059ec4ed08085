#include "epshape/algebra.hpp"

#include <cmath>

namespace epshape {

Mat3 hat(const Vec3& w) {
  Mat3 m;
  m << 0.0, -w.z(), w.y(),
       w.z(), 0.0, -w.x(),
      -w.y(), w.x(), 0.0;
  return m;
}

Vec3 vee(const Mat3& W, double tol) {
  const Mat3 sym = W + W.transpose();
  if (sym.cwiseAbs().maxCoeff() > tol) {
    throw NotSkew("vee: input is not skew-symmetric within tolerance");
  }
  return Vec3(W(2, 1), W(0, 2), W(1, 0));
}

Mat3 exp_so3(const Vec3& w) {
  const double theta = w.norm();
  const Mat3 W = hat(w);
  double a, b;  // sin(t)/t and (1-cos(t))/t^2
  if (theta < 1e-8) {
    const double t2 = theta * theta;
    a = 1.0 - t2 / 6.0;
    b = 0.5 - t2 / 24.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / (theta * theta);
  }
  return Mat3::Identity() + a * W + b * W * W;
}

void validate_rotation(const Mat3& r, double tol) {
  const Mat3 defect = r.transpose() * r - Mat3::Identity();
  if (defect.cwiseAbs().maxCoeff() > tol) {
    throw InvalidRotation("rotation block fails R^T R = I within tolerance");
  }
  if (r.determinant() < 0.0) {
    throw InvalidRotation("rotation block has negative determinant");
  }
}

AlgebraVector ad(const AlgebraVector& x, const AlgebraVector& y) {
  return {x.omega.cross(y.omega), x.omega.cross(y.vel) - y.omega.cross(x.vel)};
}

MomentumCovector coad(const AlgebraVector& x, const MomentumCovector& m) {
  return {m.pi.cross(x.omega) - x.vel.cross(m.p), m.p.cross(x.omega)};
}

Vec3 diamond(const Vec3& y, const Vec3& b) { return y.cross(b); }

MomentumCovector momentum_rot3(const Vec3& y, const Vec3& gamma) {
  return {y.cross(gamma), Vec3::Zero()};
}

MomentumCovector momentum_hom4(const Vec4& y, const Vec4& a) {
  return {y.spatial.cross(a.spatial), y.scalar * a.spatial};
}

MomentumCovector momentum_hom4_pair(const Vec4& y, const Vec4& z,
                                    const Vec4& d1, const Vec4& d2) {
  return momentum_hom4(y, d1) + momentum_hom4(z, d2);
}

Vec3 advect_rot3(const AlgebraVector& xi, const Vec3& gamma) {
  return gamma.cross(xi.omega);
}

Vec4 advect_hom4(const AlgebraVector& xi, const Vec4& a) {
  return {a.spatial.cross(xi.omega), a.spatial.dot(xi.vel)};
}

SE3Element se3_compose(const SE3Element& s1, const SE3Element& s2) {
  validate_rotation(s1.rotation);
  validate_rotation(s2.rotation);
  return {s1.rotation * s2.rotation, s1.rotation * s2.translation + s1.translation};
}

SE3Element se3_inverse(const SE3Element& s) {
  validate_rotation(s.rotation);
  const Mat3 rt = s.rotation.transpose();
  return {rt, -(rt * s.translation)};
}

Eigen::Matrix4d se3_matrix(const SE3Element& s) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = s.rotation;
  m.topRightCorner<3, 1>() = s.translation;
  return m;
}

Vec4 dual_act_hom4(const SE3Element& s, const Vec4& a) {
  validate_rotation(s.rotation);
  const Vec3 rs = s.rotation * a.spatial;
  return {rs, a.scalar - s.translation.dot(rs)};
}

namespace {

AlgebraVector unpack_xi(const Eigen::VectorXd& x) {
  return {x.head<3>(), x.tail<3>()};
}

Eigen::VectorXd pack_xi(const AlgebraVector& x) {
  Eigen::VectorXd out(6);
  out << x.omega, x.vel;
  return out;
}

}  // namespace

GroupDescriptor se3_rot3_descriptor() {
  GroupDescriptor d;
  d.algebra_dim = 6;
  d.advected_dim = 3;
  d.ad = [](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    return pack_xi(ad(unpack_xi(x), unpack_xi(y)));
  };
  d.coad = [](const Eigen::VectorXd& x, const Eigen::VectorXd& m) {
    const MomentumCovector r = coad(unpack_xi(x), {m.head<3>(), m.tail<3>()});
    Eigen::VectorXd out(6);
    out << r.pi, r.p;
    return out;
  };
  d.momentum = [](const Eigen::VectorXd& grad, const Eigen::VectorXd& a) {
    const MomentumCovector r = momentum_rot3(grad.head<3>(), a.head<3>());
    Eigen::VectorXd out(6);
    out << r.pi, r.p;
    return out;
  };
  d.advect = [](const Eigen::VectorXd& x, const Eigen::VectorXd& a) {
    return Eigen::VectorXd(advect_rot3(unpack_xi(x), a.head<3>()));
  };
  return d;
}

GroupDescriptor se3_hom4_descriptor() {
  GroupDescriptor d;
  d.algebra_dim = 6;
  d.advected_dim = 4;
  d.ad = se3_rot3_descriptor().ad;
  d.coad = se3_rot3_descriptor().coad;
  d.momentum = [](const Eigen::VectorXd& grad, const Eigen::VectorXd& a) {
    const MomentumCovector r =
        momentum_hom4({grad.head<3>(), grad(3)}, {a.head<3>(), a(3)});
    Eigen::VectorXd out(6);
    out << r.pi, r.p;
    return out;
  };
  d.advect = [](const Eigen::VectorXd& x, const Eigen::VectorXd& a) {
    const Vec4 r = advect_hom4(unpack_xi(x), {a.head<3>(), a(3)});
    Eigen::VectorXd out(4);
    out << r.spatial, r.scalar;
    return out;
  };
  return d;
}

}  // namespace epshape
