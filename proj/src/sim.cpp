#include "epshape/sim.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <sstream>

namespace epshape {

StateLayout StateLayout::of(const ReducedState& s) {
  return {s.a_r3.has_value(), s.a_r4.has_value(), s.theta.has_value(),
          s.deltas.has_value()};
}

int StateLayout::dim() const {
  return 6 + (a_r3 ? 3 : 0) + (a_r4 ? 4 : 0) + (theta ? 3 : 0) + (deltas ? 8 : 0);
}

Eigen::VectorXd pack_state(const InertiaParams& p, const ReducedState& s) {
  const StateLayout layout = StateLayout::of(s);
  Eigen::VectorXd y(layout.dim());
  const MomentumCovector m = legendre(p, s.xi);
  int at = 0;
  y.segment<3>(at) = m.pi;
  at += 3;
  y.segment<3>(at) = m.p;
  at += 3;
  if (s.a_r3) {
    y.segment<3>(at) = *s.a_r3;
    at += 3;
  }
  if (s.a_r4) {
    y.segment<3>(at) = s.a_r4->spatial;
    y(at + 3) = s.a_r4->scalar;
    at += 4;
  }
  if (s.theta) {
    y.segment<3>(at) = *s.theta;
    at += 3;
  }
  if (s.deltas) {
    for (const Vec4& d : *s.deltas) {
      y.segment<3>(at) = d.spatial;
      y(at + 3) = d.scalar;
      at += 4;
    }
  }
  return y;
}

ReducedState unpack_state(const InertiaParams& p, const StateLayout& layout,
                          const Eigen::VectorXd& y) {
  if (y.size() != layout.dim()) throw Error("packed state has the wrong dimension");
  ReducedState s;
  int at = 0;
  const MomentumCovector m{y.segment<3>(0), y.segment<3>(3)};
  s.xi = legendre_inverse(p, m);
  at = 6;
  if (layout.a_r3) {
    s.a_r3 = Vec3(y.segment<3>(at));
    at += 3;
  }
  if (layout.a_r4) {
    s.a_r4 = Vec4{y.segment<3>(at), y(at + 3)};
    at += 4;
  }
  if (layout.theta) {
    s.theta = Vec3(y.segment<3>(at));
    at += 3;
  }
  if (layout.deltas) {
    s.deltas = {Vec4{y.segment<3>(at), y(at + 3)}, Vec4{y.segment<3>(at + 4), y(at + 7)}};
    at += 8;
  }
  return s;
}

Eigen::VectorXd pack_rates(const StateLayout& layout, const StateRates& r) {
  Eigen::VectorXd y(layout.dim());
  int at = 0;
  y.segment<3>(at) = r.mom.pi;
  at += 3;
  y.segment<3>(at) = r.mom.p;
  at += 3;
  if (layout.a_r3) {
    if (!r.a_r3) throw MissingField("rates lack a_r3");
    y.segment<3>(at) = *r.a_r3;
    at += 3;
  }
  if (layout.a_r4) {
    if (!r.a_r4) throw MissingField("rates lack a_r4");
    y.segment<3>(at) = r.a_r4->spatial;
    y(at + 3) = r.a_r4->scalar;
    at += 4;
  }
  if (layout.theta) {
    if (!r.theta) throw MissingField("rates lack theta");
    y.segment<3>(at) = *r.theta;
    at += 3;
  }
  if (layout.deltas) {
    if (!r.deltas) throw MissingField("rates lack deltas");
    for (const Vec4& d : *r.deltas) {
      y.segment<3>(at) = d.spatial;
      y(at + 3) = d.scalar;
      at += 4;
    }
  }
  return y;
}

Eigen::VectorXd rk4_step(const FlatRhs& f, double t, const Eigen::VectorXd& y, double h) {
  if (!y.allFinite()) throw NonFiniteState("rk4_step: state contains NaN/Inf");
  const Eigen::VectorXd k1 = f(t, y);
  const Eigen::VectorXd k2 = f(t + 0.5 * h, y + (0.5 * h) * k1);
  const Eigen::VectorXd k3 = f(t + 0.5 * h, y + (0.5 * h) * k2);
  const Eigen::VectorXd k4 = f(t + h, y + h * k3);
  Eigen::VectorXd out = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!out.allFinite()) throw NonFiniteState("rk4_step: step produced NaN/Inf");
  return out;
}

DiagnosticSet conserved_quantities(SystemId id, const InertiaParams& p,
                                   const Controller& c) {
  DiagnosticSet set;
  set.names.push_back("energy");

  enum class Extra { GammaSq, PSq, PDotGamma, ThetaSq, GammaDotTheta, PDotTheta,
                     D1Sq, D2Sq, GammaDotD1, GammaDotD2, D1DotD2, PDotMarkerNormal };
  std::vector<Extra> extras;
  auto add = [&](const char* name, Extra e) {
    set.names.push_back(name);
    extras.push_back(e);
  };

  add("gamma_sq", Extra::GammaSq);
  const bool vehicle_form =
      id == SystemId::UnderwaterVehicle || c.id == ControllerId::WeightCompensation;
  switch (c.id) {
    case ControllerId::None:
    case ControllerId::WeightCompensation:
      if (vehicle_form) {
        add("p_sq", Extra::PSq);
        add("p_dot_gamma", Extra::PDotGamma);
      }
      break;
    case ControllerId::SteadyMotion:
      add("theta_sq", Extra::ThetaSq);
      add("gamma_dot_theta", Extra::GammaDotTheta);
      add("p_sq", Extra::PSq);
      add("p_dot_gamma", Extra::PDotGamma);
      add("p_dot_theta", Extra::PDotTheta);
      break;
    case ControllerId::DriftCorrection:
      add("d1_sq", Extra::D1Sq);
      add("d2_sq", Extra::D2Sq);
      add("gamma_dot_d1", Extra::GammaDotD1);
      add("gamma_dot_d2", Extra::GammaDotD2);
      add("d1_dot_d2", Extra::D1DotD2);
      add("p_dot_marker_normal", Extra::PDotMarkerNormal);
      break;
  }

  set.eval = [id, p, c, extras](const ReducedState& s) {
    std::vector<double> out;
    out.reserve(extras.size() + 1);
    out.push_back(closed_loop_energy(id, p, c, s));
    const Vec3 mom_p = legendre(p, s.xi).p;
    for (const Extra e : extras) {
      switch (e) {
        case Extra::GammaSq: out.push_back(s.gamma().squaredNorm()); break;
        case Extra::PSq: out.push_back(mom_p.squaredNorm()); break;
        case Extra::PDotGamma: out.push_back(mom_p.dot(s.gamma())); break;
        case Extra::ThetaSq: out.push_back(s.theta->squaredNorm()); break;
        case Extra::GammaDotTheta: out.push_back(s.gamma().dot(*s.theta)); break;
        case Extra::PDotTheta: out.push_back(mom_p.dot(*s.theta)); break;
        case Extra::D1Sq: out.push_back((*s.deltas)[0].spatial.squaredNorm()); break;
        case Extra::D2Sq: out.push_back((*s.deltas)[1].spatial.squaredNorm()); break;
        case Extra::GammaDotD1: out.push_back(s.gamma().dot((*s.deltas)[0].spatial)); break;
        case Extra::GammaDotD2: out.push_back(s.gamma().dot((*s.deltas)[1].spatial)); break;
        case Extra::D1DotD2:
          out.push_back((*s.deltas)[0].spatial.dot((*s.deltas)[1].spatial));
          break;
        case Extra::PDotMarkerNormal:
          out.push_back(mom_p.dot((*s.deltas)[0].spatial.cross((*s.deltas)[1].spatial)));
          break;
      }
    }
    return out;
  };
  return set;
}

Trajectory simulate(SystemId id, const InertiaParams& p, const Controller& c,
                    const ReducedState& initial, const IntegratorConfig& cfg) {
  if (!(cfg.step > 0.0) || !std::isfinite(cfg.step) || !std::isfinite(cfg.t_final) ||
      cfg.t_final < 0.0) {
    throw Error("integrator config must have step > 0 and t_final >= 0");
  }
  const long long n = std::llround(cfg.t_final / cfg.step);
  if (std::abs(static_cast<double>(n) * cfg.step - cfg.t_final) >
      1e-9 * std::max(1.0, cfg.t_final)) {
    throw Error("t_final must be a whole number of steps");
  }

  Trajectory traj;
  traj.layout = StateLayout::of(initial);
  const DiagnosticSet diag = conserved_quantities(id, p, c);
  traj.diagnostic_names = diag.names;

  const FlatRhs rhs = [&](double, const Eigen::VectorXd& y) {
    const ReducedState s = unpack_state(p, traj.layout, y);
    return pack_rates(traj.layout, closed_loop_rhs(id, p, c, s));
  };

  Eigen::VectorXd y = pack_state(p, initial);
  auto record = [&](double t) {
    const ReducedState s = unpack_state(p, traj.layout, y);
    traj.times.push_back(t);
    traj.states.push_back(s);
    traj.diagnostics.push_back(diag.eval(s));
  };
  record(0.0);
  for (long long i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * cfg.step;
    try {
      y = rk4_step(rhs, t, y, cfg.step);
    } catch (const NonFiniteState&) {
      std::ostringstream os;
      os << "state became non-finite during step starting at t = " << t;
      throw NonFiniteState(os.str());
    }
    record(static_cast<double>(i + 1) * cfg.step);
  }
  return traj;
}

namespace {

/// 4-point Lagrange value of the sampled velocities at mid-interval
/// (one-sided stencils at the ends, linear fallback for short runs).
AlgebraVector midpoint_velocity(const std::vector<ReducedState>& states, std::size_t i) {
  const std::size_t n = states.size();
  if (n < 4) {
    return 0.5 * (states[i].xi + states[i + 1].xi);
  }
  const std::size_t base = std::min(std::max<std::size_t>(i, 1) - 1, n - 4);
  const double tau = static_cast<double>(i - base) + 0.5;
  AlgebraVector out;
  for (int k = 0; k < 4; ++k) {
    double w = 1.0;
    for (int j = 0; j < 4; ++j) {
      if (j != k) w *= (tau - j) / static_cast<double>(k - j);
    }
    out = out + w * states[base + k].xi;
  }
  return out;
}

Mat3 polar_project(const Mat3& r) {
  Eigen::JacobiSVD<Mat3> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 flip = Mat3::Identity();
  flip(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0 ? -1.0 : 1.0;
  return svd.matrixU() * flip * svd.matrixV().transpose();
}

}  // namespace

Trajectory reconstruct(const Trajectory& traj, const SE3Element& s0) {
  Trajectory out = traj;
  out.poses.clear();
  if (traj.states.empty()) return out;
  validate_rotation(s0.rotation);

  SE3Element s = s0;
  out.poses.push_back(s);
  for (std::size_t i = 0; i + 1 < traj.states.size(); ++i) {
    const double h = traj.times[i + 1] - traj.times[i];
    const AlgebraVector xi0 = traj.states[i].xi;
    const AlgebraVector xim = midpoint_velocity(traj.states, i);
    const AlgebraVector xi1 = traj.states[i + 1].xi;

    auto slope = [](const Mat3& r, const AlgebraVector& xi) {
      return std::pair<Mat3, Vec3>(r * hat(xi.omega), r * xi.vel);
    };
    const auto k1 = slope(s.rotation, xi0);
    const auto k2 = slope(s.rotation + 0.5 * h * k1.first, xim);
    const auto k3 = slope(s.rotation + 0.5 * h * k2.first, xim);
    const auto k4 = slope(s.rotation + h * k3.first, xi1);

    s.rotation += (h / 6.0) * (k1.first + 2.0 * k2.first + 2.0 * k3.first + k4.first);
    s.translation += (h / 6.0) * (k1.second + 2.0 * k2.second + 2.0 * k3.second + k4.second);

    const Mat3 defect = s.rotation.transpose() * s.rotation - Mat3::Identity();
    if (defect.cwiseAbs().maxCoeff() > 1e-9) {
      s.rotation = polar_project(s.rotation);
    }
    out.poses.push_back(s);
  }
  return out;
}

Eigen::MatrixXd linearize(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                          const Eigen::VectorXd& eq, double eps, double eq_tol) {
  const Eigen::VectorXd r = f(eq);
  if (r.cwiseAbs().maxCoeff() > eq_tol) {
    std::ostringstream os;
    os << "point is not an equilibrium (|rhs| = " << r.cwiseAbs().maxCoeff() << ")";
    throw NotAnEquilibrium(os.str());
  }
  const Eigen::Index n = eq.size();
  Eigen::MatrixXd a(r.size(), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double step = eps * (1.0 + std::abs(eq(i)));
    Eigen::VectorXd yp = eq, ym = eq;
    yp(i) += step;
    ym(i) -= step;
    a.col(i) = (f(yp) - f(ym)) / (2.0 * step);
  }
  return a;
}

Eigen::MatrixXd linearize_closed_loop(SystemId id, const InertiaParams& p,
                                      const Controller& c, const ReducedState& eq,
                                      double eps, double eq_tol) {
  const StateLayout layout = StateLayout::of(eq);
  auto f = [&](const Eigen::VectorXd& y) {
    return pack_rates(layout, closed_loop_rhs(id, p, c, unpack_state(p, layout, y)));
  };
  return linearize(f, pack_state(p, eq), eps, eq_tol);
}

Eigen::VectorXcd eigenvalues(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw Error("eigenvalues: matrix must be square");
  if (a.rows() > 20) throw Error("eigenvalues: dimension exceeds the supported bound (20)");
  Eigen::EigenSolver<Eigen::MatrixXd> es(a);
  if (es.info() != Eigen::Success) {
    throw NoConvergence("eigenvalue iteration failed to converge");
  }
  return es.eigenvalues();
}

StabilityReport stability_report(SystemId id, const InertiaParams& p, const Controller& c,
                                 double unstable_tol, double stable_tol) {
  const ReducedState eq = equilibrium_state(id, p, c);
  const Eigen::MatrixXd a = linearize_closed_loop(id, p, c, eq);

  StabilityReport rep;
  const Eigen::VectorXcd ev = eigenvalues(a);
  rep.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  rep.max_real_part = ev.real().maxCoeff();

  // Second variation of the conserved energy on the level set of the other
  // invariants: project Hess(E - sum_j lambda_j C_j) onto the tangent space,
  // with multipliers from least squares on the gradients.
  const StateLayout layout = StateLayout::of(eq);
  const DiagnosticSet diag = conserved_quantities(id, p, c);
  const Eigen::VectorXd y0 = pack_state(p, eq);
  const int n = static_cast<int>(y0.size());
  const int k = static_cast<int>(diag.names.size()) - 1;

  auto value = [&](int which, const Eigen::VectorXd& y) {
    return diag.eval(unpack_state(p, layout, y))[which];
  };
  auto fd_grad = [&](int which) {
    Eigen::VectorXd g(n);
    for (int i = 0; i < n; ++i) {
      const double step = 1e-6 * (1.0 + std::abs(y0(i)));
      Eigen::VectorXd yp = y0, ym = y0;
      yp(i) += step;
      ym(i) -= step;
      g(i) = (value(which, yp) - value(which, ym)) / (2.0 * step);
    }
    return g;
  };
  auto fd_hess = [&](int which) {
    Eigen::MatrixXd hs(n, n);
    const auto step = [&](int i) { return 1e-4 * (1.0 + std::abs(y0(i))); };
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        Eigen::VectorXd ypp = y0, ypm = y0, ymp = y0, ymm = y0;
        ypp(i) += step(i); ypp(j) += step(j);
        ypm(i) += step(i); ypm(j) -= step(j);
        ymp(i) -= step(i); ymp(j) += step(j);
        ymm(i) -= step(i); ymm(j) -= step(j);
        hs(i, j) = hs(j, i) = (value(which, ypp) - value(which, ypm) - value(which, ymp) +
                               value(which, ymm)) /
                              (4.0 * step(i) * step(j));
      }
    }
    return hs;
  };

  const Eigen::VectorXd grad_e = fd_grad(0);
  Eigen::MatrixXd grads_c(n, k);
  for (int j = 0; j < k; ++j) grads_c.col(j) = fd_grad(j + 1);

  Eigen::MatrixXd w = fd_hess(0);
  double critical_residual = grad_e.norm();
  if (k > 0) {
    const Eigen::VectorXd lambda =
        grads_c.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(grad_e);
    critical_residual = (grad_e - grads_c * lambda).norm();
    for (int j = 0; j < k; ++j) w -= lambda(j) * fd_hess(j + 1);
  }

  Eigen::MatrixXd tangent = Eigen::MatrixXd::Identity(n, n);
  if (k > 0) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(grads_c, Eigen::ComputeFullU);
    const double smax = svd.singularValues()(0);
    int rank = 0;
    for (int j = 0; j < svd.singularValues().size(); ++j) {
      if (svd.singularValues()(j) > 1e-10 * std::max(1.0, smax)) ++rank;
    }
    tangent = svd.matrixU().rightCols(n - rank);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sv(tangent.transpose() * w * tangent);
  rep.second_variation_min = sv.eigenvalues().minCoeff();
  rep.energy_definite = rep.second_variation_min > 1e-8;

  {
    std::ostringstream os;
    os << "critical-point residual |grad E - sum lambda grad C| = " << critical_residual;
    rep.notes.push_back(os.str());
  }
  if (c.id == ControllerId::SteadyMotion || c.id == ControllerId::DriftCorrection) {
    for (const std::string& wmsg : gain_warnings(p, c.gains)) rep.notes.push_back(wmsg);
  }

  if (rep.max_real_part > unstable_tol) {
    rep.classification = StabilityClass::Unstable;
  } else if (std::abs(rep.max_real_part) <= stable_tol && rep.energy_definite) {
    rep.classification = StabilityClass::SpectrallyStable;
    rep.notes.push_back(
        "conservative closed loop: spectrum is marginal (all real parts ~0) and the "
        "restricted energy is positive definite");
  } else {
    rep.classification = StabilityClass::Marginal;
    rep.notes.push_back(
        "spectrum is not conclusively unstable and the restricted energy is not "
        "positive definite; treat as unresolved");
  }
  return rep;
}

}  // namespace epshape
