#include "epshape/poisson.hpp"

#include <random>

namespace epshape {

namespace {

void require_same_arity(const GenericPhase& z, const GenericGradient& f,
                        const GenericGradient& h) {
  if (f.r3.size() != z.r3.size() || h.r3.size() != z.r3.size() ||
      f.r4.size() != z.r4.size() || h.r4.size() != z.r4.size()) {
    throw ArityMismatch("gradient slots do not match the phase point's slots");
  }
}

/// Required slot layout for a bracket id: {gamma, d1+d2}.
struct Arity {
  bool gamma = false;
  bool markers = false;
};

Arity arity_of(BracketId id) {
  switch (id) {
    case BracketId::Se3:
      return {false, false};
    case BracketId::Se3R3:
      return {true, false};
    case BracketId::Drift:
      return {true, true};
  }
  throw Error("unknown bracket id");
}

GenericPhase to_generic(BracketId id, const PhasePoint& z) {
  const Arity a = arity_of(id);
  if (z.gamma.has_value() != a.gamma || z.d1.has_value() != a.markers ||
      z.d2.has_value() != a.markers) {
    throw ArityMismatch("phase point slots do not match the bracket");
  }
  GenericPhase g{z.pi, z.p, {}, {}};
  if (z.gamma) g.r3.push_back(*z.gamma);
  if (z.d1) g.r4.push_back(*z.d1);
  if (z.d2) g.r4.push_back(*z.d2);
  return g;
}

GenericGradient to_generic(BracketId id, const GradientEval& e) {
  const Arity a = arity_of(id);
  if (e.d_gamma.has_value() != a.gamma || e.d_d1.has_value() != a.markers ||
      e.d_d2.has_value() != a.markers) {
    throw ArityMismatch("gradient slots do not match the bracket");
  }
  GenericGradient g{e.d_pi, e.d_p, {}, {}};
  if (e.d_gamma) g.r3.push_back(*e.d_gamma);
  if (e.d_d1) g.r4.push_back(*e.d_d1);
  if (e.d_d2) g.r4.push_back(*e.d_d2);
  return g;
}

PhasePoint from_generic(BracketId id, const GenericPhase& g) {
  PhasePoint z;
  z.pi = g.pi;
  z.p = g.p;
  const Arity a = arity_of(id);
  if (a.gamma) z.gamma = g.r3.at(0);
  if (a.markers) {
    z.d1 = g.r4.at(0);
    z.d2 = g.r4.at(1);
  }
  return z;
}

}  // namespace

double bracket_generic(const GenericPhase& z, const GenericGradient& f,
                       const GenericGradient& h) {
  require_same_arity(z, f, h);
  double out = -z.pi.dot(f.d_pi.cross(h.d_pi)) -
               z.p.dot(f.d_pi.cross(h.d_p) - h.d_pi.cross(f.d_p));
  for (std::size_t i = 0; i < z.r3.size(); ++i) {
    out -= z.r3[i].dot(f.d_pi.cross(h.r3[i]) - h.d_pi.cross(f.r3[i]));
  }
  for (std::size_t i = 0; i < z.r4.size(); ++i) {
    const Vec3& a = z.r4[i].spatial;
    out -= a.dot(f.d_pi.cross(h.r4[i].spatial) - h.d_pi.cross(f.r4[i].spatial));
    out -= h.r4[i].scalar * a.dot(f.d_p) - f.r4[i].scalar * a.dot(h.d_p);
  }
  return out;
}

GenericPhase bracket_rhs_generic(const GenericPhase& z, const GenericGradient& h) {
  if (h.r3.size() != z.r3.size() || h.r4.size() != z.r4.size()) {
    throw ArityMismatch("gradient slots do not match the phase point's slots");
  }
  GenericPhase out;
  out.pi = z.pi.cross(h.d_pi) + z.p.cross(h.d_p);
  out.p = z.p.cross(h.d_pi);
  for (std::size_t i = 0; i < z.r3.size(); ++i) {
    out.pi += z.r3[i].cross(h.r3[i]);
    out.r3.push_back(z.r3[i].cross(h.d_pi));
  }
  for (std::size_t i = 0; i < z.r4.size(); ++i) {
    const Vec3& a = z.r4[i].spatial;
    out.pi += a.cross(h.r4[i].spatial);
    out.p -= h.r4[i].scalar * a;
    out.r4.push_back({a.cross(h.d_pi), a.dot(h.d_p)});
  }
  return out;
}

double bracket_se3(const PhasePoint& z, const GradientEval& f, const GradientEval& h) {
  return bracket(BracketId::Se3, z, f, h);
}

double bracket_se3_r3(const PhasePoint& z, const GradientEval& f, const GradientEval& h) {
  return bracket(BracketId::Se3R3, z, f, h);
}

double bracket_drift(const PhasePoint& z, const GradientEval& f, const GradientEval& h) {
  return bracket(BracketId::Drift, z, f, h);
}

double bracket(BracketId id, const PhasePoint& z, const GradientEval& f,
               const GradientEval& h) {
  return bracket_generic(to_generic(id, z), to_generic(id, f), to_generic(id, h));
}

PhasePoint hamiltonian_rhs(BracketId id, const PhasePoint& z, const GradientEval& grad_h) {
  return from_generic(id, bracket_rhs_generic(to_generic(id, z), to_generic(id, grad_h)));
}

std::vector<CasimirFn> drift_casimirs() {
  auto zero_grad = [](const PhasePoint&) {
    GradientEval g;
    g.d_gamma = Vec3::Zero();
    g.d_d1 = Vec4{};
    g.d_d2 = Vec4{};
    return g;
  };
  std::vector<CasimirFn> cs;
  cs.push_back({"p_dot_marker_normal",
                [](const PhasePoint& z) { return z.p.dot(z.d1->spatial.cross(z.d2->spatial)); },
                [zero_grad](const PhasePoint& z) {
                  GradientEval g = zero_grad(z);
                  g.d_p = z.d1->spatial.cross(z.d2->spatial);
                  g.d_d1->spatial = z.d2->spatial.cross(z.p);
                  g.d_d2->spatial = z.p.cross(z.d1->spatial);
                  return g;
                }});
  cs.push_back({"gamma_sq", [](const PhasePoint& z) { return z.gamma->squaredNorm(); },
                [zero_grad](const PhasePoint& z) {
                  GradientEval g = zero_grad(z);
                  g.d_gamma = 2.0 * *z.gamma;
                  return g;
                }});
  cs.push_back({"d1_sq", [](const PhasePoint& z) { return z.d1->spatial.squaredNorm(); },
                [zero_grad](const PhasePoint& z) {
                  GradientEval g = zero_grad(z);
                  g.d_d1->spatial = 2.0 * z.d1->spatial;
                  return g;
                }});
  cs.push_back({"d2_sq", [](const PhasePoint& z) { return z.d2->spatial.squaredNorm(); },
                [zero_grad](const PhasePoint& z) {
                  GradientEval g = zero_grad(z);
                  g.d_d2->spatial = 2.0 * z.d2->spatial;
                  return g;
                }});
  cs.push_back({"gamma_dot_d1",
                [](const PhasePoint& z) { return z.gamma->dot(z.d1->spatial); },
                [zero_grad](const PhasePoint& z) {
                  GradientEval g = zero_grad(z);
                  g.d_gamma = z.d1->spatial;
                  g.d_d1->spatial = *z.gamma;
                  return g;
                }});
  cs.push_back({"gamma_dot_d2",
                [](const PhasePoint& z) { return z.gamma->dot(z.d2->spatial); },
                [zero_grad](const PhasePoint& z) {
                  GradientEval g = zero_grad(z);
                  g.d_gamma = z.d2->spatial;
                  g.d_d2->spatial = *z.gamma;
                  return g;
                }});
  cs.push_back({"d1_dot_d2",
                [](const PhasePoint& z) { return z.d1->spatial.dot(z.d2->spatial); },
                [zero_grad](const PhasePoint& z) {
                  GradientEval g = zero_grad(z);
                  g.d_d1->spatial = z.d2->spatial;
                  g.d_d2->spatial = z.d1->spatial;
                  return g;
                }});
  return cs;
}

namespace {

int flat_dim(const PhasePoint& z) {
  return 6 + (z.gamma ? 3 : 0) + (z.d1 ? 4 : 0) + (z.d2 ? 4 : 0);
}

Eigen::VectorXd flatten(const PhasePoint& z) {
  Eigen::VectorXd v(flat_dim(z));
  int at = 0;
  v.segment<3>(at) = z.pi;
  at += 3;
  v.segment<3>(at) = z.p;
  at += 3;
  if (z.gamma) {
    v.segment<3>(at) = *z.gamma;
    at += 3;
  }
  for (const auto* d : {&z.d1, &z.d2}) {
    if (*d) {
      v.segment<3>(at) = (*d)->spatial;
      v(at + 3) = (*d)->scalar;
      at += 4;
    }
  }
  return v;
}

PhasePoint unflatten(const PhasePoint& like, const Eigen::VectorXd& v) {
  PhasePoint z;
  int at = 0;
  z.pi = v.segment<3>(at);
  at += 3;
  z.p = v.segment<3>(at);
  at += 3;
  if (like.gamma) {
    z.gamma = Vec3(v.segment<3>(at));
    at += 3;
  }
  if (like.d1) {
    z.d1 = Vec4{v.segment<3>(at), v(at + 3)};
    at += 4;
  }
  if (like.d2) {
    z.d2 = Vec4{v.segment<3>(at), v(at + 3)};
    at += 4;
  }
  return z;
}

GradientEval gradient_like(const PhasePoint& like, const Eigen::VectorXd& v) {
  const PhasePoint z = unflatten(like, v);
  GradientEval g;
  g.d_pi = z.pi;
  g.d_p = z.p;
  if (like.gamma) g.d_gamma = z.gamma;
  if (like.d1) g.d_d1 = z.d1;
  if (like.d2) g.d_d2 = z.d2;
  return g;
}

}  // namespace

double jacobi_probe(const BracketFn& br, const PhasePoint& z, ProbeFamily family,
                    unsigned seed, double fd_eps) {
  const int n = flat_dim(z);
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);

  // Gradient of a test function at a flat point: A x for quadratics
  // (A symmetric), the constant c for linear functions.
  auto draw = [&]() {
    Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(n, n, [&]() { return dist(rng); });
    if (family == ProbeFamily::Quadratic) {
      a = (0.5 * (a + a.transpose())).eval();
    }
    return a;
  };
  auto grad_at = [&](const Eigen::MatrixXd& a, const Eigen::VectorXd& x) {
    return family == ProbeFamily::Quadratic ? Eigen::VectorXd(a * x)
                                            : Eigen::VectorXd(a.col(0));
  };

  const Eigen::VectorXd z0 = flatten(z);
  double worst = 0.0;
  for (int trial = 0; trial < 2; ++trial) {
    const std::array<Eigen::MatrixXd, 3> fs = {draw(), draw(), draw()};

    auto pair_bracket = [&](int gi, int hi, const Eigen::VectorXd& x) {
      const PhasePoint zz = unflatten(z, x);
      return br(zz, gradient_like(z, grad_at(fs[gi], x)),
                gradient_like(z, grad_at(fs[hi], x)));
    };
    // Gradient of x -> {g, h}(x) by central differences.
    auto inner_grad = [&](int gi, int hi) {
      Eigen::VectorXd grad(n);
      for (int i = 0; i < n; ++i) {
        const double step = fd_eps * (1.0 + std::abs(z0(i)));
        Eigen::VectorXd xp = z0, xm = z0;
        xp(i) += step;
        xm(i) -= step;
        grad(i) = (pair_bracket(gi, hi, xp) - pair_bracket(gi, hi, xm)) / (2.0 * step);
      }
      return grad;
    };

    double sum = 0.0;
    const int idx[3][3] = {{0, 1, 2}, {1, 2, 0}, {2, 0, 1}};
    for (const auto& t : idx) {
      sum += br(z, gradient_like(z, grad_at(fs[t[0]], z0)),
                gradient_like(z, inner_grad(t[1], t[2])));
    }
    worst = std::max(worst, std::abs(sum));
  }
  return worst;
}

double jacobi_probe(BracketId id, const PhasePoint& z, ProbeFamily family, unsigned seed,
                    double fd_eps) {
  to_generic(id, z);  // arity check up front
  return jacobi_probe(
      [id](const PhasePoint& zz, const GradientEval& f, const GradientEval& h) {
        return bracket(id, zz, f, h);
      },
      z, family, seed, fd_eps);
}

}  // namespace epshape
