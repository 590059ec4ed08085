#include "epshape/poisson.hpp"

#include <gtest/gtest.h>

#include "epshape/control.hpp"
#include "test_util.hpp"

namespace epshape {
namespace {

using test::Draw;
using test::sup;
using test::top_state;
using test::vehicle_state;

const Vec3 e1 = Vec3::UnitX();
const Vec3 e2 = Vec3::UnitY();
const Vec3 e3 = Vec3::UnitZ();

PhasePoint point(Draw& d, BracketId id) {
  PhasePoint z;
  z.pi = d.vec3();
  z.p = d.vec3();
  if (id != BracketId::Se3) z.gamma = d.vec3();
  if (id == BracketId::Drift) {
    z.d1 = d.vec4();
    z.d2 = d.vec4();
  }
  return z;
}

GradientEval grad(Draw& d, BracketId id) {
  GradientEval g;
  g.d_pi = d.vec3();
  g.d_p = d.vec3();
  if (id != BracketId::Se3) g.d_gamma = d.vec3();
  if (id == BracketId::Drift) {
    g.d_d1 = d.vec4();
    g.d_d2 = d.vec4();
  }
  return g;
}

GradientEval combine(double a, const GradientEval& f, double b, const GradientEval& g) {
  GradientEval out;
  out.d_pi = a * f.d_pi + b * g.d_pi;
  out.d_p = a * f.d_p + b * g.d_p;
  if (f.d_gamma) out.d_gamma = a * *f.d_gamma + b * *g.d_gamma;
  if (f.d_d1) out.d_d1 = a * *f.d_d1 + b * *g.d_d1;
  if (f.d_d2) out.d_d2 = a * *f.d_d2 + b * *g.d_d2;
  return out;
}

PhasePoint to_phase(const InertiaParams& p, const ReducedState& s, bool with_gamma,
                    bool with_markers) {
  PhasePoint z;
  const MomentumCovector m = legendre(p, s.xi);
  z.pi = m.pi;
  z.p = m.p;
  if (with_gamma) z.gamma = s.gamma();
  if (with_markers) {
    z.d1 = (*s.deltas)[0];
    z.d2 = (*s.deltas)[1];
  }
  return z;
}

TEST(BracketSe3, ClosedFormValues) {
  Draw d(41);
  const PhasePoint z = point(d, BracketId::Se3);
  const GradientEval f = grad(d, BracketId::Se3);
  EXPECT_EQ(bracket_se3(z, f, f), 0.0);

  PhasePoint at;
  at.pi = e3;
  GradientEval dpi1, dpi2;
  dpi1.d_pi = e1;
  dpi2.d_pi = e2;
  EXPECT_DOUBLE_EQ(bracket_se3(at, dpi1, dpi2), -1.0);

  // |P|^2 is a Casimir of the impulse-only bracket.
  for (int i = 0; i < 50; ++i) {
    const PhasePoint zz = point(d, BracketId::Se3);
    GradientEval c;
    c.d_p = 2.0 * zz.p;
    EXPECT_NEAR(bracket_se3(zz, c, grad(d, BracketId::Se3)), 0.0, 1e-12);
  }
}

TEST(Brackets, AntisymmetricAndBilinear) {
  Draw d(42);
  for (BracketId id : {BracketId::Se3, BracketId::Se3R3, BracketId::Drift}) {
    for (int i = 0; i < 30; ++i) {
      const PhasePoint z = point(d, id);
      const GradientEval f = grad(d, id), g = grad(d, id), h = grad(d, id);
      EXPECT_NEAR(bracket(id, z, f, h) + bracket(id, z, h, f), 0.0, 1e-14);

      const double a = d.num(), b = d.num();
      EXPECT_NEAR(bracket(id, z, combine(a, f, b, g), h),
                  a * bracket(id, z, f, h) + b * bracket(id, z, g, h), 1e-12);
    }
  }
}

TEST(BracketSe3R3, NumericallyVerifiedCasimirs) {
  Draw d(43);
  for (int i = 0; i < 50; ++i) {
    const PhasePoint z = point(d, BracketId::Se3R3);
    const GradientEval h = grad(d, BracketId::Se3R3);

    GradientEval gamma_sq;
    gamma_sq.d_gamma = 2.0 * *z.gamma;
    EXPECT_NEAR(bracket_se3_r3(z, gamma_sq, h), 0.0, 1e-12);

    GradientEval p_sq;
    p_sq.d_p = 2.0 * z.p;
    p_sq.d_gamma = Vec3::Zero();
    EXPECT_NEAR(bracket_se3_r3(z, p_sq, h), 0.0, 1e-12);

    GradientEval p_gamma;
    p_gamma.d_p = *z.gamma;
    p_gamma.d_gamma = z.p;
    EXPECT_NEAR(bracket_se3_r3(z, p_gamma, h), 0.0, 1e-12);
  }
}

TEST(BracketDrift, ListedCasimirsAnnihilate) {
  const std::vector<CasimirFn> cs = drift_casimirs();
  ASSERT_EQ(cs.size(), 7u);

  Draw d(44);
  for (const CasimirFn& c : cs) {
    for (int i = 0; i < 5; ++i) {
      const PhasePoint z = point(d, BracketId::Drift);
      const GradientEval dc = c.gradient(z);
      for (int k = 0; k < 50; ++k) {
        EXPECT_NEAR(bracket_drift(z, dc, grad(d, BracketId::Drift)), 0.0, 1e-12)
            << c.name;
      }
    }
  }
}

TEST(HamiltonianRhs, AgreesWithCoordinateBrackets) {
  Draw d(45);
  const PhasePoint z = point(d, BracketId::Se3R3);
  const GradientEval h = grad(d, BracketId::Se3R3);
  const PhasePoint zdot = hamiltonian_rhs(BracketId::Se3R3, z, h);

  for (int i = 0; i < 3; ++i) {
    GradientEval coord;
    coord.d_gamma = Vec3::Zero();
    coord.d_pi = Vec3::Unit(i);
    EXPECT_NEAR(zdot.pi(i), bracket_se3_r3(z, coord, h), 1e-14);

    coord.d_pi = Vec3::Zero();
    coord.d_p = Vec3::Unit(i);
    EXPECT_NEAR(zdot.p(i), bracket_se3_r3(z, coord, h), 1e-14);

    coord.d_p = Vec3::Zero();
    coord.d_gamma = Vec3::Unit(i);
    EXPECT_NEAR((*zdot.gamma)(i), bracket_se3_r3(z, coord, h), 1e-14);
  }
}

TEST(BracketDynamics, ReproducesVehicleEquations) {
  const InertiaParams p = InertiaParams::defaults();
  Draw d(46);
  for (int i = 0; i < 200; ++i) {
    const ReducedState s = vehicle_state(d);
    const StateRates r = ep_rhs_underwater_vehicle(p, s);

    GradientEval dh;
    dh.d_pi = s.xi.omega;
    dh.d_p = s.xi.vel;
    dh.d_gamma = p.mgl() * p.com_dir();
    const PhasePoint zdot = hamiltonian_rhs(BracketId::Se3R3, to_phase(p, s, true, false), dh);

    EXPECT_LT(sup(zdot.pi - r.mom.pi), 1e-10);
    EXPECT_LT(sup(zdot.p - r.mom.p), 1e-10);
    EXPECT_LT(sup(*zdot.gamma - *r.a_r3), 1e-10);
  }
}

TEST(BracketDynamics, ReproducesHeavyTopEquations) {
  const InertiaParams p = InertiaParams::defaults();
  Draw d(47);
  for (int i = 0; i < 200; ++i) {
    const ReducedState s = top_state(d);
    const StateRates r = ep_rhs_heavy_top(p, s);
    const MomentumCovector m = legendre(p, s.xi);

    GenericPhase z;
    z.pi = m.pi;
    z.p = m.p;
    z.r4 = {*s.a_r4};
    GenericGradient dh;
    dh.d_pi = s.xi.omega;
    dh.d_p = s.xi.vel;
    dh.r4 = {Vec4{p.mgl() * p.com_dir(), p.total_mass() * p.gravity()}};
    const GenericPhase zdot = bracket_rhs_generic(z, dh);

    EXPECT_LT(sup(zdot.pi - r.mom.pi), 1e-10);
    EXPECT_LT(sup(zdot.p - r.mom.p), 1e-10);
    EXPECT_LT(sup(zdot.r4[0] - *r.a_r4), 1e-10);
  }
}

TEST(BracketDynamics, ReproducesCompensatedLoop) {
  const InertiaParams p = InertiaParams::defaults();
  Controller comp;
  comp.id = ControllerId::WeightCompensation;
  Draw d(48);
  for (int i = 0; i < 200; ++i) {
    const ReducedState s = top_state(d);
    const StateRates r = closed_loop_rhs(SystemId::HeavyTop, p, comp, s);
    const MomentumCovector m = legendre(p, s.xi);

    // The compensation removes the height term from the Hamiltonian.
    GenericPhase z;
    z.pi = m.pi;
    z.p = m.p;
    z.r4 = {*s.a_r4};
    GenericGradient dh;
    dh.d_pi = s.xi.omega;
    dh.d_p = s.xi.vel;
    dh.r4 = {Vec4{p.mgl() * p.com_dir(), 0.0}};
    const GenericPhase zdot = bracket_rhs_generic(z, dh);

    EXPECT_LT(sup(zdot.pi - r.mom.pi), 1e-10);
    EXPECT_LT(sup(zdot.p - r.mom.p), 1e-10);
    EXPECT_LT(sup(zdot.r4[0] - *r.a_r4), 1e-10);
  }
}

TEST(BracketDynamics, ReproducesSteadyLoop) {
  const InertiaParams p = InertiaParams::defaults();
  Controller c;
  c.id = ControllerId::SteadyMotion;
  c.gains.alpha = 25.0;
  c.gains.beta = 10.0;
  c.desired = DesiredMotion(exp_so3(0.3 * e1), Vec3(0.8, 0.2, 0.1));
  const ShapedGradSteady sg = shaped_potential_steady_grad(p, c.gains, *c.desired);

  Draw d(49);
  for (int i = 0; i < 200; ++i) {
    const ReducedState s = vehicle_state(d, true);
    const StateRates r = closed_loop_rhs(SystemId::UnderwaterVehicle, p, c, s);
    const MomentumCovector m = legendre(p, s.xi);

    GenericPhase z;
    z.pi = m.pi;
    z.p = m.p;
    z.r3 = {*s.a_r3, *s.theta};
    GenericGradient dh;
    dh.d_pi = s.xi.omega;
    dh.d_p = s.xi.vel;
    dh.r3 = {p.mgl() * p.com_dir() + sg.d_gamma, sg.d_theta};
    const GenericPhase zdot = bracket_rhs_generic(z, dh);

    EXPECT_LT(sup(zdot.pi - r.mom.pi), 1e-10);
    EXPECT_LT(sup(zdot.p - r.mom.p), 1e-10);
    EXPECT_LT(sup(zdot.r3[0] - *r.a_r3), 1e-10);
    EXPECT_LT(sup(zdot.r3[1] - *r.theta), 1e-10);
  }
}

TEST(BracketDynamics, ReproducesDriftLoop) {
  const InertiaParams p = InertiaParams::defaults();
  Controller c;
  c.id = ControllerId::DriftCorrection;
  c.gains.alpha = 25.0;
  c.gains.beta = 10.0;
  c.gains.k_matrix << 2.0, 0.5, 0.5, 1.0;
  c.desired = DesiredMotion(exp_so3(0.3 * e1), Vec3(0.8, 0.2, 0.1));

  Draw d(50);
  for (int i = 0; i < 200; ++i) {
    const ReducedState s = vehicle_state(d, false, true);
    const StateRates r = closed_loop_rhs(SystemId::UnderwaterVehicle, p, c, s);
    const ShapedGradDrift gd =
        shaped_potential_drift_grad(p, c.gains, *c.desired, *s.deltas);

    GradientEval dh;
    dh.d_pi = s.xi.omega;
    dh.d_p = s.xi.vel;
    dh.d_gamma = p.mgl() * p.com_dir() + gd.d_gamma;
    dh.d_d1 = gd.d_d1;
    dh.d_d2 = gd.d_d2;
    const PhasePoint zdot = hamiltonian_rhs(BracketId::Drift, to_phase(p, s, true, true), dh);

    EXPECT_LT(sup(zdot.pi - r.mom.pi), 1e-10);
    EXPECT_LT(sup(zdot.p - r.mom.p), 1e-10);
    EXPECT_LT(sup(*zdot.gamma - *r.a_r3), 1e-10);
    EXPECT_LT(sup(*zdot.d1 - (*r.deltas)[0]), 1e-10);
    EXPECT_LT(sup(*zdot.d2 - (*r.deltas)[1]), 1e-10);
  }
}

TEST(Brackets, RejectMismatchedArity) {
  Draw d(51);
  const PhasePoint bare = point(d, BracketId::Se3);
  const GradientEval f3 = grad(d, BracketId::Se3R3);
  EXPECT_THROW(bracket(BracketId::Se3R3, bare, f3, f3), ArityMismatch);

  PhasePoint partial = point(d, BracketId::Drift);
  partial.d2.reset();
  EXPECT_THROW(hamiltonian_rhs(BracketId::Drift, partial, grad(d, BracketId::Drift)),
               ArityMismatch);

  GenericPhase z;
  z.r3 = {d.vec3()};
  GenericGradient g;  // no r3 slot
  EXPECT_THROW(bracket_generic(z, g, g), ArityMismatch);
}

TEST(JacobiProbe, QuadraticFamilyNearZero) {
  Draw d(52);
  for (BracketId id : {BracketId::Se3, BracketId::Se3R3, BracketId::Drift}) {
    for (int i = 0; i < 20; ++i) {
      EXPECT_LT(jacobi_probe(id, point(d, id), ProbeFamily::Quadratic, 90 + i), 1e-6);
    }
  }
}

TEST(JacobiProbe, LinearFamilyExact) {
  // Linear test functions make the inner central difference exact for any
  // step, so a unit step leaves only accumulation rounding.
  Draw d(53);
  for (BracketId id : {BracketId::Se3, BracketId::Se3R3, BracketId::Drift}) {
    for (int i = 0; i < 10; ++i) {
      EXPECT_LT(jacobi_probe(id, point(d, id), ProbeFamily::Linear, 70 + i, 1.0),
                1e-12);
    }
  }
}

TEST(JacobiProbe, FlagsPerturbedBracket) {
  // Scale the advected-slot coupling by 1.5; the result is still antisymmetric
  // and bilinear but no longer a Poisson bracket.
  const BracketFn warped = [](const PhasePoint& z, const GradientEval& f,
                              const GradientEval& h) {
    const double extra =
        -0.5 * z.gamma->dot(f.d_pi.cross(*h.d_gamma) - h.d_pi.cross(*f.d_gamma));
    return bracket_se3_r3(z, f, h) + extra;
  };
  Draw d(54);
  double worst = 0.0;
  for (int i = 0; i < 5; ++i) {
    worst = std::max(worst,
                     jacobi_probe(warped, point(d, BracketId::Se3R3),
                                  ProbeFamily::Quadratic, 60 + i));
  }
  EXPECT_GT(worst, 1e-3);
}

}  // namespace
}  // namespace epshape
