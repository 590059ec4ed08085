#pragma once

#include <functional>
#include <vector>

#include "epshape/types.hpp"

namespace epshape {

/// Point on the dual space the brackets live on: impulses plus whichever
/// advected slots the chosen bracket carries.
struct PhasePoint {
  Vec3 pi = Vec3::Zero();
  Vec3 p = Vec3::Zero();
  std::optional<Vec3> gamma;
  std::optional<Vec4> d1;
  std::optional<Vec4> d2;
};

/// Gradient of a function at a PhasePoint, same slot layout.
struct GradientEval {
  Vec3 d_pi = Vec3::Zero();
  Vec3 d_p = Vec3::Zero();
  std::optional<Vec3> d_gamma;
  std::optional<Vec4> d_d1;
  std::optional<Vec4> d_d2;
};

/// The shipped bracket structures:
///  - Se3: impulses only.
///  - Se3R3: impulses plus one advected 3-vector (gamma).
///  - Drift: impulses, gamma, and two advected 4-vectors (drift markers).
enum class BracketId { Se3, Se3R3, Drift };

/// Extension point: impulses plus arbitrarily many advected 3- and 4-vector
/// slots. The named brackets are instantiations of this one form.
struct GenericPhase {
  Vec3 pi = Vec3::Zero();
  Vec3 p = Vec3::Zero();
  std::vector<Vec3> r3;
  std::vector<Vec4> r4;
};
struct GenericGradient {
  Vec3 d_pi = Vec3::Zero();
  Vec3 d_p = Vec3::Zero();
  std::vector<Vec3> r3;
  std::vector<Vec4> r4;
};

/// Minus Lie-Poisson bracket with advected slots:
///   -Pi.(f_Pi x h_Pi) - P.(f_Pi x h_P - h_Pi x f_P)
///   - sum_a a.(f_Pi x h_a - h_Pi x f_a)                        (3-vector slots)
///   - sum_A [A.(f_Pi x h_A - h_Pi x f_A) + h_A4 (A.f_P) - f_A4 (A.h_P)]
/// Slot counts of z, f, h must agree (ArityMismatch).
double bracket_generic(const GenericPhase& z, const GenericGradient& f,
                       const GenericGradient& h);

/// Coordinate rates {z, h} of the generic bracket:
///   Pi' = Pi x h_Pi + P x h_P + sum a x h_a + sum A x h_A,
///   P'  = P x h_Pi - sum h_A4 A,
///   a'  = a x h_Pi,   A' = (A x h_Pi, A . h_P).
GenericPhase bracket_rhs_generic(const GenericPhase& z, const GenericGradient& h);

/// Named instantiations. The phase point and both gradients must carry
/// exactly the slots the bracket id requires (ArityMismatch otherwise).
double bracket_se3(const PhasePoint& z, const GradientEval& f, const GradientEval& h);
double bracket_se3_r3(const PhasePoint& z, const GradientEval& f, const GradientEval& h);
double bracket_drift(const PhasePoint& z, const GradientEval& f, const GradientEval& h);

double bracket(BracketId id, const PhasePoint& z, const GradientEval& f,
               const GradientEval& h);

/// Hamiltonian vector field of grad_h at z for the chosen bracket, as
/// coordinate rates in the same layout as z.
PhasePoint hamiltonian_rhs(BracketId id, const PhasePoint& z, const GradientEval& grad_h);

/// A conserved function of a bracket with its analytic gradient.
struct CasimirFn {
  std::string name;
  std::function<double(const PhasePoint&)> value;
  std::function<GradientEval(const PhasePoint&)> gradient;
};

/// The seven Casimirs of the drift bracket: P.(D1 x D2), |Gamma|^2, |D1|^2,
/// |D2|^2, Gamma.D1, Gamma.D2, D1.D2 (spatial parts throughout).
std::vector<CasimirFn> drift_casimirs();

using BracketFn =
    std::function<double(const PhasePoint&, const GradientEval&, const GradientEval&)>;

/// Which family of test functions the Jacobi probe draws.
enum class ProbeFamily { Quadratic, Linear };

/// Max |{f,{g,h}} + {g,{h,f}} + {h,{f,g}}| at z over a seeded family of test
/// functions with analytic gradients; the inner brackets' gradients come from
/// central differences with step fd_eps * (1 + |z_i|). Quadratic functions
/// land below ~1e-6 for a true bracket (difference error), linear ones below
/// ~1e-12.
double jacobi_probe(BracketId id, const PhasePoint& z,
                    ProbeFamily family = ProbeFamily::Quadratic, unsigned seed = 42,
                    double fd_eps = 1e-5);

/// Probe an arbitrary bracket evaluator (test hook for perturbed
/// coefficients); slot layout taken from z.
double jacobi_probe(const BracketFn& br, const PhasePoint& z,
                    ProbeFamily family = ProbeFamily::Quadratic, unsigned seed = 42,
                    double fd_eps = 1e-5);

}  // namespace epshape
