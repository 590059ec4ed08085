#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "epshape/control.hpp"
#include "epshape/systems.hpp"

namespace epshape {

/// Fixed-step integration window. t_final must be a whole number of steps
/// (validated by the scenario layer).
struct IntegratorConfig {
  double step = 1e-3;
  double t_final = 10.0;
};

/// Which optional fields a packed state vector carries, in packing order
/// Pi, P, a_r3, a_r4, theta, deltas.
struct StateLayout {
  bool a_r3 = false, a_r4 = false, theta = false, deltas = false;

  static StateLayout of(const ReducedState& s);
  int dim() const;
};

/// Flat momentum-coordinate vector for integration; impulses come from the
/// Legendre transform of s.xi.
Eigen::VectorXd pack_state(const InertiaParams& p, const ReducedState& s);
ReducedState unpack_state(const InertiaParams& p, const StateLayout& layout,
                          const Eigen::VectorXd& y);
Eigen::VectorXd pack_rates(const StateLayout& layout, const StateRates& r);

using FlatRhs = std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>;

/// One classical Runge-Kutta step. Throws NonFiniteState if the input or the
/// result contains NaN/Inf.
Eigen::VectorXd rk4_step(const FlatRhs& f, double t, const Eigen::VectorXd& y, double h);

/// Sampled run: state plus named conserved-quantity values at every step
/// (t = 0 included). poses stays empty until reconstruct() fills it.
struct Trajectory {
  StateLayout layout;
  std::vector<double> times;
  std::vector<ReducedState> states;
  std::vector<SE3Element> poses;
  std::vector<std::string> diagnostic_names;
  std::vector<std::vector<double>> diagnostics;
};

/// The conserved quantities of a (system, controller) pair; entry 0 is the
/// closed-loop energy, the rest are Casimir-type invariants.
struct DiagnosticSet {
  std::vector<std::string> names;
  std::function<std::vector<double>(const ReducedState&)> eval;
};
DiagnosticSet conserved_quantities(SystemId id, const InertiaParams& p,
                                   const Controller& c);

/// Integrate the closed loop with fixed-step RK4; the feedback law is
/// re-evaluated at every internal stage.
Trajectory simulate(SystemId id, const InertiaParams& p, const Controller& c,
                    const ReducedState& initial, const IntegratorConfig& cfg);

/// Recover the pose path from the sampled body velocities: RK4 on
/// R' = R hat(Omega), x' = R v over each sample interval, with stage
/// velocities interpolated 4-point from neighboring samples. Whenever
/// |R^T R - I| exceeds 1e-9 the rotation is re-projected (polar/SVD).
/// Returns a copy of traj with poses filled, starting from s0.
Trajectory reconstruct(const Trajectory& traj, const SE3Element& s0);

/// Central-difference Jacobian of f at eq with per-coordinate step
/// eps * (1 + |eq_i|). Throws NotAnEquilibrium unless |f(eq)| <= eq_tol.
Eigen::MatrixXd linearize(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                          const Eigen::VectorXd& eq, double eps = 1e-6,
                          double eq_tol = 1e-10);

/// Jacobian of the packed closed-loop equations at a fixed point.
Eigen::MatrixXd linearize_closed_loop(SystemId id, const InertiaParams& p,
                                      const Controller& c, const ReducedState& eq,
                                      double eps = 1e-6, double eq_tol = 1e-10);

/// Dense eigenvalues; dimension capped at 20 (these systems never exceed 17).
/// Throws NoConvergence if the QR iteration fails.
Eigen::VectorXcd eigenvalues(const Eigen::MatrixXd& a);

enum class StabilityClass { SpectrallyStable, Marginal, Unstable };

/// Numerical stability assessment at the candidate equilibrium:
/// spectrum of the linearization plus the second variation of the conserved
/// energy restricted to the tangent of the other invariants' level set.
struct StabilityReport {
  StabilityClass classification = StabilityClass::Marginal;
  double max_real_part = 0.0;
  std::vector<std::complex<double>> eigenvalues;
  /// Smallest eigenvalue of the restricted second variation; positive means
  /// the equilibrium sits in an energy well on the invariant level set.
  double second_variation_min = 0.0;
  bool energy_definite = false;
  std::vector<std::string> notes;
};

/// Assess equilibrium_state(id, p, c). Unstable if some eigenvalue's real
/// part exceeds unstable_tol; SpectrallyStable if the spectrum is marginal
/// (all |Re| below stable_tol) and the restricted second variation is
/// positive; Marginal otherwise. Throws NotAnEquilibrium when the candidate
/// point is not a fixed point of the closed loop.
StabilityReport stability_report(SystemId id, const InertiaParams& p,
                                 const Controller& c, double unstable_tol = 1e-4,
                                 double stable_tol = 1e-6);

}  // namespace epshape
