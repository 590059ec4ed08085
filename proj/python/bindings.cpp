#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "epshape/algebra.hpp"
#include "epshape/control.hpp"
#include "epshape/poisson.hpp"
#include "epshape/scenario.hpp"
#include "epshape/sim.hpp"
#include "epshape/verify.hpp"

namespace py = pybind11;
using namespace epshape;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Rigid-body dynamics with advected parameters: algebra, feedback laws, "
            "Lie-Poisson brackets, integration, and stability assessment";

  py::register_exception<Error>(m, "EpshapeError", PyExc_RuntimeError);
  py::register_exception<ScenarioError>(m, "ScenarioError", PyExc_ValueError);
  py::register_exception<NotAnEquilibrium>(m, "NotAnEquilibrium", PyExc_ValueError);
  py::register_exception<NonFiniteState>(m, "NonFiniteState", PyExc_ArithmeticError);

  py::enum_<SystemId>(m, "SystemId")
      .value("UnderwaterVehicle", SystemId::UnderwaterVehicle)
      .value("HeavyTop", SystemId::HeavyTop);
  py::enum_<ControllerId>(m, "ControllerId")
      .value("NoControl", ControllerId::None)
      .value("WeightCompensation", ControllerId::WeightCompensation)
      .value("SteadyMotion", ControllerId::SteadyMotion)
      .value("DriftCorrection", ControllerId::DriftCorrection);
  py::enum_<BracketId>(m, "BracketId")
      .value("Se3", BracketId::Se3)
      .value("Se3R3", BracketId::Se3R3)
      .value("Drift", BracketId::Drift);
  py::enum_<StabilityClass>(m, "StabilityClass")
      .value("SpectrallyStable", StabilityClass::SpectrallyStable)
      .value("Marginal", StabilityClass::Marginal)
      .value("Unstable", StabilityClass::Unstable);
  py::enum_<ProbeFamily>(m, "ProbeFamily")
      .value("Quadratic", ProbeFamily::Quadratic)
      .value("Linear", ProbeFamily::Linear);
  py::enum_<PotentialId>(m, "PotentialId")
      .value("KineticOnly", PotentialId::KineticOnly)
      .value("OffsetGravity", PotentialId::OffsetGravity)
      .value("OffsetAndHeightGravity", PotentialId::OffsetAndHeightGravity);

  py::class_<Vec4>(m, "Vec4")
      .def(py::init<>())
      .def(py::init<const Vec3&, double>(), py::arg("spatial"), py::arg("scalar"))
      .def_readwrite("spatial", &Vec4::spatial)
      .def_readwrite("scalar", &Vec4::scalar)
      .def("dot", &Vec4::dot)
      .def("norm", &Vec4::norm)
      .def("__repr__", [](const Vec4& v) {
        return "Vec4([" + std::to_string(v.spatial(0)) + ", " + std::to_string(v.spatial(1)) +
               ", " + std::to_string(v.spatial(2)) + "], " + std::to_string(v.scalar) + ")";
      });

  py::class_<AlgebraVector>(m, "AlgebraVector")
      .def(py::init<>())
      .def(py::init<const Vec3&, const Vec3&>(), py::arg("omega"), py::arg("vel"))
      .def_readwrite("omega", &AlgebraVector::omega)
      .def_readwrite("vel", &AlgebraVector::vel);

  py::class_<MomentumCovector>(m, "MomentumCovector")
      .def(py::init<>())
      .def(py::init<const Vec3&, const Vec3&>(), py::arg("pi"), py::arg("p"))
      .def_readwrite("pi", &MomentumCovector::pi)
      .def_readwrite("p", &MomentumCovector::p);

  py::class_<SE3Element>(m, "SE3Element")
      .def(py::init<>())
      .def(py::init<const Mat3&, const Vec3&>(), py::arg("rotation"), py::arg("translation"))
      .def_readwrite("rotation", &SE3Element::rotation)
      .def_readwrite("translation", &SE3Element::translation);

  py::class_<InertiaParams>(m, "InertiaParams")
      .def(py::init<const Mat3&, const Mat3&, const Mat3&, double, double, double, double,
                    const Vec3&>(),
           py::arg("inertia"), py::arg("coupling"), py::arg("mass_matrix"), py::arg("mass"),
           py::arg("total_mass"), py::arg("gravity"), py::arg("arm"), py::arg("com_dir"))
      .def_static("defaults", &InertiaParams::defaults)
      .def_property_readonly("inertia", &InertiaParams::inertia)
      .def_property_readonly("coupling", &InertiaParams::coupling)
      .def_property_readonly("mass_matrix", &InertiaParams::mass_matrix)
      .def_property_readonly("mass", &InertiaParams::mass)
      .def_property_readonly("total_mass", &InertiaParams::total_mass)
      .def_property_readonly("gravity", &InertiaParams::gravity)
      .def_property_readonly("arm", &InertiaParams::arm)
      .def_property_readonly("com_dir", &InertiaParams::com_dir)
      .def_property_readonly("mgl", &InertiaParams::mgl)
      .def("kinetic_matrix", &InertiaParams::kinetic_matrix);

  py::class_<ReducedState>(m, "ReducedState")
      .def(py::init<>())
      .def_readwrite("xi", &ReducedState::xi)
      .def_readwrite("a_r3", &ReducedState::a_r3)
      .def_readwrite("a_r4", &ReducedState::a_r4)
      .def_readwrite("theta", &ReducedState::theta)
      .def_readwrite("deltas", &ReducedState::deltas)
      .def("gamma", &ReducedState::gamma);

  py::class_<StateRates>(m, "StateRates")
      .def_readwrite("mom", &StateRates::mom)
      .def_readwrite("a_r3", &StateRates::a_r3)
      .def_readwrite("a_r4", &StateRates::a_r4)
      .def_readwrite("theta", &StateRates::theta)
      .def_readwrite("deltas", &StateRates::deltas);

  py::class_<Gains>(m, "Gains")
      .def(py::init<>())
      .def_readwrite("alpha", &Gains::alpha)
      .def_readwrite("beta", &Gains::beta)
      .def_readwrite("k_matrix", &Gains::k_matrix);

  py::class_<DesiredMotion>(m, "DesiredMotion")
      .def(py::init<const Mat3&, const Vec3&>(), py::arg("r_d"), py::arg("v_d"))
      .def_readwrite("r_d", &DesiredMotion::r_d)
      .def_readwrite("v_d", &DesiredMotion::v_d);

  py::class_<ControlOutput>(m, "ControlOutput")
      .def(py::init<>())
      .def_readwrite("u_rot", &ControlOutput::u_rot)
      .def_readwrite("u_lin", &ControlOutput::u_lin);

  py::class_<Controller>(m, "Controller")
      .def(py::init<>())
      .def_readwrite("id", &Controller::id)
      .def_readwrite("gains", &Controller::gains)
      .def_readwrite("desired", &Controller::desired);

  py::class_<IntegratorConfig>(m, "IntegratorConfig")
      .def(py::init<>())
      .def(py::init([](double step, double t_final) {
             return IntegratorConfig{step, t_final};
           }),
           py::arg("step"), py::arg("t_final"))
      .def_readwrite("step", &IntegratorConfig::step)
      .def_readwrite("t_final", &IntegratorConfig::t_final);

  py::class_<Trajectory>(m, "Trajectory")
      .def_readonly("times", &Trajectory::times)
      .def_readonly("states", &Trajectory::states)
      .def_readonly("poses", &Trajectory::poses)
      .def_readonly("diagnostic_names", &Trajectory::diagnostic_names)
      .def_readonly("diagnostics", &Trajectory::diagnostics);

  py::class_<StabilityReport>(m, "StabilityReport")
      .def_readonly("classification", &StabilityReport::classification)
      .def_readonly("max_real_part", &StabilityReport::max_real_part)
      .def_readonly("eigenvalues", &StabilityReport::eigenvalues)
      .def_readonly("second_variation_min", &StabilityReport::second_variation_min)
      .def_readonly("energy_definite", &StabilityReport::energy_definite)
      .def_readonly("notes", &StabilityReport::notes);

  py::class_<PhasePoint>(m, "PhasePoint")
      .def(py::init<>())
      .def_readwrite("pi", &PhasePoint::pi)
      .def_readwrite("p", &PhasePoint::p)
      .def_readwrite("gamma", &PhasePoint::gamma)
      .def_readwrite("d1", &PhasePoint::d1)
      .def_readwrite("d2", &PhasePoint::d2);

  py::class_<GradientEval>(m, "GradientEval")
      .def(py::init<>())
      .def_readwrite("d_pi", &GradientEval::d_pi)
      .def_readwrite("d_p", &GradientEval::d_p)
      .def_readwrite("d_gamma", &GradientEval::d_gamma)
      .def_readwrite("d_d1", &GradientEval::d_d1)
      .def_readwrite("d_d2", &GradientEval::d_d2);

  // so(3)/SE(3) primitives
  m.def("hat", &hat, py::arg("w"));
  m.def("vee", &vee, py::arg("W"), py::arg("tol") = 1e-9);
  m.def("exp_so3", &exp_so3, py::arg("w"));
  m.def("ad", &ad, py::arg("x"), py::arg("y"));
  m.def("coad", &coad, py::arg("x"), py::arg("m"));
  m.def("diamond", &diamond, py::arg("y"), py::arg("b"));
  m.def("momentum_rot3", &momentum_rot3, py::arg("y"), py::arg("gamma"));
  m.def("momentum_hom4", &momentum_hom4, py::arg("y"), py::arg("a"));
  m.def("advect_rot3", &advect_rot3, py::arg("xi"), py::arg("gamma"));
  m.def("advect_hom4", &advect_hom4, py::arg("xi"), py::arg("a"));
  m.def("se3_compose", &se3_compose);
  m.def("se3_inverse", &se3_inverse);
  m.def("dual_act_hom4", &dual_act_hom4, py::arg("s"), py::arg("a"));

  // systems
  m.def("legendre", &legendre, py::arg("params"), py::arg("xi"));
  m.def("legendre_inverse", &legendre_inverse, py::arg("params"), py::arg("m"));
  m.def("ep_rhs", &ep_rhs, py::arg("system"), py::arg("params"), py::arg("state"));
  m.def("kinetic_energy", &kinetic_energy);
  m.def("energy", &energy, py::arg("params"), py::arg("state"), py::arg("potential"));

  // feedback laws and matching checks (mutation hook not exposed)
  m.def("u_weight_compensation",
        [](const InertiaParams& p, const ReducedState& s) { return u_weight_compensation(p, s); });
  m.def("u_steady_motion", [](const InertiaParams& p, const Gains& g, const DesiredMotion& d,
                              const ReducedState& s) { return u_steady_motion(p, g, d, s); });
  m.def("u_drift_correction", [](const InertiaParams& p, const Gains& g, const DesiredMotion& d,
                                 const ReducedState& s) { return u_drift_correction(p, g, d, s); });
  m.def("matching_residual_weight", [](const InertiaParams& p, const ReducedState& s) {
    return matching_residual_weight(p, s);
  });
  m.def("matching_residual_steady",
        [](const InertiaParams& p, const Gains& g, const DesiredMotion& d, const ReducedState& s) {
          return matching_residual_steady(p, g, d, s);
        });
  m.def("matching_residual_drift",
        [](const InertiaParams& p, const Gains& g, const DesiredMotion& d, const ReducedState& s) {
          return matching_residual_drift(p, g, d, s);
        });
  m.def("closed_loop_rhs", &closed_loop_rhs);
  m.def("closed_loop_energy", &closed_loop_energy);
  m.def("equilibrium_state", &equilibrium_state, py::arg("system"), py::arg("params"),
        py::arg("controller"));
  m.def("gain_warnings", &gain_warnings);

  // brackets
  m.def("bracket", &bracket, py::arg("id"), py::arg("z"), py::arg("f"), py::arg("h"));
  m.def("hamiltonian_rhs", &hamiltonian_rhs, py::arg("id"), py::arg("z"), py::arg("grad_h"));
  m.def("jacobi_probe",
        [](BracketId id, const PhasePoint& z, ProbeFamily family, unsigned seed) {
          return jacobi_probe(id, z, family, seed);
        },
        py::arg("id"), py::arg("z"), py::arg("family") = ProbeFamily::Quadratic,
        py::arg("seed") = 42);

  // integration and assessment
  m.def("simulate", &simulate, py::arg("system"), py::arg("params"), py::arg("controller"),
        py::arg("initial"), py::arg("config"));
  m.def("reconstruct", &reconstruct, py::arg("trajectory"), py::arg("initial_pose"));
  m.def("stability_report", &stability_report, py::arg("system"), py::arg("params"),
        py::arg("controller"), py::arg("unstable_tol") = 1e-4, py::arg("stable_tol") = 1e-6);

  // scenario plumbing: validate text, return warnings (throws ScenarioError)
  m.def("validate_scenario", [](const std::string& text) {
    return parse_scenario(text).warnings;
  });
}
