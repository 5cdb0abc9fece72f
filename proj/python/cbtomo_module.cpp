#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cbtomo/charge_model.hpp"
#include "cbtomo/circuit.hpp"
#include "cbtomo/io/config.hpp"
#include "cbtomo/io/presets.hpp"
#include "cbtomo/io/run.hpp"
#include "cbtomo/ramsey.hpp"
#include "cbtomo/tomography.hpp"

namespace py = pybind11;
using namespace cbtomo;

namespace {

TargetModel make_model(double ec, double ej, double ej2, double ng) {
  TargetModel m{ec, ej, ej2, ng};
  m.validate();
  return m;
}

py::dict couplings(const CircuitSpec& spec, int cutoff) {
  ProbeSolverOptions options;
  options.cutoff = cutoff;
  const CouplingSet c = coupling_strengths(spec, options);
  py::dict d;
  d["delta_p"] = c.delta_p;
  d["g_par_pc"] = c.g_par_pc;
  d["g_perp_pc"] = c.g_perp_pc;
  d["g_par_pt"] = c.g_par_pt;
  d["g_perp_pt"] = c.g_perp_pt;
  d["g_perp_ct"] = c.g_perp_ct;
  d["g_tp"] = c.g_tp;
  d["impedance_ohm"] = c.impedance_ohm;
  d["resonator_ghz"] = c.resonator_ghz;
  d["warnings"] = c.warnings;
  return d;
}

}  // namespace

PYBIND11_MODULE(_cbtomo, m) {
  m.doc() = "Charge-basis tomography simulator";
  m.attr("__version__") = io::tool_version();

  py::class_<TargetModel>(m, "TargetModel")
      .def(py::init(&make_model), py::arg("ec") = 1.0, py::arg("ej") = 0.0, py::arg("ej2") = 0.0,
           py::arg("ng") = 0.0)
      .def_readwrite("ec", &TargetModel::ec)
      .def_readwrite("ej", &TargetModel::ej)
      .def_readwrite("ej2", &TargetModel::ej2)
      .def_readwrite("ng", &TargetModel::ng);

  m.def(
      "hamiltonian",
      [](const TargetModel& model, int cutoff) { return build_target_hamiltonian(model, ChargeBasis(cutoff)); },
      py::arg("model"), py::arg("cutoff"));
  m.def(
      "eigenvalues",
      [](const TargetModel& model, int cutoff) {
        return Eigen::VectorXd(solve_target(model, ChargeBasis(cutoff)).eigenvalues);
      },
      py::arg("model"), py::arg("cutoff"));
  m.def(
      "ground_state",
      [](const TargetModel& model, int cutoff) {
        return CVector(ground_state(model, ChargeBasis(cutoff)).coefficients());
      },
      py::arg("model"), py::arg("cutoff"), "Coefficients for n = -cutoff..cutoff.");
  m.def(
      "analytic_state",
      [](int level, const TargetModel& model, int cutoff) {
        return CVector(analytic_state(level, model, ChargeBasis(cutoff)).coefficients());
      },
      py::arg("level"), py::arg("model"), py::arg("cutoff"));
  m.def("plasma_frequency", &plasma_frequency, py::arg("model"));

  m.def(
      "analytic_sigma_x",
      [](const std::vector<double>& p, double delta_p, double g, double t) {
        const int cutoff = static_cast<int>(p.size() / 2);
        return analytic_sigma_x(p, ChargeBasis(cutoff), ProbeSpec{delta_p, g}, t);
      },
      py::arg("probabilities"), py::arg("delta_p"), py::arg("g"), py::arg("t"));

  m.def(
      "project_physical",
      [](const CMatrix& rho) {
        const int cutoff = static_cast<int>(rho.rows() / 2);
        return CMatrix(project_physical(rho, ChargeBasis(cutoff)).rho);
      },
      py::arg("rho"));
  m.def("hilbert_schmidt_distance", &hilbert_schmidt_distance, py::arg("a"), py::arg("b"));

  py::class_<CircuitSpec>(m, "CircuitSpec")
      .def(py::init<>())
      .def_readwrite("ejp", &CircuitSpec::ejp)
      .def_readwrite("ejt", &CircuitSpec::ejt)
      .def_readwrite("alpha_l", &CircuitSpec::alpha_l)
      .def_readwrite("alpha_r", &CircuitSpec::alpha_r)
      .def_readwrite("flux", &CircuitSpec::flux)
      .def_readwrite("ng", &CircuitSpec::ng)
      .def_readwrite("cjp", &CircuitSpec::cjp)
      .def_readwrite("cjt", &CircuitSpec::cjt)
      .def_readwrite("ct", &CircuitSpec::ct)
      .def_readwrite("cg", &CircuitSpec::cg)
      .def_readwrite("ccp", &CircuitSpec::ccp)
      .def_readwrite("cct", &CircuitSpec::cct)
      .def_readwrite("cr", &CircuitSpec::cr)
      .def_readwrite("lr", &CircuitSpec::lr);
  m.def("capacitance_matrix", [](const CircuitSpec& s) { return Eigen::MatrixXd(capacitance_matrix(s)); });
  m.def("coupling_strengths", &couplings, py::arg("spec"), py::arg("cutoff") = 7,
        "Energies in GHz.");

  m.def("presets", [] {
    std::vector<std::string> names;
    for (const auto& p : io::presets()) {
      names.push_back(p.name);
    }
    return names;
  });
  m.def("preset_yaml", [](const std::string& name) { return io::find_preset(name).yaml; });
  m.def(
      "run_config",
      [](const std::string& yaml, const std::string& out, unsigned threads) {
        const io::ExperimentConfig config = io::parse_config(yaml);
        io::RunManifest manifest;
        {
          py::gil_scoped_release release;
          manifest = io::run_experiment(config, yaml, {out, threads});
        }
        return manifest.to_json().dump();
      },
      py::arg("yaml"), py::arg("out"), py::arg("threads") = 0,
      "Runs a YAML config into `out` and returns the manifest as JSON text.");

  py::register_exception<io::ConfigError>(m, "ConfigError", PyExc_ValueError);
}
