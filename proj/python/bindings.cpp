// Python access to the numerical core. Matrices cross as numpy arrays;
// validation errors surface as ValueError.
#include "gbattery/config.hpp"
#include "gbattery/cycles.hpp"
#include "gbattery/extraction.hpp"
#include "gbattery/gqm.hpp"
#include "gbattery/io.hpp"
#include "gbattery/model.hpp"
#include "gbattery/oracle.hpp"
#include "gbattery/runner.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace gb;

namespace {

py::dict report_dict(const CycleReport& r) {
  py::dict d;
  d["scenario"] = to_string(r.scenario);
  d["t_d"] = r.t_d;
  d["theta"] = r.theta;
  d["W_d"] = r.W_d;
  d["W_c"] = r.W_c;
  d["ergotropy"] = r.ergotropy;
  d["W_diss"] = r.W_diss;
  d["Q"] = r.Q;
  d["Sigma"] = r.Sigma;
  d["eta"] = r.eta ? py::object(py::float_(*r.eta)) : py::object(py::none());
  d["I_td"] = r.I_td;
  d["dE_B_disc"] = r.dE_B_disc;
  d["dE_B_charge"] = r.dE_B_charge;
  d["first_law_residual"] = r.first_law_residual;
  d["second_law_value"] = r.second_law_value;
  d["interaction_identity_residual"] = r.interaction_identity_residual;
  d["flags"] = r.flags;
  d["symplectic_defect"] = r.symplectic_defect;
  d["entropy_drift"] = r.entropy_drift;
  d["steps"] = r.steps;
  d["dt"] = r.dt;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Gaussian quantum battery on a discrete Caldeira-Leggett bath";
  m.attr("__version__") = kVersion;

  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  // covariance-matrix algebra
  m.def("symplectic_form", &symplectic_form, py::arg("n_modes"));
  m.def("symplectic_eigenvalues",
        [](const Matrix& x) { return symplectic_eigenvalues(x); }, py::arg("m"));
  m.def("williamson", [](const Matrix& x) {
    WilliamsonResult w = williamson_decompose(x);
    return py::make_tuple(w.transform.matrix(), w.symplectic_eigenvalues);
  }, py::arg("m"), "returns (S, nu) with m = S diag(nu, nu) S^T");
  m.def("normal_mode_frequencies",
        [](const Matrix& h) { return normal_mode_frequencies(HamiltonianMatrix(h)); }, py::arg("h"));
  m.def("thermal_cm",
        [](const Matrix& h, double beta) { return thermal_cm(HamiltonianMatrix(h), beta).matrix(); },
        py::arg("h"), py::arg("beta"));
  m.def("mean_energy", [](const Matrix& h, const Matrix& s) { return mean_energy(h, s); },
        py::arg("h"), py::arg("sigma"));
  m.def("von_neumann_entropy",
        [](const Matrix& s) { return von_neumann_entropy(CovarianceMatrix(s)); }, py::arg("sigma"));
  m.def("mutual_information",
        [](const Matrix& s, std::vector<Index> a, std::vector<Index> b) {
          return mutual_information(CovarianceMatrix(s), a, b);
        },
        py::arg("sigma"), py::arg("a"), py::arg("b"));
  m.def("relative_entropy_to_thermal",
        [](const Matrix& s, const Matrix& h, double beta) {
          return relative_entropy_to_thermal(CovarianceMatrix(s), HamiltonianMatrix(h), beta);
        },
        py::arg("sigma"), py::arg("h"), py::arg("beta"));
  m.def("ergotropy",
        [](const Matrix& s, const Matrix& h) { return ergotropy(CovarianceMatrix(s), HamiltonianMatrix(h)); },
        py::arg("sigma_S"), py::arg("h_S"));
  m.def("propagator",
        [](const Matrix& h, double t) { return propagator_const(HamiltonianMatrix(h), t).matrix(); },
        py::arg("h"), py::arg("t"), "exp(2 Omega H t)");

  // model
  py::class_<ModelSpec>(m, "ModelSpec")
      .def(py::init<>())
      .def_readwrite("m0", &ModelSpec::m0)
      .def_readwrite("omega0", &ModelSpec::omega0)
      .def_readwrite("N", &ModelSpec::N)
      .def_readwrite("a0", &ModelSpec::a0)
      .def_readwrite("masses", &ModelSpec::masses)
      .def_readwrite("gamma", &ModelSpec::gamma)
      .def_readwrite("omegaD", &ModelSpec::omegaD)
      .def_readwrite("beta", &ModelSpec::beta)
      .def_readwrite("tail_match", &ModelSpec::tail_match)
      .def_property(
          "frequency_map", [](const ModelSpec& s) { return to_string(s.frequency_map); },
          [](ModelSpec& s, const std::string& v) { s.frequency_map = frequency_map_from_string(v); })
      .def("validate", &ModelSpec::validate);

  py::class_<ClModel>(m, "ClModel")
      .def(py::init<ModelSpec>(), py::arg("spec"))
      .def_property_readonly("spec", &ClModel::spec)
      .def_property_readonly("omegas", [](const ClModel& c) { return c.bath().omegas; })
      .def_property_readonly("couplings", [](const ClModel& c) { return c.bath().couplings; })
      .def_property_readonly("omegaR_sq", [](const ClModel& c) { return c.bath().omegaR_sq; })
      .def_property_readonly("tail_factor", [](const ClModel& c) { return c.bath().tail_factor; })
      .def_property_readonly("warnings", [](const ClModel& c) { return c.bath().warnings; })
      .def_property_readonly("recurrence", [](const ClModel& c) { return recurrence_estimate(c.bath()); })
      .def("hamiltonian", [](const ClModel& c, double lam) { return c.hamiltonian(lam).matrix(); },
           py::arg("lam"))
      .def("h_battery", [](const ClModel& c) { return c.h_battery().matrix(); });

  // oracle
  m.def("stationary_moments",
        [](const ModelSpec& spec) {
          MeanForceCM r = stationary_moments(spec);
          return py::make_tuple(r.q2, r.p2);
        },
        py::arg("spec"), "continuum (<Q^2>, <P^2>)");

  // cycles
  py::class_<CycleEngine>(m, "CycleEngine")
      .def(py::init([](const ModelSpec& spec, double t_charge, double window, int samples) {
             ChargingSettings cs{t_charge, window, samples};
             cs.validate();
             return CycleEngine(ClModel(spec), StepperConfig{}, cs);
           }),
           py::arg("spec"), py::arg("t_charge") = 150.0, py::arg("window") = 0.2,
           py::arg("sample_count") = 400)
      .def("run",
           [](const CycleEngine& e, const std::string& scenario, double td, double theta, int exponent) {
             CycleConfig c{scenario_from_string(scenario), td, theta, e.charging()};
             CycleReport r;
             {
               py::gil_scoped_release release;
               r = e.run(c, exponent);
             }
             return report_dict(r);
           },
           py::arg("scenario"), py::arg("t_d"), py::arg("theta") = 0.0, py::arg("exponent") = 11)
      .def_property_readonly("thermal", [](const CycleEngine& e) { return e.thermal().matrix(); })
      .def_property_readonly("recurrence", &CycleEngine::recurrence);

  // config and CLI surface
  m.def("default_config", [] { return emit_config(RunConfig{}); });
  m.def("normalize_config", [](const std::string& text) { return emit_config(parse_config(text)); },
        py::arg("text"), "parse, validate and re-emit canonically");
  m.def("run_command",
        [](const std::string& command, const std::string& config_text, const std::string& out) {
          RunOptions opt;
          opt.command = command;
          opt.out = out;
          opt.jobs = 1;
          std::ostringstream console;
          int status = run(parse_config(config_text), opt, console);
          return py::make_tuple(status, console.str());
        },
        py::arg("command"), py::arg("config_text"), py::arg("out"));

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
}
