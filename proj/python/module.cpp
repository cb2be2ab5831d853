#include <stdexcept>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "bellsim/bell.hpp"
#include "bellsim/optimize.hpp"
#include "bellsim/pipeline.hpp"
#include "bellsim/scheme.hpp"

namespace py = pybind11;
using namespace bellsim;

namespace {

std::string setting_repr(const MeasurementSetting& s) {
  return "MeasurementSetting(theta1=" + std::to_string(s.theta1) + ", theta2=" + std::to_string(s.theta2) +
         ", phi1=" + std::to_string(s.phi1) + ", phi2=" + std::to_string(s.phi2) + ")";
}

}  // namespace

PYBIND11_MODULE(_bellsim, m) {
  m.doc() = "Homodyne CHSH tests with photon-subtracted Gaussian states.";

  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  static py::exception<SchemeError> scheme_error(m, "SchemeError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const SchemeError& e) {
      // Code and position travel as attributes so callers need not parse the text.
      py::object err = py::reinterpret_borrow<py::object>(scheme_error)(e.what());
      err.attr("code") = error_code_name(e.code());
      err.attr("line") = e.location().line;
      err.attr("column") = e.location().column;
      PyErr_SetObject(scheme_error.ptr(), err.ptr());
    }
  });

  py::enum_<ThermalNoiseUnits>(m, "ThermalNoiseUnits")
      .value("QUADRATURE_VARIANCE", ThermalNoiseUnits::QuadratureVariance)
      .value("SHOT_NOISE", ThermalNoiseUnits::ShotNoise);

  py::class_<GaussianState>(m, "GaussianState")
      .def(py::init<Matrix>(), py::arg("cov"))
      .def(py::init<Matrix, Vector>(), py::arg("cov"), py::arg("disp"))
      .def_property_readonly("n_modes", &GaussianState::n_modes)
      .def_property_readonly("cov", &GaussianState::cov)
      .def_property_readonly("disp", &GaussianState::disp);
  m.def("vacuum", &vacuum, py::arg("n_modes"));
  m.def("two_mode_squeezed", &two_mode_squeezed, py::arg("s"));
  m.def("single_mode_squeezed", &single_mode_squeezed, py::arg("s"));
  m.def("symplectic_eigenvalues", &symplectic_eigenvalues, py::arg("cov"));
  m.def("squeezing_db", &squeezing_db, py::arg("lam"));

  py::class_<DetectionModel>(m, "DetectionModel")
      .def(py::init([](double eta_bhd, double electronic_noise) { return DetectionModel{eta_bhd, electronic_noise}; }),
           py::arg("eta_bhd") = 1.0, py::arg("electronic_noise") = 0.0)
      .def_readwrite("eta_bhd", &DetectionModel::eta_bhd)
      .def_readwrite("electronic_noise", &DetectionModel::electronic_noise);

  py::class_<MainSchemeConfig>(m, "MainSchemeConfig")
      .def(py::init([](int photons_per_arm, double transmittance, double eta_pd, DetectionModel detection,
                       double v_noise, ThermalNoiseUnits units) {
             return MainSchemeConfig{photons_per_arm, transmittance, eta_pd, detection, v_noise, units};
           }),
           py::arg("photons_per_arm") = 1, py::arg("transmittance") = 0.99, py::arg("eta_pd") = 1.0,
           py::arg("detection") = DetectionModel{}, py::arg("v_noise") = 0.0,
           py::arg("noise_units") = ThermalNoiseUnits::QuadratureVariance)
      .def_readwrite("photons_per_arm", &MainSchemeConfig::photons_per_arm)
      .def_readwrite("transmittance", &MainSchemeConfig::transmittance)
      .def_readwrite("eta_pd", &MainSchemeConfig::eta_pd)
      .def_readwrite("detection", &MainSchemeConfig::detection)
      .def_readwrite("v_noise", &MainSchemeConfig::v_noise)
      .def_readwrite("noise_units", &MainSchemeConfig::noise_units);

  py::class_<SignedGaussianMixture>(m, "SignedGaussianMixture")
      .def(py::init([](int n_modes, const std::vector<double>& weights, const std::vector<Matrix>& precisions,
                       double success_prob) {
             if (weights.size() != precisions.size())
               throw std::invalid_argument("weights and precisions differ in length");
             std::vector<MixtureTerm> terms;
             for (std::size_t j = 0; j < weights.size(); ++j) terms.push_back({weights[j], precisions[j]});
             return SignedGaussianMixture(n_modes, std::move(terms), success_prob);
           }),
           py::arg("n_modes"), py::arg("weights"), py::arg("precisions"), py::arg("success_prob") = 1.0)
      .def_property_readonly("n_modes", &SignedGaussianMixture::n_modes)
      .def_property_readonly("success_prob", &SignedGaussianMixture::success_prob)
      .def_property_readonly("weights",
                             [](const SignedGaussianMixture& mix) {
                               std::vector<double> w;
                               for (const auto& t : mix.terms()) w.push_back(t.weight);
                               return w;
                             })
      .def_property_readonly("precisions",
                             [](const SignedGaussianMixture& mix) {
                               std::vector<Matrix> p;
                               for (const auto& t : mix.terms()) p.push_back(t.precision);
                               return p;
                             })
      .def("normalization", &SignedGaussianMixture::normalization)
      .def("wigner", &SignedGaussianMixture::wigner, py::arg("r"))
      .def("marginal", [](const SignedGaussianMixture& mix, std::vector<int> modes) { return mix.marginal(modes); },
           py::arg("modes"))
      .def("__len__", [](const SignedGaussianMixture& mix) { return mix.terms().size(); });

  m.def("main_scheme_state", &main_scheme_state, py::arg("config"), py::arg("lam"),
        "Conditional two-mode state for squeezing lam = tanh(s).");

  py::class_<MeasurementSetting>(m, "MeasurementSetting")
      .def(py::init([](double t1, double t2, double p1, double p2) { return MeasurementSetting{t1, t2, p1, p2}; }),
           py::arg("theta1") = 0.0, py::arg("theta2") = MeasurementSetting{}.theta2,
           py::arg("phi1") = MeasurementSetting{}.phi1, py::arg("phi2") = MeasurementSetting{}.phi2)
      .def_static("canonical", &MeasurementSetting::canonical)
      .def_readwrite("theta1", &MeasurementSetting::theta1)
      .def_readwrite("theta2", &MeasurementSetting::theta2)
      .def_readwrite("phi1", &MeasurementSetting::phi1)
      .def_readwrite("phi2", &MeasurementSetting::phi2)
      .def("__eq__", [](const MeasurementSetting& a, const MeasurementSetting& b) { return a == b; })
      .def("__repr__", &setting_repr);

  py::class_<BellResult>(m, "BellResult")
      .def_readonly("S", &BellResult::S)
      .def_readonly("correlations", &BellResult::correlations)
      .def_readonly("success_prob", &BellResult::success_prob)
      .def_readonly("settings", &BellResult::settings)
      .def("__repr__", [](const BellResult& r) {
        return "BellResult(S=" + std::to_string(r.S) + ", success_prob=" + std::to_string(r.success_prob) + ")";
      });

  m.def("orthant_integral", &orthant_integral, py::arg("gamma"));
  m.def("correlation",
        py::overload_cast<const SignedGaussianMixture&, double, double, std::pair<int, int>>(&correlation),
        py::arg("mixture"), py::arg("theta"), py::arg("phi"), py::arg("modes") = std::pair<int, int>{0, 1});
  m.def("bell_factor", &bell_factor, py::arg("mixture"), py::arg("settings") = MeasurementSetting{},
        py::arg("modes") = std::pair<int, int>{0, 1});
  m.def(
      "optimize_angles",
      [](const SignedGaussianMixture& mix, int grid_points) {
        AngleSearchOptions opt;
        opt.grid_points = grid_points;
        return optimize_angles(mix, opt);
      },
      py::arg("mixture"), py::arg("grid_points") = AngleSearchOptions{}.grid_points,
      py::call_guard<py::gil_scoped_release>());

  py::class_<PureStateModel>(m, "PureStateModel")
      .def_readonly("coefficients", &PureStateModel::coefficients)
      .def_readonly("probability", &PureStateModel::probability);
  m.def("pure_state_model", &pure_state_model, py::arg("photons_per_arm"), py::arg("transmittance"), py::arg("lam"));
  m.def(
      "munro_bell_factor",
      [](const std::vector<double>& c, const MeasurementSetting& s) { return munro_bell_factor(c, s); },
      py::arg("coefficients"), py::arg("settings") = MeasurementSetting{});

  py::class_<SchemeIR>(m, "Scheme")
      .def_readonly("modes", &SchemeIR::modes)
      .def_readonly("taps", &SchemeIR::taps)
      .def("__eq__", [](const SchemeIR& a, const SchemeIR& b) { return a == b; })
      .def("__str__", &print_scheme);
  py::class_<SchemeReport>(m, "SchemeReport")
      .def_readonly("result", &SchemeReport::result)
      .def_readonly("lam", &SchemeReport::lambda)
      .def_property_readonly("violates", &SchemeReport::violates);
  m.def("parse_scheme", [](const std::string& text) { return parse_scheme(text); }, py::arg("text"));
  m.def("parse_scheme_file", &parse_scheme_file, py::arg("path"));
  m.def("print_scheme", &print_scheme, py::arg("scheme"));
  m.def("scheme_state", &scheme_state, py::arg("scheme"));
  m.def(
      "run_scheme", [](const SchemeIR& ir) { return compile_and_run(ir); }, py::arg("scheme"),
      py::call_guard<py::gil_scoped_release>());
  m.def("meets_expectation", &meets_expectation, py::arg("scheme"), py::arg("report"), py::arg("margin") = 0.0);
}
