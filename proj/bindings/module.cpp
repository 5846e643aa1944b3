#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "threshdet/detection.hpp"
#include "threshdet/errors.hpp"
#include "threshdet/gain_models.hpp"
#include "threshdet/hitting_time.hpp"
#include "threshdet/monte_carlo.hpp"
#include "threshdet/random.hpp"
#include "threshdet/signal.hpp"
#include "threshdet/special_functions.hpp"

namespace py = pybind11;
using namespace threshdet;

namespace {

using ComplexRows = std::vector<std::vector<std::complex<double>>>;

Eigen::MatrixXcd matrix_from_rows(const ComplexRows& rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXcd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) != n)
      throw DomainError("matrix rows must form a square matrix");
    for (Eigen::Index j = 0; j < n; ++j)
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return m;
}

ComplexRows rows_from_matrix(const Eigen::MatrixXcd& m) {
  ComplexRows rows(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    auto& row = rows[static_cast<std::size_t>(i)];
    row.resize(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      row[static_cast<std::size_t>(j)] = m(i, j);
  }
  return rows;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Threshold-detector click statistics for Wiener-process signals: "
            "hitting-time laws, random-gain averaging, generalized Born "
            "probabilities and the Monte Carlo cross-check engine.";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<RegimeError>(m, "RegimeError", PyExc_ValueError);
  py::register_exception<MisuseError>(m, "MisuseError", PyExc_TypeError);
  py::register_exception<LimitUndefinedError>(m, "LimitUndefinedError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<ConsistencyError>(m, "ConsistencyError", PyExc_RuntimeError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);

  // special functions
  py::class_<AsymptoticSeriesResult>(m, "AsymptoticSeriesResult")
      .def_readonly("value", &AsymptoticSeriesResult::value)
      .def_readonly("terms_used", &AsymptoticSeriesResult::terms_used)
      .def_readonly("error_bound", &AsymptoticSeriesResult::error_bound)
      .def("__repr__", [](const AsymptoticSeriesResult& r) {
        return "AsymptoticSeriesResult(value=" + std::to_string(r.value) +
               ", terms_used=" + std::to_string(r.terms_used) + ")";
      });
  m.def("std_normal_cdf", &std_normal_cdf, py::arg("x"));
  m.def("std_normal_quantile", &std_normal_quantile, py::arg("p"));
  m.def("erf", &threshdet::erf, py::arg("x"));
  m.def("erfc", &threshdet::erfc, py::arg("x"));
  m.def("erfcx", &threshdet::erfcx, py::arg("x"));
  m.def("erfc_asymptotic", &erfc_asymptotic, py::arg("x"), py::arg("max_terms"));
  m.def("gaussian_kernel", &gaussian_kernel, py::arg("lam"), py::arg("epsilon"));

  // hitting-time law
  py::class_<HittingLawParams>(m, "HittingLawParams")
      .def(py::init([](double sigma2, double threshold_energy, double gain, double window) {
             return HittingLawParams{sigma2, threshold_energy, gain, window};
           }),
           py::arg("sigma2"), py::arg("threshold_energy"), py::arg("gain"), py::arg("window"))
      .def_readwrite("sigma2", &HittingLawParams::sigma2)
      .def_readwrite("threshold_energy", &HittingLawParams::threshold_energy)
      .def_readwrite("gain", &HittingLawParams::gain)
      .def_readwrite("window", &HittingLawParams::window)
      .def_property_readonly("barrier", &HittingLawParams::barrier)
      .def_property_readonly("epsilon_gain", &HittingLawParams::epsilon_gain);
  py::class_<SeriesValue>(m, "SeriesValue")
      .def_readonly("value", &SeriesValue::value)
      .def_readonly("terms_used", &SeriesValue::terms_used)
      .def_readonly("truncation_bound", &SeriesValue::truncation_bound)
      .def("__repr__", [](const SeriesValue& sv) {
        return "SeriesValue(value=" + std::to_string(sv.value) +
               ", terms_used=" + std::to_string(sv.terms_used) + ")";
      });
  m.def("hitting_cdf", &hitting_cdf, py::arg("params"), py::arg("tol") = kDefaultSeriesTol);
  m.def("hitting_cdf_first_term", &hitting_cdf_first_term, py::arg("params"));
  m.def("hitting_cdf_exponential_asymptotic", &hitting_cdf_exponential_asymptotic,
        py::arg("params"));

  // gain models
  py::enum_<GainKind>(m, "GainKind")
      .value("point_mass", GainKind::point_mass)
      .value("dynode_compound", GainKind::dynode_compound)
      .value("lognormal", GainKind::lognormal)
      .value("exponential", GainKind::exponential)
      .value("rayleigh_eta", GainKind::rayleigh_eta);
  py::class_<EtaDensity>(m, "EtaDensity")
      .def_readonly("source", &EtaDensity::source)
      .def_readonly("f_eta_at_zero", &EtaDensity::f_eta_at_zero)
      .def_readonly("born_limit_valid", &EtaDensity::born_limit_valid);
  py::class_<GainModel>(m, "GainModel")
      .def_static("point_mass", &GainModel::point_mass, py::arg("gain"))
      .def_static("dynode_compound", &GainModel::dynode_compound,
                  py::arg("collection_fraction"), py::arg("mean_yield"), py::arg("stages"))
      .def_static("lognormal", &GainModel::lognormal, py::arg("log_mean"), py::arg("log_sd"))
      .def_static("exponential", &GainModel::exponential, py::arg("rate"))
      .def_static("rayleigh_eta", &GainModel::rayleigh_eta, py::arg("scale"))
      .def_property_readonly("kind", &GainModel::kind)
      .def_property_readonly("is_atom", &GainModel::is_atom)
      .def_property_readonly("born_limit_valid", &GainModel::born_limit_valid)
      .def("atom_gain", &GainModel::atom_gain)
      .def("rho_g", &GainModel::rho_g, py::arg("lam"))
      .def("rho_eta", &GainModel::rho_eta, py::arg("lam"))
      .def("f_eta", &GainModel::f_eta, py::arg("lam"))
      .def("f_eta_at_zero", &GainModel::f_eta_at_zero)
      .def("eta_density", &GainModel::eta_density)
      .def("mean_gain", &GainModel::mean_gain)
      .def("cdf_g", &GainModel::cdf_g, py::arg("g"))
      .def("quantile_g", &GainModel::quantile_g, py::arg("p"))
      .def("sample_gains",
           [](const GainModel& model, long n, std::uint64_t seed, std::uint64_t stream_id) {
             if (n < 0) throw DomainError("sample_gains: n must be >= 0");
             RandomStream rng(seed, stream_id);
             std::vector<double> out(static_cast<std::size_t>(n));
             for (auto& g : out) g = model.sample_gain(rng);
             return out;
           },
           py::arg("n"), py::arg("seed"), py::arg("stream_id") = 0);

  // detection probabilities
  py::enum_<ClickMethod>(m, "ClickMethod")
      .value("full_series", ClickMethod::full_series)
      .value("first_term", ClickMethod::first_term)
      .value("delta_limit", ClickMethod::delta_limit);
  py::enum_<GainIntegration>(m, "GainIntegration")
      .value("eta_form", GainIntegration::eta_form)
      .value("g_form", GainIntegration::g_form);
  py::class_<DetectorConfig>(m, "DetectorConfig")
      .def(py::init([](double threshold_energy, double window, const GainModel& gain) {
             return DetectorConfig{threshold_energy, window, gain};
           }),
           py::arg("threshold_energy"), py::arg("window"), py::arg("gain"))
      .def_readwrite("threshold_energy", &DetectorConfig::threshold_energy)
      .def_readwrite("window", &DetectorConfig::window)
      .def_readwrite("gain", &DetectorConfig::gain);
  py::class_<ClickEstimate>(m, "ClickEstimate")
      .def_readonly("mean_clicks", &ClickEstimate::mean_clicks)
      .def_readonly("run_duration", &ClickEstimate::run_duration)
      .def_readonly("method", &ClickEstimate::method);
  m.def("detection_prob_fixed_gain", &detection_prob_fixed_gain, py::arg("config"),
        py::arg("sigma2"));
  m.def("detection_prob_random_gain", &detection_prob_random_gain, py::arg("config"),
        py::arg("sigma2"), py::arg("tol") = 1e-10,
        py::arg("form") = GainIntegration::eta_form);
  m.def("detection_prob_rough", &detection_prob_rough, py::arg("config"), py::arg("sigma2"));
  m.def("expected_clicks", &expected_clicks, py::arg("config"), py::arg("sigma2"),
        py::arg("run_duration"), py::arg("method"));
  m.def(
      "generalized_born_probabilities",
      [](const DetectorConfig& cfg, const std::vector<double>& sigma2s, double tol,
         GainIntegration form) { return generalized_born_probabilities(cfg, sigma2s, tol, form); },
      py::arg("config"), py::arg("sigma2s"), py::arg("tol") = 1e-10,
      py::arg("form") = GainIntegration::eta_form);
  m.def(
      "generalized_born_first_term",
      [](const DetectorConfig& cfg, const std::vector<double>& sigma2s, double tol,
         GainIntegration form) { return generalized_born_first_term(cfg, sigma2s, tol, form); },
      py::arg("config"), py::arg("sigma2s"), py::arg("tol") = 1e-10,
      py::arg("form") = GainIntegration::eta_form);

  // multichannel signal
  py::class_<CovarianceOperator>(m, "CovarianceOperator")
      .def(py::init([](const ComplexRows& rows) {
             return CovarianceOperator(matrix_from_rows(rows));
           }),
           py::arg("rows"))
      .def_property_readonly("dim", &CovarianceOperator::dim)
      .def_property_readonly("trace", &CovarianceOperator::trace)
      .def_property_readonly("eigenvalues_clipped", &CovarianceOperator::eigenvalues_clipped)
      .def_property_readonly("is_real", &CovarianceOperator::is_real)
      .def("rows", [](const CovarianceOperator& b) { return rows_from_matrix(b.matrix()); });
  py::class_<DensityOperator>(m, "DensityOperator")
      .def_property_readonly("dim", &DensityOperator::dim)
      .def("rows", [](const DensityOperator& r) { return rows_from_matrix(r.matrix()); });
  m.def("channel_powers", &channel_powers, py::arg("covariance"));
  m.def("density_operator", &density_operator, py::arg("covariance"));
  m.def("born_probability", &born_probability, py::arg("rho"), py::arg("channel"));
  m.def(
      "decompose_signal",
      [](const CovarianceOperator& b, const ComplexRows& basis) {
        return decompose_signal(b, matrix_from_rows(basis));
      },
      py::arg("covariance"), py::arg("basis"));
  m.def(
      "diagonalizing_basis",
      [](const CovarianceOperator& b) { return rows_from_matrix(diagonalizing_basis(b)); },
      py::arg("covariance"));

  py::class_<SignalModel>(m, "SignalModel")
      .def_static("scalar", &SignalModel::scalar, py::arg("sigma2"))
      .def_static("multichannel", &SignalModel::multichannel, py::arg("covariance"))
      .def_property_readonly("is_scalar", &SignalModel::is_scalar)
      .def_property_readonly("channels", &SignalModel::channels)
      .def_property_readonly("total_power", &SignalModel::total_power)
      .def("power", &SignalModel::power, py::arg("channel"));

  // Monte Carlo engine
  py::enum_<BarrierMode>(m, "BarrierMode")
      .value("real_two_sided", BarrierMode::real_two_sided)
      .value("complex_modulus", BarrierMode::complex_modulus);
  py::class_<SimulationPlan>(m, "SimulationPlan")
      .def(py::init([](const SignalModel& signal, const DetectorConfig& detector, long trials,
                       double time_step, std::uint64_t seed, BarrierMode mode, bool bridge,
                       bool trace) {
             return SimulationPlan{signal, detector, trials, time_step,
                                   seed,   mode,     bridge, trace};
           }),
           py::arg("signal"), py::arg("detector"), py::arg("trials"), py::arg("time_step"),
           py::arg("seed"), py::arg("barrier_mode") = BarrierMode::real_two_sided,
           py::arg("bridge_correction") = true, py::arg("record_trace") = false)
      .def_readwrite("signal", &SimulationPlan::signal)
      .def_readwrite("detector", &SimulationPlan::detector)
      .def_readwrite("trials", &SimulationPlan::trials)
      .def_readwrite("time_step", &SimulationPlan::time_step)
      .def_readwrite("seed", &SimulationPlan::seed)
      .def_readwrite("barrier_mode", &SimulationPlan::barrier_mode)
      .def_readwrite("bridge_correction", &SimulationPlan::bridge_correction)
      .def_readwrite("record_trace", &SimulationPlan::record_trace)
      .def("validate", &SimulationPlan::validate);
  py::class_<TraceRecord>(m, "TraceRecord")
      .def_readonly("trial", &TraceRecord::trial)
      .def_readonly("channel", &TraceRecord::channel)
      .def_readonly("gain", &TraceRecord::gain)
      .def_readonly("hitting_time", &TraceRecord::hitting_time);
  py::class_<EmpiricalClicks>(m, "EmpiricalClicks")
      .def_readonly("per_channel_clicks", &EmpiricalClicks::per_channel_clicks)
      .def_readonly("trials", &EmpiricalClicks::trials)
      .def_readonly("total_clicks", &EmpiricalClicks::total_clicks)
      .def_readonly("per_pulse_prob", &EmpiricalClicks::per_pulse_prob)
      .def_readonly("per_pulse_stderr", &EmpiricalClicks::per_pulse_stderr)
      .def_readonly("click_share", &EmpiricalClicks::click_share)
      .def_readonly("click_share_stderr", &EmpiricalClicks::click_share_stderr)
      .def_readonly("trace", &EmpiricalClicks::trace);
  m.def("run_experiment", &run_experiment, py::arg("plan"), py::arg("threads") = 0,
        py::call_guard<py::gil_scoped_release>());
  m.def("collect_hitting_times", &collect_hitting_times, py::arg("sigma2"), py::arg("window"),
        py::arg("time_step"), py::arg("barrier"), py::arg("barrier_mode"),
        py::arg("bridge_correction"), py::arg("trials"), py::arg("seed"),
        py::arg("threads") = 0, py::call_guard<py::gil_scoped_release>());

#ifdef VERSION_INFO
#define STRINGIFY(x) #x
#define MACRO_STRINGIFY(x) STRINGIFY(x)
  m.attr("__version__") = MACRO_STRINGIFY(VERSION_INFO);
#else
  m.attr("__version__") = "0.1.0";
#endif
}
