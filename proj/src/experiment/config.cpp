#include "threshdet/experiment/config.hpp"

#include <fstream>

#include "threshdet/errors.hpp"

namespace threshdet::experiment {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ValidationError("config: " + where + ": " + what);
}

double get_number(const json& j, const std::string& where, const char* key) {
  if (!j.contains(key)) fail(where, std::string("missing field '") + key + "'");
  if (!j.at(key).is_number()) fail(where + "." + key, "expected a number");
  return j.at(key).get<double>();
}

double get_number_or(const json& j, const std::string& where, const char* key,
                     double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) fail(where + "." + key, "expected a number");
  return j.at(key).get<double>();
}

std::string get_string_or(const json& j, const std::string& where, const char* key,
                          const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_string()) fail(where + "." + key, "expected a string");
  return j.at(key).get<std::string>();
}

bool get_bool_or(const json& j, const std::string& where, const char* key, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_boolean()) fail(where + "." + key, "expected a boolean");
  return j.at(key).get<bool>();
}

GainModel parse_gain(const json& j) {
  const std::string where = "detector.gain";
  const std::string kind = get_string_or(j, where, "kind", "");
  if (kind.empty()) fail(where, "missing field 'kind'");
  try {
    if (kind == "point_mass") return GainModel::point_mass(get_number(j, where, "gain"));
    if (kind == "dynode_compound")
      return GainModel::dynode_compound(get_number(j, where, "collection_fraction"),
                                        get_number(j, where, "mean_yield"),
                                        static_cast<int>(get_number(j, where, "stages")));
    if (kind == "lognormal")
      return GainModel::lognormal(get_number(j, where, "log_mean"),
                                  get_number(j, where, "log_sd"));
    if (kind == "exponential") return GainModel::exponential(get_number(j, where, "rate"));
    if (kind == "rayleigh_eta") return GainModel::rayleigh_eta(get_number(j, where, "scale"));
  } catch (const DomainError& e) {
    fail(where, e.what());
  }
  fail(where + ".kind", "unknown gain kind '" + kind + "'");
}

SignalModel parse_signal(const json& j) {
  const std::string where = "signal";
  const bool has_scalar = j.contains("sigma2");
  const bool has_matrix = j.contains("covariance");
  if (has_scalar == has_matrix)
    fail(where, "exactly one of 'sigma2' or 'covariance' is required");
  if (has_scalar) {
    try {
      return SignalModel::scalar(get_number(j, where, "sigma2"));
    } catch (const DomainError& e) {
      fail(where + ".sigma2", e.what());
    }
  }
  const json& cov = j.at("covariance");
  if (!cov.contains("dim") || !cov.at("dim").is_number_integer())
    fail(where + ".covariance", "missing integer field 'dim'");
  const int dim = cov.at("dim").get<int>();
  if (dim < 1) fail(where + ".covariance.dim", "dim must be >= 1 (empty channel list)");
  if (!cov.contains("entries") || !cov.at("entries").is_array())
    fail(where + ".covariance", "missing row-major 'entries' array");
  const auto& entries = cov.at("entries");
  if (static_cast<int>(entries.size()) != dim * dim)
    fail(where + ".covariance.entries", "need dim^2 entries");
  std::vector<std::complex<double>> values;
  values.reserve(entries.size());
  for (const auto& e : entries) {
    if (e.is_number()) {
      values.emplace_back(e.get<double>(), 0.0);
    } else if (e.is_array() && e.size() == 2 && e.at(0).is_number() && e.at(1).is_number()) {
      values.emplace_back(e.at(0).get<double>(), e.at(1).get<double>());
    } else {
      fail(where + ".covariance.entries", "entries are numbers or [re, im] pairs");
    }
  }
  try {
    return SignalModel::multichannel(CovarianceOperator::from_row_major(dim, values));
  } catch (const DomainError& e) {
    fail(where + ".covariance", e.what());
  }
}

}  // namespace

const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::validate_hitting_law: return "validate_hitting_law";
    case Scenario::fixed_gain_divergence: return "fixed_gain_divergence";
    case Scenario::born_convergence_sweep: return "born_convergence_sweep";
    case Scenario::full_comparison: return "full_comparison";
  }
  return "unknown";
}

Scenario scenario_from_string(const std::string& name) {
  if (name == "validate_hitting_law") return Scenario::validate_hitting_law;
  if (name == "fixed_gain_divergence") return Scenario::fixed_gain_divergence;
  if (name == "born_convergence_sweep") return Scenario::born_convergence_sweep;
  if (name == "full_comparison") return Scenario::full_comparison;
  fail("scenario", "unknown scenario '" + name + "'");
}

ExperimentConfig ExperimentConfig::parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot open file " + path.string());
  json j;
  try {
    j = json::parse(in);  // nlohmann reports line and byte position on failure
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  return parse(j);
}

ExperimentConfig ExperimentConfig::parse(const json& j) {
  ExperimentConfig cfg;
  if (!j.is_object()) fail("root", "config must be a JSON object");
  cfg.scenario = scenario_from_string(get_string_or(j, "root", "scenario", ""));

  if (j.contains("units")) {
    cfg.units.energy = get_string_or(j.at("units"), "units", "energy", cfg.units.energy);
    cfg.units.time = get_string_or(j.at("units"), "units", "time", cfg.units.time);
  }

  if (!j.contains("signal")) fail("root", "missing section 'signal'");
  cfg.signal = parse_signal(j.at("signal"));
  cfg.diagonalize_basis = get_bool_or(j.at("signal"), "signal", "diagonalize_basis", false);

  if (!j.contains("detector")) fail("root", "missing section 'detector'");
  const json& det = j.at("detector");
  cfg.detector.threshold_energy = get_number(det, "detector", "threshold_energy");
  cfg.detector.window = get_number(det, "detector", "window");
  if (!det.contains("gain")) fail("detector", "missing section 'gain'");
  cfg.detector.gain = parse_gain(det.at("gain"));

  if (j.contains("sweep")) {
    const json& sweep = j.at("sweep");
    if (sweep.contains("epsilons")) {
      if (!sweep.at("epsilons").is_array()) fail("sweep.epsilons", "expected an array");
      for (const auto& e : sweep.at("epsilons")) {
        if (!e.is_number()) fail("sweep.epsilons", "expected numbers");
        cfg.sweep.epsilons.push_back(e.get<double>());
      }
    }
    if (sweep.contains("threshold_window_pairs")) {
      for (const auto& p : sweep.at("threshold_window_pairs")) {
        if (!p.is_array() || p.size() != 2)
          fail("sweep.threshold_window_pairs", "each entry is a [threshold, window] pair");
        cfg.sweep.threshold_window_pairs.emplace_back(p.at(0).get<double>(),
                                                      p.at(1).get<double>());
      }
    }
  }

  if (j.contains("monte_carlo")) {
    const json& mc = j.at("monte_carlo");
    cfg.monte_carlo.trials = static_cast<long>(
        get_number_or(mc, "monte_carlo", "trials", static_cast<double>(cfg.monte_carlo.trials)));
    cfg.monte_carlo.time_step = get_number_or(mc, "monte_carlo", "time_step", 0.0);
    cfg.monte_carlo.seed =
        static_cast<std::uint64_t>(get_number_or(mc, "monte_carlo", "seed", 1.0));
    const std::string mode = get_string_or(mc, "monte_carlo", "barrier_mode", "real_two_sided");
    if (mode == "real_two_sided")
      cfg.monte_carlo.barrier_mode = BarrierMode::real_two_sided;
    else if (mode == "complex_modulus")
      cfg.monte_carlo.barrier_mode = BarrierMode::complex_modulus;
    else
      fail("monte_carlo.barrier_mode", "unknown mode '" + mode + "'");
    cfg.monte_carlo.bridge_correction =
        get_bool_or(mc, "monte_carlo", "bridge_correction", true);
    cfg.monte_carlo.record_trace = get_bool_or(mc, "monte_carlo", "record_trace", false);
  }

  if (j.contains("output")) {
    cfg.output_dir = get_string_or(j.at("output"), "output", "dir", cfg.output_dir);
    cfg.output_prefix = get_string_or(j.at("output"), "output", "prefix", cfg.output_prefix);
  }
  cfg.ks_threshold = get_number_or(j, "root", "ks_threshold", cfg.ks_threshold);

  cfg.validate();
  return cfg;
}

nlohmann::json ExperimentConfig::canonical() const {
  json j;
  j["scenario"] = to_string(scenario);
  j["units"] = {{"energy", units.energy}, {"time", units.time}};

  json signal_json;
  if (signal.is_scalar()) {
    signal_json["sigma2"] = signal.power(0);
  } else {
    json entries = json::array();
    const auto& m = signal.covariance().matrix();
    for (int i = 0; i < signal.channels(); ++i)
      for (int k = 0; k < signal.channels(); ++k)
        entries.push_back({m(i, k).real(), m(i, k).imag()});
    signal_json["covariance"] = {{"dim", signal.channels()}, {"entries", entries}};
  }
  signal_json["diagonalize_basis"] = diagonalize_basis;
  j["signal"] = signal_json;

  json gain;
  gain["kind"] = threshdet::to_string(detector.gain.kind());
  for (const auto& [name, value] : detector.gain.parameters()) gain[name] = value;
  j["detector"] = {{"threshold_energy", detector.threshold_energy},
                   {"window", detector.window},
                   {"gain", gain}};

  json sweep_json;
  sweep_json["epsilons"] = sweep.epsilons;
  json pairs = json::array();
  for (const auto& [t, w] : sweep.threshold_window_pairs) pairs.push_back({t, w});
  sweep_json["threshold_window_pairs"] = pairs;
  j["sweep"] = sweep_json;

  j["monte_carlo"] = {{"trials", monte_carlo.trials},
                      {"time_step", monte_carlo.time_step},
                      {"seed", monte_carlo.seed},
                      {"barrier_mode", threshdet::to_string(monte_carlo.barrier_mode)},
                      {"bridge_correction", monte_carlo.bridge_correction},
                      {"record_trace", monte_carlo.record_trace}};
  j["output"] = {{"dir", output_dir}, {"prefix", output_prefix}};
  j["ks_threshold"] = ks_threshold;
  return j;
}

void ExperimentConfig::validate() const {
  try {
    detector.validate();
  } catch (const DomainError& e) {
    throw ValidationError(std::string("config: detector: ") + e.what());
  }
  const bool sweep_scenario = scenario == Scenario::fixed_gain_divergence ||
                              scenario == Scenario::born_convergence_sweep;
  if (sweep_scenario) {
    if (sweep.empty())
      throw ValidationError(
          "config: sweep: sweep scenarios need epsilons or threshold_window_pairs");
    for (double eps : sweep.epsilons)
      if (!(eps > 0.0 && eps < 1.0))
        throw ValidationError("config: sweep.epsilons: values must lie in (0, 1)");
  }
  if (scenario == Scenario::born_convergence_sweep && !detector.gain.born_limit_valid())
    throw ValidationError(
        "config: detector.gain: born_convergence_sweep needs a gain model with a valid "
        "Born limit (rho_eta(l)/l must tend to a finite nonzero value)");
  if (scenario == Scenario::validate_hitting_law && !detector.gain.is_atom())
    throw ValidationError(
        "config: detector.gain: validate_hitting_law compares against the fixed-gain "
        "series; use a point_mass gain");
  if (monte_carlo.trials < 1)
    throw ValidationError("config: monte_carlo.trials: must be >= 1");
  if (monte_carlo.time_step < 0.0)
    throw ValidationError("config: monte_carlo.time_step: must be >= 0");
}

}  // namespace threshdet::experiment
