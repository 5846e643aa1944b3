#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "threshdet/detection.hpp"
#include "threshdet/monte_carlo.hpp"
#include "threshdet/signal.hpp"

namespace threshdet::experiment {

enum class Scenario {
  validate_hitting_law,
  fixed_gain_divergence,
  born_convergence_sweep,
  full_comparison,
};

const char* to_string(Scenario s);
Scenario scenario_from_string(const std::string& name);

/// Names of the user-declared units, echoed into every report. Only
/// dimensionless combinations enter the math.
struct UnitsSpec {
  std::string energy = "arb_energy";
  std::string time = "arb_time";
};

/// Either a list of epsilon values (realized by solving E_d = total_power *
/// window / eps at fixed window) or explicit (threshold, window) pairs.
struct SweepSpec {
  std::vector<double> epsilons;
  std::vector<std::pair<double, double>> threshold_window_pairs;
  bool empty() const { return epsilons.empty() && threshold_window_pairs.empty(); }
};

struct MonteCarloSpec {
  long trials = 100000;
  double time_step = 0.0;  // defaults to window/1e4 when 0
  std::uint64_t seed = 1;
  BarrierMode barrier_mode = BarrierMode::real_two_sided;
  bool bridge_correction = true;
  bool record_trace = false;
};

struct ExperimentConfig {
  Scenario scenario = Scenario::validate_hitting_law;
  UnitsSpec units;
  SignalModel signal = SignalModel::scalar(1.0);
  bool diagonalize_basis = false;  // rotate B into its eigenbasis first
  DetectorConfig detector{1.0, 1.0, GainModel::point_mass(1.0)};
  SweepSpec sweep;
  MonteCarloSpec monte_carlo;
  double ks_threshold = 0.01;  // pass/fail gate of validate_hitting_law
  std::string output_dir = ".";
  std::string output_prefix = "experiment";

  static ExperimentConfig parse_file(const std::filesystem::path& path);
  static ExperimentConfig parse(const nlohmann::json& j);

  /// Canonical serialized form: defaults materialized, keys sorted.
  nlohmann::json canonical() const;

  /// Cross-field invariants; ValidationError with a field path on failure.
  void validate() const;
};

}  // namespace threshdet::experiment
