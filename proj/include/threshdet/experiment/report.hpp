#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace threshdet::experiment {

/// One rectangular block of numbers. Column headers carry the unit in
/// parentheses, e.g. "t(ns)"; "(1)" marks dimensionless quantities.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  bool operator==(const Table&) const = default;
};

/// Everything a scenario run produces. Reproducible byte-for-byte from
/// config + seed: no timestamps live here (runtime metadata is written to a
/// separate sidecar file).
struct ExperimentReport {
  std::string scenario;
  std::uint64_t seed = 0;
  nlohmann::json config_echo;
  std::vector<Table> tables;
  std::map<std::string, double> summary;  // scalar results, e.g. ks_distance
  bool passed = true;                      // scenario-level verdict
};

/// Full decimal precision (17 significant digits) so that CSV bodies are
/// diffable and doubles round-trip exactly.
std::string format_double(double x);

std::string table_to_csv(const Table& table);
Table table_from_csv(const std::string& name, const std::string& csv);

nlohmann::json report_to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const nlohmann::json& j);
ExperimentReport load_report(const std::filesystem::path& path);

/// Writes <prefix>_<table>.csv per table, <prefix>_report.json (timestamp
/// free) and <prefix>_meta.json (timestamp and runtime, isolated).
/// Returns the written file paths.
std::vector<std::filesystem::path> write_report_files(const ExperimentReport& report,
                                                      const std::filesystem::path& dir,
                                                      const std::string& prefix,
                                                      double runtime_seconds);

/// Asserts that `values` is a probability vector within tolerance;
/// ConsistencyError otherwise. Used before any distribution column is
/// written into a report.
void check_distribution(const std::vector<double>& values, double tol = 1e-9);

}  // namespace threshdet::experiment
