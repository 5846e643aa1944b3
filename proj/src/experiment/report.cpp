#include "threshdet/experiment/report.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "threshdet/errors.hpp"

namespace threshdet::experiment {

std::string format_double(double x) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", x);
  return buffer;
}

std::string table_to_csv(const Table& table) {
  std::ostringstream out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out << ',';
    out << table.columns[c];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size())
      throw ConsistencyError("table_to_csv: ragged row in table '" + table.name + "'");
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      out << format_double(row[c]);
    }
    out << '\n';
  }
  return out.str();
}

Table table_from_csv(const std::string& name, const std::string& csv) {
  Table table;
  table.name = name;
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("table_from_csv: empty input");
  std::istringstream header(line);
  std::string cell;
  while (std::getline(header, cell, ',')) table.columns.push_back(cell);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row_in(line);
    std::vector<double> row;
    while (std::getline(row_in, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
    if (row.size() != table.columns.size())
      throw ValidationError("table_from_csv: ragged row in '" + name + "'");
    table.rows.push_back(std::move(row));
  }
  return table;
}

nlohmann::json report_to_json(const ExperimentReport& report) {
  nlohmann::json j;
  j["scenario"] = report.scenario;
  j["seed"] = report.seed;
  j["config"] = report.config_echo;
  j["passed"] = report.passed;
  j["summary"] = report.summary;
  nlohmann::json tables = nlohmann::json::array();
  for (const auto& t : report.tables)
    tables.push_back({{"name", t.name}, {"columns", t.columns}, {"rows", t.rows}});
  j["tables"] = tables;
  return j;
}

ExperimentReport report_from_json(const nlohmann::json& j) {
  ExperimentReport report;
  report.scenario = j.at("scenario").get<std::string>();
  report.seed = j.at("seed").get<std::uint64_t>();
  report.config_echo = j.at("config");
  report.passed = j.at("passed").get<bool>();
  for (const auto& [key, value] : j.at("summary").items())
    report.summary[key] = value.get<double>();
  for (const auto& body : j.at("tables")) {
    Table t;
    t.name = body.at("name").get<std::string>();
    t.columns = body.at("columns").get<std::vector<std::string>>();
    t.rows = body.at("rows").get<std::vector<std::vector<double>>>();
    report.tables.push_back(std::move(t));
  }
  return report;
}

ExperimentReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("report: cannot open file " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("report: ") + e.what());
  }
  try {
    return report_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("report: malformed report file: ") + e.what());
  }
}

std::vector<std::filesystem::path> write_report_files(const ExperimentReport& report,
                                                      const std::filesystem::path& dir,
                                                      const std::string& prefix,
                                                      double runtime_seconds) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("output: cannot create directory " + dir.string() + ": " + ec.message());

  std::vector<fs::path> written;
  const auto write_text = [&](const fs::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("output: cannot open " + path.string() + " for writing");
    out << body;
    if (!out) throw Error("output: write failed for " + path.string());
    written.push_back(path);
  };

  for (const auto& t : report.tables)
    write_text(dir / (prefix + "_" + t.name + ".csv"), table_to_csv(t));
  write_text(dir / (prefix + "_report.json"), report_to_json(report).dump(2) + "\n");

  // runtime metadata, isolated so that report bodies stay byte-reproducible
  const auto now = std::chrono::system_clock::now();
  nlohmann::json meta;
  meta["runtime_seconds"] = runtime_seconds;
  meta["unix_timestamp"] =
      std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();
  write_text(dir / (prefix + "_meta.json"), meta.dump(2) + "\n");
  return written;
}

void check_distribution(const std::vector<double>& values, double tol) {
  double sum = 0.0;
  for (double v : values) {
    if (v < -tol) throw ConsistencyError("distribution column has a negative entry");
    sum += v;
  }
  if (std::fabs(sum - 1.0) > tol)
    throw ConsistencyError("distribution column sums to " + format_double(sum) +
                           ", expected 1");
}

}  // namespace threshdet::experiment
