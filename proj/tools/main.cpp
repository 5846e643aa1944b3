#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "threshdet/errors.hpp"
#include "threshdet/experiment/config.hpp"
#include "threshdet/experiment/report.hpp"
#include "threshdet/experiment/scenarios.hpp"

namespace {

namespace ex = threshdet::experiment;

// Exit-code contract, stable across releases:
//   0 success, 1 validation failure, 2 numerical failure, 3 I/O failure.
enum ExitCode : int { kOk = 0, kValidation = 1, kNumerical = 2, kIo = 3 };

int thread_count(int cli_threads) {
  if (cli_threads > 0) return cli_threads;
  if (const char* env = std::getenv("THRESHDET_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 0;  // library default: hardware concurrency
}

ex::ExperimentConfig load_config(const std::string& path, long seed_override,
                                 const std::string& output_dir_override) {
  auto cfg = ex::ExperimentConfig::parse_file(path);
  if (seed_override >= 0) cfg.monte_carlo.seed = static_cast<std::uint64_t>(seed_override);
  if (!output_dir_override.empty()) cfg.output_dir = output_dir_override;
  return cfg;
}

int run_command(const std::string& config_path, long seed_override,
                const std::string& output_dir, int threads) {
  const auto cfg = load_config(config_path, seed_override, output_dir);
  const auto start = std::chrono::steady_clock::now();
  const auto report = ex::run_scenario(cfg, thread_count(threads));
  const double runtime =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const auto written =
      ex::write_report_files(report, cfg.output_dir, cfg.output_prefix, runtime);
  for (const auto& path : written) std::cout << "wrote " << path.string() << "\n";
  for (const auto& [key, value] : report.summary)
    std::cout << key << " = " << ex::format_double(value) << "\n";
  std::cout << "scenario " << report.scenario << ": "
            << (report.passed ? "PASS" : "FAIL") << "\n";
  return report.passed ? kOk : kValidation;
}

int validate_command(const std::string& config_path) {
  const auto cfg = ex::ExperimentConfig::parse_file(config_path);
  std::cout << cfg.canonical().dump(2) << "\n";
  return kOk;
}

int emit_plot_command(const std::string& report_path, const std::string& figure_key,
                      const std::string& output_dir) {
  const auto report = ex::load_report(report_path);
  const auto table = ex::emit_plot_table(report, figure_key);
  const std::filesystem::path dir = output_dir.empty() ? "." : output_dir;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw threshdet::Error("output: cannot create directory " + dir.string());
  const auto path = dir / (table.name + ".csv");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw threshdet::Error("output: cannot open " + path.string());
  out << ex::table_to_csv(table);
  if (!out) throw threshdet::Error("output: write failed for " + path.string());
  std::cout << "wrote " << path.string() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"threshold-detector click statistics: analytic laws vs Monte Carlo"};
  app.require_subcommand(1);

  std::string config_path, report_path, figure_key, output_dir;
  long seed_override = -1;
  int threads = 0;

  auto* run = app.add_subcommand("run", "execute the scenario described by a config file");
  run->add_option("config", config_path, "JSON config file")->required();
  run->add_option("--seed-override", seed_override, "replace the config seed");
  run->add_option("--threads", threads, "worker threads (default: hardware, or THRESHDET_THREADS)");
  run->add_option("--output-dir", output_dir, "replace the config output directory");

  auto* validate = app.add_subcommand("validate", "parse a config and print its canonical form");
  validate->add_option("config", config_path, "JSON config file")->required();

  auto* emit = app.add_subcommand("emit-plot", "extract a plot-ready CSV from a report");
  emit->add_option("report", report_path, "report JSON written by 'run'")->required();
  emit->add_option("figure", figure_key,
                   "figure key: hitting_law | convergence_sweep | divergence_sweep | comparison")
      ->required();
  emit->add_option("--output-dir", output_dir, "directory for the CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kValidation;
  }

  try {
    if (run->parsed()) return run_command(config_path, seed_override, output_dir, threads);
    if (validate->parsed()) return validate_command(config_path);
    if (emit->parsed()) return emit_plot_command(report_path, figure_key, output_dir);
  } catch (const threshdet::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const threshdet::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const threshdet::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const threshdet::ConsistencyError& e) {
    std::cerr << "internal consistency error: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kIo;
  } catch (const threshdet::Error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kIo;
  }
  return kValidation;
}
