#pragma once

#include <string>

#include "threshdet/experiment/config.hpp"
#include "threshdet/experiment/report.hpp"

namespace threshdet::experiment {

/// Executes the configured scenario. All randomness derives from the config
/// seed; the returned report is identical for identical configs regardless
/// of the thread count.
ExperimentReport run_scenario(const ExperimentConfig& config, int threads = 0);

/// Extracts one plot-ready table from a report. Known figure keys:
/// "hitting_law", "convergence_sweep", "divergence_sweep", "comparison".
Table emit_plot_table(const ExperimentReport& report, const std::string& figure_key);

}  // namespace threshdet::experiment
