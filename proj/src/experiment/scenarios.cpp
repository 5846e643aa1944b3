#include "threshdet/experiment/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "threshdet/errors.hpp"

namespace threshdet::experiment {

namespace {

// per-sweep-point seed derivation, fixed across releases
std::uint64_t sweep_seed(std::uint64_t base, std::size_t index) {
  return base + 1000003ULL * static_cast<std::uint64_t>(index);
}

double default_time_step(const ExperimentConfig& cfg) {
  return cfg.monte_carlo.time_step > 0.0 ? cfg.monte_carlo.time_step
                                         : cfg.detector.window / 1e4;
}

std::string unit1() { return "(1)"; }

// Channel powers after the optional basis rotation.
struct ChannelSetup {
  SignalModel signal;
  std::vector<double> powers;
  std::vector<double> born;
};

ChannelSetup channel_setup(const ExperimentConfig& cfg) {
  SignalModel signal = cfg.signal;
  if (cfg.diagonalize_basis && !signal.is_scalar()) {
    const auto& b = signal.covariance();
    signal = SignalModel::multichannel(decompose_signal(b, diagonalizing_basis(b)));
  }
  ChannelSetup setup{signal, channel_powers(signal.covariance()), {}};
  const auto rho = density_operator(signal.covariance());
  setup.born.resize(setup.powers.size());
  for (int j = 0; j < signal.channels(); ++j)
    setup.born[static_cast<std::size_t>(j)] = born_probability(rho, j);
  return setup;
}

// Kolmogorov-Smirnov distance between hitting times censored at the window
// and the analytic law, evaluated where the supremum can live: at the jumps
// of the empirical CDF and at the window end.
double censored_ks(std::vector<double> times, long trials, double sigma2, double threshold,
                   double gain, double window) {
  std::vector<double> hits;
  hits.reserve(times.size());
  for (double t : times)
    if (std::isfinite(t)) hits.push_back(t);
  std::sort(hits.begin(), hits.end());
  const double n = static_cast<double>(trials);
  double ks = 0.0;
  for (std::size_t i = 0; i < hits.size(); ++i) {
    const double f = hitting_cdf({sigma2, threshold, gain, hits[i]}).value;
    ks = std::max(ks, std::fabs(static_cast<double>(i + 1) / n - f));
    ks = std::max(ks, std::fabs(static_cast<double>(i) / n - f));
  }
  const double f_end = hitting_cdf({sigma2, threshold, gain, window}).value;
  ks = std::max(ks, std::fabs(static_cast<double>(hits.size()) / n - f_end));
  return ks;
}

ExperimentReport base_report(const ExperimentConfig& cfg) {
  ExperimentReport report;
  report.scenario = to_string(cfg.scenario);
  report.seed = cfg.monte_carlo.seed;
  report.config_echo = cfg.canonical();
  return report;
}

ExperimentReport run_validate_hitting_law(const ExperimentConfig& cfg, int threads) {
  if (!cfg.signal.is_scalar())
    throw ValidationError("validate_hitting_law: requires a scalar signal (sigma2)");
  const double sigma2 = cfg.signal.power(0);
  const double gain = cfg.detector.gain.atom_gain();

  // sweep over epsilon values (threshold recomputed) or explicit pairs;
  // otherwise a single run at the configured detector
  std::vector<std::pair<double, double>> runs;  // (threshold, window)
  for (double eps : cfg.sweep.epsilons)
    runs.emplace_back(sigma2 * cfg.detector.window / eps, cfg.detector.window);
  for (const auto& p : cfg.sweep.threshold_window_pairs) runs.push_back(p);
  if (runs.empty()) runs.emplace_back(cfg.detector.threshold_energy, cfg.detector.window);

  ExperimentReport report = base_report(cfg);
  Table curve{"hitting_law",
              {"eps_gain" + unit1(), "t(" + cfg.units.time + ")", "analytic_cdf" + unit1(),
               "empirical_cdf" + unit1()},
              {}};
  Table summary{"hitting_law_summary",
                {"eps_gain" + unit1(), "ks_distance" + unit1(), "ks_threshold" + unit1(),
                 "trials" + unit1(), "passed" + unit1()},
                {}};

  double worst_ks = 0.0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto [threshold, window] = runs[i];
    const double eps_gain = sigma2 * window * gain / threshold;
    const double h = cfg.monte_carlo.time_step > 0.0 ? cfg.monte_carlo.time_step : window / 1e4;
    const double barrier = std::sqrt(threshold / gain);
    const auto times = collect_hitting_times(sigma2, window, h, barrier,
                                             cfg.monte_carlo.barrier_mode,
                                             cfg.monte_carlo.bridge_correction,
                                             cfg.monte_carlo.trials,
                                             sweep_seed(cfg.monte_carlo.seed, i), threads);
    // empirical and analytic CDF on a uniform grid for the plot table
    const int grid = 200;
    std::vector<double> sorted(times);
    std::sort(sorted.begin(), sorted.end());
    for (int k = 1; k <= grid; ++k) {
      const double t = window * k / grid;
      const double analytic = hitting_cdf({sigma2, threshold, gain, t}).value;
      const auto upper = std::upper_bound(sorted.begin(), sorted.end(), t);
      const double empirical =
          static_cast<double>(upper - sorted.begin()) / static_cast<double>(times.size());
      curve.rows.push_back({eps_gain, t, analytic, empirical});
    }
    const double ks =
        censored_ks(times, cfg.monte_carlo.trials, sigma2, threshold, gain, window);
    worst_ks = std::max(worst_ks, ks);
    summary.rows.push_back({eps_gain, ks, cfg.ks_threshold,
                            static_cast<double>(cfg.monte_carlo.trials),
                            ks < cfg.ks_threshold ? 1.0 : 0.0});
  }
  report.tables = {curve, summary};
  report.summary["ks_distance_max"] = worst_ks;
  report.passed = worst_ks < cfg.ks_threshold;
  return report;
}

// Shared by the two analytic sweep scenarios: per epsilon, the generalized
// Born vector next to the plain Born weights.
ExperimentReport run_born_sweep(const ExperimentConfig& cfg, bool expect_convergence) {
  const ChannelSetup setup = channel_setup(cfg);
  const std::size_t m = setup.powers.size();
  if (m < 2)
    throw ValidationError("sweep scenarios need at least two channels (empty or single "
                          "channel list)");
  const double total_power = setup.signal.total_power();

  ExperimentReport report = base_report(cfg);
  Table detail{"sweep_detail",
               {"epsilon" + unit1(), "channel" + unit1(), "p_analytic" + unit1(),
                "p_born" + unit1()},
               {}};
  Table convergence{expect_convergence ? "convergence" : "divergence", {}, {}};
  if (expect_convergence) {
    convergence.columns = {"epsilon" + unit1(), "P_1_analytic" + unit1(),
                           "P_1_born" + unit1(), "deviation" + unit1()};
  } else {
    convergence.columns = {"epsilon" + unit1(), "p_max" + unit1(), "p_born_max" + unit1(),
                           "deviation" + unit1()};
  }

  const std::size_t argmax = static_cast<std::size_t>(
      std::max_element(setup.powers.begin(), setup.powers.end()) - setup.powers.begin());

  // eps values realize E_d = total_power * window / eps; explicit
  // (threshold, window) pairs are swept as given
  std::vector<std::pair<double, double>> runs;
  for (double eps : cfg.sweep.epsilons)
    runs.emplace_back(total_power * cfg.detector.window / eps, cfg.detector.window);
  for (const auto& p : cfg.sweep.threshold_window_pairs) runs.push_back(p);

  std::vector<double> deviations, p_argmax_rest;
  for (const auto& [threshold, window] : runs) {
    const double eps = total_power * window / threshold;
    DetectorConfig det = cfg.detector;
    det.threshold_energy = threshold;
    det.window = window;
    const auto p = generalized_born_probabilities(det, setup.powers);
    check_distribution(p);
    double max_dev = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      detail.rows.push_back({eps, static_cast<double>(j), p[j], setup.born[j]});
      max_dev = std::max(max_dev, std::fabs(p[j] - setup.born[j]));
    }
    deviations.push_back(max_dev);
    p_argmax_rest.push_back(1.0 - p[argmax]);
    if (expect_convergence) {
      convergence.rows.push_back({eps, p[0], setup.born[0], max_dev});
    } else {
      convergence.rows.push_back({eps, p[argmax], setup.born[argmax], p[argmax] -
                                  setup.born[argmax]});
    }
  }

  bool pass = true;
  if (expect_convergence) {
    for (std::size_t i = 1; i < deviations.size(); ++i)
      pass = pass && deviations[i] < deviations[i - 1];
    report.summary["deviation_final"] = deviations.back();
  } else {
    // the dominant channel must keep absorbing probability: its complement
    // shrinks strictly until it saturates at zero
    for (std::size_t i = 1; i < p_argmax_rest.size(); ++i) {
      const bool saturated = p_argmax_rest[i] == 0.0 && p_argmax_rest[i - 1] == 0.0;
      pass = pass && (p_argmax_rest[i] < p_argmax_rest[i - 1] || saturated);
    }
    pass = pass && p_argmax_rest.back() < p_argmax_rest.front();
    report.summary["p_argmax_final"] = 1.0 - p_argmax_rest.back();
  }
  report.passed = pass;
  report.tables = {detail, convergence};
  return report;
}

ExperimentReport run_full_comparison(const ExperimentConfig& cfg, int threads) {
  const ChannelSetup setup = channel_setup(cfg);
  const std::size_t m = setup.powers.size();

  std::vector<double> p_full = generalized_born_probabilities(cfg.detector, setup.powers);
  std::vector<double> p_first = generalized_born_first_term(cfg.detector, setup.powers);
  check_distribution(p_full);
  check_distribution(p_first);

  SimulationPlan plan{setup.signal, cfg.detector, cfg.monte_carlo.trials,
                      default_time_step(cfg), cfg.monte_carlo.seed,
                      cfg.monte_carlo.barrier_mode, cfg.monte_carlo.bridge_correction,
                      cfg.monte_carlo.record_trace};
  const auto clicks = run_experiment(plan, threads);

  ExperimentReport report = base_report(cfg);
  Table table{"comparison",
              {"channel" + unit1(), "power(" + cfg.units.energy + "/" + cfg.units.time + ")",
               "p_born" + unit1(), "p_generalized" + unit1(), "p_first_term" + unit1(),
               "p_empirical_share" + unit1(), "share_stderr" + unit1(),
               "p_empirical_per_pulse" + unit1(), "per_pulse_stderr" + unit1(),
               "p_window_full" + unit1(), "p_window_first" + unit1(),
               "p_window_rough" + unit1(), "dev_born" + unit1(), "dev_empirical" + unit1(),
               "within_three_sigma" + unit1()},
              {}};

  bool pass = true;
  for (std::size_t j = 0; j < m; ++j) {
    const double sigma2 = setup.powers[j];
    const double window_full =
        cfg.detector.gain.is_atom()
            ? detection_prob_fixed_gain(cfg.detector, sigma2).value
            : detection_prob_random_gain(cfg.detector, sigma2).value;
    double window_first = 0.0;
    if (sigma2 > 0.0)
      window_first = expected_clicks(cfg.detector, sigma2, cfg.detector.window,
                                     ClickMethod::first_term)
                          .mean_clicks;
    double window_rough = std::numeric_limits<double>::quiet_NaN();
    try {
      window_rough = detection_prob_rough(cfg.detector, sigma2);
    } catch (const RegimeError&) {
      // outside eps*g < 1 the rough exponential form stays undefined
    }
    const double share = clicks.click_share[j];
    const double share_se = clicks.click_share_stderr[j];
    const double dev_born = std::fabs(p_full[j] - setup.born[j]);
    const double dev_emp = std::fabs(share - p_full[j]);
    const bool within = dev_emp <= 3.0 * std::max(share_se, 1e-300);
    pass = pass && within;
    table.rows.push_back({static_cast<double>(j), sigma2, setup.born[j], p_full[j], p_first[j],
                          share, share_se, clicks.per_pulse_prob[j],
                          clicks.per_pulse_stderr[j], window_full, window_first, window_rough,
                          dev_born, dev_emp, within ? 1.0 : 0.0});
  }
  report.tables = {table};

  if (cfg.monte_carlo.record_trace) {
    Table trace{"trace",
                {"trial" + unit1(), "channel" + unit1(), "gain" + unit1(),
                 "hitting_time(" + cfg.units.time + ")"},
                {}};
    trace.rows.reserve(clicks.trace.size());
    for (const auto& rec : clicks.trace)
      trace.rows.push_back({static_cast<double>(rec.trial), static_cast<double>(rec.channel),
                            rec.gain, rec.hitting_time});
    report.tables.push_back(std::move(trace));
  }

  report.summary["total_clicks"] = static_cast<double>(clicks.total_clicks);
  report.summary["trials"] = static_cast<double>(clicks.trials);
  report.passed = pass && clicks.total_clicks > 0;
  return report;
}

}  // namespace

ExperimentReport run_scenario(const ExperimentConfig& cfg, int threads) {
  cfg.validate();
  switch (cfg.scenario) {
    case Scenario::validate_hitting_law:
      return run_validate_hitting_law(cfg, threads);
    case Scenario::fixed_gain_divergence:
      return run_born_sweep(cfg, /*expect_convergence=*/false);
    case Scenario::born_convergence_sweep:
      return run_born_sweep(cfg, /*expect_convergence=*/true);
    case Scenario::full_comparison:
      return run_full_comparison(cfg, threads);
  }
  throw ValidationError("run_scenario: unknown scenario");
}

namespace {

const Table& find_table(const ExperimentReport& report, const std::string& name) {
  for (const auto& t : report.tables)
    if (t.name == name) return t;
  throw ValidationError("report has no table '" + name + "' (wrong scenario for this figure?)");
}

int find_column(const Table& t, const std::string& prefix) {
  for (std::size_t c = 0; c < t.columns.size(); ++c)
    if (t.columns[c].rfind(prefix, 0) == 0) return static_cast<int>(c);
  throw ValidationError("table '" + t.name + "' has no column '" + prefix + "'");
}

Table select_columns(const Table& source, const std::string& name,
                     const std::vector<std::string>& prefixes) {
  Table out{name, {}, {}};
  std::vector<int> indices;
  for (const auto& p : prefixes) {
    const int c = find_column(source, p);
    indices.push_back(c);
    out.columns.push_back(source.columns[static_cast<std::size_t>(c)]);
  }
  for (const auto& row : source.rows) {
    std::vector<double> r;
    r.reserve(indices.size());
    for (int c : indices) r.push_back(row[static_cast<std::size_t>(c)]);
    out.rows.push_back(std::move(r));
  }
  return out;
}

}  // namespace

Table emit_plot_table(const ExperimentReport& report, const std::string& figure_key) {
  if (figure_key == "hitting_law") {
    const Table& curve = find_table(report, "hitting_law");
    Table out = select_columns(curve, "fig_hitting_law",
                               {"t(", "analytic_cdf", "empirical_cdf"});
    // restrict to the first sweep point so t stays monotone
    const int eps_col = find_column(curve, "eps_gain");
    if (!curve.rows.empty()) {
      const double first = curve.rows.front()[static_cast<std::size_t>(eps_col)];
      Table filtered{out.name, out.columns, {}};
      for (std::size_t i = 0; i < curve.rows.size(); ++i)
        if (curve.rows[i][static_cast<std::size_t>(eps_col)] == first)
          filtered.rows.push_back(out.rows[i]);
      return filtered;
    }
    return out;
  }
  if (figure_key == "convergence_sweep")
    return select_columns(find_table(report, "convergence"), "fig_convergence_sweep",
                          {"epsilon", "P_1_analytic", "P_1_born", "deviation"});
  if (figure_key == "divergence_sweep")
    return select_columns(find_table(report, "divergence"), "fig_divergence_sweep",
                          {"epsilon", "p_max", "p_born_max", "deviation"});
  if (figure_key == "comparison")
    return select_columns(find_table(report, "comparison"), "fig_comparison",
                          {"channel", "p_generalized", "p_born", "p_empirical_share",
                           "dev_empirical"});
  throw ValidationError("unknown figure key '" + figure_key +
                        "' (known: hitting_law, convergence_sweep, divergence_sweep, "
                        "comparison)");
}

}  // namespace threshdet::experiment
