#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "threshdet/detection.hpp"
#include "threshdet/random.hpp"
#include "threshdet/signal.hpp"

namespace threshdet {

/// Which barrier the simulated energy process is checked against.
/// real_two_sided: real-valued components, crossing when |phi| >= a, with an
/// optional Brownian-bridge correction per one-sided barrier (this is the
/// law the analytic series describes). complex_modulus: complex components
/// checked on the grid only; no exact bridge law exists for the modulus, so
/// this mode carries a documented discretization bias.
enum class BarrierMode { real_two_sided, complex_modulus };

const char* to_string(BarrierMode mode);

/// Full description of one Monte Carlo run. The initial field value is 0 in
/// every channel (zero-mean process with covariance min(s1,s2) B).
struct SimulationPlan {
  SignalModel signal;
  DetectorConfig detector;  // shared by all channels
  long trials = 0;
  double time_step = 0.0;  // h; adjusted to divide the window exactly
  std::uint64_t seed = 0;
  BarrierMode barrier_mode = BarrierMode::real_two_sided;
  bool bridge_correction = true;
  bool record_trace = false;

  void validate() const;  // ValidationError on violated invariants
};

/// Per-trial record for the optional trace stream. channel == -1 together
/// with negative gain/time marks a trial without a click.
struct TraceRecord {
  long trial = 0;
  int channel = -1;
  double gain = -1.0;
  double hitting_time = -1.0;

  bool operator==(const TraceRecord&) const = default;
};

struct EmpiricalClicks {
  std::vector<long> per_channel_clicks;
  long trials = 0;
  long total_clicks = 0;
  // per-pulse convention: clicks / trials
  std::vector<double> per_pulse_prob, per_pulse_stderr;
  // click-share convention: clicks / total clicks
  std::vector<double> click_share, click_share_stderr;
  std::vector<TraceRecord> trace;  // empty unless record_trace

  bool operator==(const EmpiricalClicks&) const = default;
};

/// Exact-increment sample path of a scalar Wiener process on the uniform
/// grid h, 2h, ..., window; value i is phi((i+1) h).
std::vector<double> simulate_wiener_path_real(double sigma2, double window, double h,
                                              RandomStream& rng);
std::vector<std::complex<double>> simulate_wiener_path_complex(double sigma2, double window,
                                                               double h, RandomStream& rng);

struct FirstPassage {
  bool hit = false;
  double time = 0.0;
};

/// First time |phi| reaches the barrier within the window, simulated on the
/// fly from rng. With bridge_correction (real mode only), crossings between
/// grid points are recovered by accepting each step with the Brownian-bridge
/// crossing probability exp(-2 (a -+ x_i)(a -+ x_{i+1}) / (sigma2 h)) per
/// one-sided barrier.
FirstPassage first_passage(double sigma2, double window, double h, double barrier,
                           BarrierMode mode, bool bridge_correction, RandomStream& rng);

/// Grid-only crossing scan of a precomputed path (test fixtures).
FirstPassage first_passage_on_grid(std::span<const double> path, double h, double barrier);
FirstPassage first_passage_on_grid(std::span<const std::complex<double>> path, double h,
                                   double barrier);

/// Hitting times of `trials` independent scalar pulses; +infinity marks
/// no crossing within the window. Entry i is fully determined by
/// (seed, stream i) regardless of the thread count.
std::vector<double> collect_hitting_times(double sigma2, double window, double h,
                                          double barrier, BarrierMode mode,
                                          bool bridge_correction, long trials,
                                          std::uint64_t seed, int threads = 0);

/// Full experiment: per trial, draw one gain per channel, set barriers
/// a_j = sqrt(E_d / g_j), run the m-channel process with covariance B and
/// award the click to the earliest-crossing channel (lowest index on ties).
/// Bit-identical output for a fixed plan regardless of `threads`.
EmpiricalClicks run_experiment(const SimulationPlan& plan, int threads = 0);

}  // namespace threshdet
