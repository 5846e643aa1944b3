#include "threshdet/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

#include "threshdet/errors.hpp"

namespace threshdet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Skip the bridge acceptance draw when the crossing probability is below
// exp(-41) ~ 1.6e-18: such an event is unobservable at 53-bit uniform
// resolution, and the skip keeps trials deterministic because the decision
// depends only on already-drawn path values.
constexpr double kMinBridgeExponent = -41.0;

int resolve_threads(int threads, long trials) {
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  return static_cast<int>(std::min<long>(threads, std::max<long>(1, trials)));
}

// Uniform grid covering the window exactly.
struct Grid {
  long steps;
  double h;
};

Grid make_grid(double window, double h) {
  const long steps = std::max<long>(1, std::llround(window / h));
  return {steps, window / static_cast<double>(steps)};
}

// fn(worker_index, trial_index) over [0, trials), blocks of consecutive
// trials per worker. Every trial owns its random stream, so the partition
// cannot change any result, only the wall time.
template <typename Fn>
void parallel_trials(long trials, int workers, const Fn& fn) {
  if (workers <= 1) {
    for (long t = 0; t < trials; ++t) fn(0, t);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  const long chunk = (trials + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const long begin = static_cast<long>(w) * chunk;
    const long end = std::min(trials, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, w, begin, end] {
      for (long t = begin; t < end; ++t) fn(w, t);
    });
  }
  for (auto& worker : pool) worker.join();
}

// Brownian-bridge crossing probability of either one-sided barrier between
// two grid values strictly inside (-a, a).
inline bool bridge_crossing(double a, double x_prev, double x_next, double inv_var,
                            RandomStream& rng) {
  const double e_up = -2.0 * (a - x_prev) * (a - x_next) * inv_var;
  const double e_dn = -2.0 * (a + x_prev) * (a + x_next) * inv_var;
  if (e_up <= kMinBridgeExponent && e_dn <= kMinBridgeExponent) return false;
  const double p_up = e_up > kMinBridgeExponent ? std::exp(e_up) : 0.0;
  const double p_dn = e_dn > kMinBridgeExponent ? std::exp(e_dn) : 0.0;
  return rng.uniform() < p_up + p_dn - p_up * p_dn;
}

}  // namespace

const char* to_string(BarrierMode mode) {
  return mode == BarrierMode::real_two_sided ? "real_two_sided" : "complex_modulus";
}

void SimulationPlan::validate() const {
  detector.validate();
  if (trials < 1) throw ValidationError("SimulationPlan: trials must be >= 1");
  if (!(std::isfinite(time_step) && time_step > 0.0))
    throw ValidationError("SimulationPlan: time_step must be positive");
  if (time_step > detector.window / 100.0)
    throw ValidationError("SimulationPlan: time_step must not exceed window/100");
  if (barrier_mode == BarrierMode::real_two_sided && !signal.covariance().is_real())
    throw ValidationError(
        "SimulationPlan: real_two_sided mode requires a real covariance matrix");
}

std::vector<double> simulate_wiener_path_real(double sigma2, double window, double h,
                                              RandomStream& rng) {
  if (!(sigma2 > 0.0 && window >= h && h > 0.0))
    throw DomainError("simulate_wiener_path: need sigma2 > 0 and window >= h > 0");
  const Grid grid = make_grid(window, h);
  const double step_sd = std::sqrt(sigma2 * grid.h);
  std::vector<double> path(static_cast<std::size_t>(grid.steps));
  double x = 0.0;
  for (auto& value : path) {
    x += step_sd * rng.normal();
    value = x;
  }
  return path;
}

std::vector<std::complex<double>> simulate_wiener_path_complex(double sigma2, double window,
                                                               double h, RandomStream& rng) {
  if (!(sigma2 > 0.0 && window >= h && h > 0.0))
    throw DomainError("simulate_wiener_path: need sigma2 > 0 and window >= h > 0");
  const Grid grid = make_grid(window, h);
  // independent real and imaginary parts of variance sigma2 h / 2 each,
  // so that E|phi(s)|^2 = sigma2 s
  const double step_sd = std::sqrt(sigma2 * grid.h / 2.0);
  std::vector<std::complex<double>> path(static_cast<std::size_t>(grid.steps));
  double re = 0.0, im = 0.0;
  for (auto& value : path) {
    re += step_sd * rng.normal();
    im += step_sd * rng.normal();
    value = {re, im};
  }
  return path;
}

FirstPassage first_passage(double sigma2, double window, double h, double barrier,
                           BarrierMode mode, bool bridge_correction, RandomStream& rng) {
  if (!(barrier > 0.0)) throw DomainError("first_passage: barrier must be > 0");
  if (!(sigma2 > 0.0 && window >= h && h > 0.0))
    throw DomainError("first_passage: need sigma2 > 0 and window >= h > 0");
  const Grid grid = make_grid(window, h);

  if (mode == BarrierMode::complex_modulus) {
    const double step_sd = std::sqrt(sigma2 * grid.h / 2.0);
    const double barrier2 = barrier * barrier;
    double re = 0.0, im = 0.0;
    for (long i = 0; i < grid.steps; ++i) {
      re += step_sd * rng.normal();
      im += step_sd * rng.normal();
      if (re * re + im * im >= barrier2) return {true, (i + 1) * grid.h};
    }
    return {false, kInf};
  }

  const double step_sd = std::sqrt(sigma2 * grid.h);
  const double inv_var = 1.0 / (sigma2 * grid.h);
  double x = 0.0;
  for (long i = 0; i < grid.steps; ++i) {
    const double x_next = x + step_sd * rng.normal();
    if (std::fabs(x_next) >= barrier) return {true, (i + 1) * grid.h};
    if (bridge_correction && bridge_crossing(barrier, x, x_next, inv_var, rng))
      return {true, (i + 1) * grid.h};
    x = x_next;
  }
  return {false, kInf};
}

FirstPassage first_passage_on_grid(std::span<const double> path, double h, double barrier) {
  if (!(barrier > 0.0)) throw DomainError("first_passage: barrier must be > 0");
  for (std::size_t i = 0; i < path.size(); ++i)
    if (std::fabs(path[i]) >= barrier) return {true, static_cast<double>(i + 1) * h};
  return {false, kInf};
}

FirstPassage first_passage_on_grid(std::span<const std::complex<double>> path, double h,
                                   double barrier) {
  if (!(barrier > 0.0)) throw DomainError("first_passage: barrier must be > 0");
  for (std::size_t i = 0; i < path.size(); ++i)
    if (std::norm(path[i]) >= barrier * barrier) return {true, static_cast<double>(i + 1) * h};
  return {false, kInf};
}

std::vector<double> collect_hitting_times(double sigma2, double window, double h,
                                          double barrier, BarrierMode mode,
                                          bool bridge_correction, long trials,
                                          std::uint64_t seed, int threads) {
  if (trials < 1) throw ValidationError("collect_hitting_times: trials must be >= 1");
  std::vector<double> times(static_cast<std::size_t>(trials), kInf);
  parallel_trials(trials, resolve_threads(threads, trials), [&](int, long t) {
    RandomStream rng(seed, static_cast<std::uint64_t>(t));
    times[static_cast<std::size_t>(t)] =
        first_passage(sigma2, window, h, barrier, mode, bridge_correction, rng).time;
  });
  return times;
}

namespace {

void finalize_statistics(EmpiricalClicks& out) {
  const double n = static_cast<double>(out.trials);
  const std::size_t m = out.per_channel_clicks.size();
  out.total_clicks = 0;
  for (long c : out.per_channel_clicks) out.total_clicks += c;
  out.per_pulse_prob.resize(m);
  out.per_pulse_stderr.resize(m);
  out.click_share.assign(m, 0.0);
  out.click_share_stderr.assign(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    const double p = static_cast<double>(out.per_channel_clicks[j]) / n;
    out.per_pulse_prob[j] = p;
    out.per_pulse_stderr[j] = std::sqrt(p * (1.0 - p) / n);
    if (out.total_clicks > 0) {
      const double share = static_cast<double>(out.per_channel_clicks[j]) /
                           static_cast<double>(out.total_clicks);
      out.click_share[j] = share;
      out.click_share_stderr[j] =
          std::sqrt(share * (1.0 - share) / static_cast<double>(out.total_clicks));
    }
  }
}

}  // namespace

EmpiricalClicks run_experiment(const SimulationPlan& plan, int threads) {
  plan.validate();
  const int m = plan.signal.channels();
  if (m > 64) throw ValidationError("run_experiment: more than 64 channels is unsupported");
  const Grid grid = make_grid(plan.detector.window, plan.time_step);
  const bool complex_mode = plan.barrier_mode == BarrierMode::complex_modulus;

  // One factorization of B per run: increments A xi sqrt(h) with A = B^{1/2}
  // realize the cross-channel covariance h B.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(plan.signal.covariance().matrix());
  const Eigen::MatrixXcd sqrt_b = es.eigenvectors() *
                                  es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                                  es.eigenvectors().adjoint();
  const Eigen::MatrixXd sqrt_b_real = sqrt_b.real();

  std::vector<double> powers(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) powers[static_cast<std::size_t>(j)] = plan.signal.power(j);

  const int workers = resolve_threads(threads, plan.trials);
  std::vector<std::vector<long>> counts(static_cast<std::size_t>(workers),
                                        std::vector<long>(static_cast<std::size_t>(m), 0));
  std::vector<TraceRecord> trace;
  if (plan.record_trace) trace.resize(static_cast<std::size_t>(plan.trials));

  const double sqrt_h = std::sqrt(grid.h);
  const double e_d = plan.detector.threshold_energy;

  parallel_trials(plan.trials, workers, [&](int worker, long t) {
    auto& my_counts = counts[static_cast<std::size_t>(worker)];
    RandomStream rng(plan.seed, static_cast<std::uint64_t>(t));

    // gains first, in channel order; then the path
    double gains[64], barriers[64];
    for (int j = 0; j < m; ++j) {
      gains[j] = plan.detector.gain.sample_gain(rng);
      barriers[j] = std::sqrt(e_d / gains[j]);
    }

    double re[64] = {0.0}, im[64] = {0.0};
    double xi[128];
    int hit_channel = -1;
    double hit_time = -1.0;

    for (long i = 0; i < grid.steps && hit_channel < 0; ++i) {
      if (complex_mode) {
        for (int j = 0; j < 2 * m; ++j) xi[j] = rng.normal() / std::numbers::sqrt2;
        for (int j = 0; j < m; ++j) {
          std::complex<double> dz = 0.0;
          for (int k = 0; k < m; ++k)
            dz += sqrt_b(j, k) * std::complex<double>(xi[2 * k], xi[2 * k + 1]);
          re[j] += dz.real() * sqrt_h;
          im[j] += dz.imag() * sqrt_h;
        }
        for (int j = 0; j < m; ++j) {
          if (re[j] * re[j] + im[j] * im[j] >= barriers[j] * barriers[j]) {
            hit_channel = j;
            hit_time = (i + 1) * grid.h;
            break;
          }
        }
      } else {
        for (int j = 0; j < m; ++j) xi[j] = rng.normal();
        for (int j = 0; j < m; ++j) {
          double dz = 0.0;
          for (int k = 0; k < m; ++k) dz += sqrt_b_real(j, k) * xi[k];
          const double x_prev = re[j];
          const double x_next = x_prev + dz * sqrt_h;
          bool crossed = std::fabs(x_next) >= barriers[j];
          if (!crossed && plan.bridge_correction && powers[static_cast<std::size_t>(j)] > 0.0)
            crossed = bridge_crossing(barriers[j], x_prev, x_next,
                                      1.0 / (powers[static_cast<std::size_t>(j)] * grid.h), rng);
          re[j] = x_next;
          if (crossed && hit_channel < 0) {
            hit_channel = j;  // lowest index wins simultaneous crossings
            hit_time = (i + 1) * grid.h;
          }
        }
      }
    }

    if (hit_channel >= 0) ++my_counts[static_cast<std::size_t>(hit_channel)];
    if (plan.record_trace) {
      auto& rec = trace[static_cast<std::size_t>(t)];
      rec.trial = t;
      rec.channel = hit_channel;
      rec.gain = hit_channel >= 0 ? gains[hit_channel] : -1.0;
      rec.hitting_time = hit_channel >= 0 ? hit_time : -1.0;
    }
  });

  EmpiricalClicks out;
  out.trials = plan.trials;
  out.per_channel_clicks.assign(static_cast<std::size_t>(m), 0);
  for (const auto& c : counts)
    for (std::size_t j = 0; j < static_cast<std::size_t>(m); ++j)
      out.per_channel_clicks[j] += c[j];
  out.trace = std::move(trace);
  finalize_statistics(out);
  return out;
}

}  // namespace threshdet
