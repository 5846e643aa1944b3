#include "threshdet/detection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "threshdet/errors.hpp"
#include "threshdet/quadrature.hpp"
#include "threshdet/special_functions.hpp"

namespace threshdet {

namespace {

// Relative floor of the alternating-series stopping rule for gain-averaged
// series. Tighter than the 1e-3 floor of the bare hitting series because
// Born-deviation sweeps resolve effects of order eps down to 1e-4.
constexpr double kGainSeriesRelStop = 1e-6;
constexpr int kMaxSeriesTerms = 20000;
constexpr double kTailMass = 1e-13;  // support truncation of the gain density

void merge_scale_points(std::vector<double>& breaks, double scale) {
  // characteristic widths of the erfc factor, so the initial subdivision
  // sees the integrand even when the density is much wider than it
  for (double z : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) breaks.push_back(z * scale);
  std::sort(breaks.begin(), breaks.end());
}

// One term of the eta-form series: \int rho_eta(l) erfc(c l) dl.
double eta_form_term(const GainModel& gain, double c, double abs_tol,
                     const std::vector<double>& base_breaks) {
  std::vector<double> breaks = base_breaks;
  merge_scale_points(breaks, 1.0 / c);
  const auto r = integrate_adaptive(
      [&](double l) { return gain.rho_eta(l) * erfc(c * l); },
      gain.eta_lower(kTailMass), gain.eta_upper(kTailMass), abs_tol, 0.0, breaks);
  return r.value;
}

// One term of the g-form series: \int rho_g(l) erfc(c / sqrt(l)) dl.
double g_form_term(const GainModel& gain, double c, double abs_tol,
                   const std::vector<double>& base_breaks) {
  std::vector<double> breaks = base_breaks;
  merge_scale_points(breaks, c * c);  // erfc argument ~1 at l = c^2
  const auto r = integrate_adaptive(
      [&](double l) { return gain.rho_g(l) * erfc(c / std::sqrt(l)); },
      gain.g_lower(kTailMass), gain.g_upper(kTailMass), abs_tol, 0.0, breaks);
  return r.value;
}

// Gain-averaged alternating series
//   2 sum_k (-1)^k <erfc over the gain distribution at order k>,
// with first_term_only truncating after k = 0.
SeriesValue gain_averaged_series(const GainModel& gain, double erfc_coeff, double tol,
                                 GainIntegration form, bool first_term_only) {
  if (gain.is_atom()) {
    const double x0 = erfc_coeff / std::sqrt(gain.atom_gain());
    if (first_term_only) return {2.0 * erfc(x0), 1, 2.0 * erfc(3.0 * x0)};
    return detail::alternating_erfc_series(x0, tol, 1e-3);
  }

  const std::vector<double> base_breaks =
      form == GainIntegration::eta_form ? gain.eta_breakpoints() : gain.g_breakpoints();
  double partial = 0.0;
  double prev_term = std::numeric_limits<double>::infinity();
  int k = 0;
  double omitted = 0.0;
  for (;; ++k) {
    const double c = (1.0 + 2.0 * k) * erfc_coeff;
    const double per_term_tol = tol / ((k + 1.0) * (k + 1.0));
    const double integral = form == GainIntegration::eta_form
                                ? eta_form_term(gain, c, per_term_tol, base_breaks)
                                : g_form_term(gain, c, per_term_tol, base_breaks);
    const double term = 2.0 * std::max(0.0, integral);
    if (term > prev_term + 2.0 * per_term_tol)
      throw ConsistencyError("gain_averaged_series: terms not decreasing");
    if (first_term_only && k == 1) {
      omitted = term;
      break;
    }
    if (!first_term_only && k > 0 &&
        (term < tol || term < kGainSeriesRelStop * std::fabs(partial))) {
      omitted = term;
      break;
    }
    if (k >= kMaxSeriesTerms) {
      std::ostringstream msg;
      msg << "gain_averaged_series: no convergence after " << k << " terms (last term "
          << term << ", partial sum " << partial << ")";
      throw NumericalError(msg.str());
    }
    partial += (k % 2 == 0) ? term : -term;
    prev_term = term;
  }
  return {partial, k, omitted};
}

SeriesValue clamp_probability(SeriesValue sv, double slack) {
  if (sv.value < -slack || sv.value > 1.0 + slack) {
    std::ostringstream msg;
    msg << "detection probability " << sv.value << " outside [0,1] beyond error bound " << slack;
    throw ConsistencyError(msg.str());
  }
  sv.value = std::min(1.0, std::max(0.0, sv.value));
  return sv;
}

void require_power(double sigma2, const char* what) {
  if (!(std::isfinite(sigma2) && sigma2 >= 0.0))
    throw DomainError(std::string(what) + ": sigma2 must be finite and >= 0");
}

}  // namespace

void DetectorConfig::validate() const {
  const auto bad = [](double x) { return !(std::isfinite(x) && x > 0.0); };
  if (bad(threshold_energy) || bad(window))
    throw DomainError("DetectorConfig: threshold_energy and window must be positive");
}

SeriesValue detection_prob_fixed_gain(const DetectorConfig& cfg, double sigma2) {
  cfg.validate();
  require_power(sigma2, "detection_prob_fixed_gain");
  if (!cfg.gain.is_atom())
    throw MisuseError("detection_prob_fixed_gain: gain model is not a point mass");
  if (sigma2 == 0.0) return {0.0, 1, 0.0};  // no signal, no crossing
  return hitting_cdf({sigma2, cfg.threshold_energy, cfg.gain.atom_gain(), cfg.window});
}

SeriesValue detection_prob_random_gain(const DetectorConfig& cfg, double sigma2, double tol,
                                       GainIntegration form) {
  cfg.validate();
  require_power(sigma2, "detection_prob_random_gain");
  if (!(std::isfinite(tol) && tol > 0.0))
    throw DomainError("detection_prob_random_gain: tol must be > 0");
  if (sigma2 == 0.0) return {0.0, 1, 0.0};
  const double coeff = std::sqrt(cfg.threshold_energy / (2.0 * sigma2 * cfg.window));
  SeriesValue sv = gain_averaged_series(cfg.gain, coeff, tol, form, false);
  return clamp_probability(sv, sv.truncation_bound + 10.0 * tol);
}

double detection_prob_rough(const DetectorConfig& cfg, double sigma2) {
  cfg.validate();
  require_power(sigma2, "detection_prob_rough");
  if (sigma2 == 0.0) return 0.0;
  const double eps = sigma2 * cfg.window / cfg.threshold_energy;
  if (cfg.gain.is_atom())
    return hitting_cdf_exponential_asymptotic(
        {sigma2, cfg.threshold_energy, cfg.gain.atom_gain(), cfg.window});
  std::vector<double> breaks = cfg.gain.eta_breakpoints();
  merge_scale_points(breaks, std::sqrt(eps));
  const auto r = integrate_adaptive(
      [&](double l) { return cfg.gain.f_eta(l) * gaussian_kernel(l, eps); },
      cfg.gain.eta_lower(kTailMass), cfg.gain.eta_upper(kTailMass), 1e-12, 1e-10, breaks);
  return 4.0 * eps * r.value;
}

ClickEstimate expected_clicks(const DetectorConfig& cfg, double sigma2, double run_duration,
                              ClickMethod method) {
  cfg.validate();
  require_power(sigma2, "expected_clicks");
  if (!(std::isfinite(run_duration) && run_duration >= cfg.window))
    throw DomainError("expected_clicks: run_duration must be >= window");

  const double windows = run_duration / cfg.window;
  double per_window = 0.0;
  switch (method) {
    case ClickMethod::full_series:
      per_window = cfg.gain.is_atom() ? detection_prob_fixed_gain(cfg, sigma2).value
                                      : detection_prob_random_gain(cfg, sigma2).value;
      break;
    case ClickMethod::first_term: {
      if (sigma2 > 0.0) {
        const double coeff = std::sqrt(cfg.threshold_energy / (2.0 * sigma2 * cfg.window));
        per_window = gain_averaged_series(cfg.gain, coeff, 1e-10,
                                          GainIntegration::eta_form, true)
                         .value;
      }
      break;
    }
    case ClickMethod::delta_limit:
      // 4 sigma2 T f_eta(0+) / E_d with the one-sided half-mass factor 1/2
      per_window = 2.0 * sigma2 * cfg.window * cfg.gain.f_eta_at_zero() / cfg.threshold_energy;
      break;
  }
  return {windows * std::min(1.0, per_window), run_duration, method};
}

namespace {

std::vector<double> normalized_channel_series(const DetectorConfig& cfg,
                                              std::span<const double> sigma2s, double tol,
                                              GainIntegration form, bool first_term_only) {
  cfg.validate();
  if (sigma2s.empty())
    throw DomainError("generalized Born: channel list must not be empty");
  for (double s : sigma2s) require_power(s, "generalized Born");
  if (std::all_of(sigma2s.begin(), sigma2s.end(), [](double s) { return s == 0.0; }))
    throw DomainError("generalized Born: all channel powers are zero");
  if (!(std::isfinite(tol) && tol > 0.0))
    throw DomainError("generalized Born: tol must be > 0");

  std::vector<double> weights(sigma2s.size(), 0.0);
  for (std::size_t j = 0; j < sigma2s.size(); ++j) {
    if (sigma2s[j] == 0.0) continue;
    const double coeff = std::sqrt(cfg.threshold_energy / (2.0 * sigma2s[j] * cfg.window));
    weights[j] = gain_averaged_series(cfg.gain, coeff, tol, form, first_term_only).value;
    weights[j] = std::max(0.0, weights[j]);
  }
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0))
    throw NumericalError(
        "generalized Born: every channel weight underflowed to zero; "
        "the thresholds are too far above the pulse energies");
  for (double& w : weights) w /= total;
  return weights;
}

}  // namespace

std::vector<double> generalized_born_probabilities(const DetectorConfig& cfg,
                                                   std::span<const double> sigma2s, double tol,
                                                   GainIntegration form) {
  return normalized_channel_series(cfg, sigma2s, tol, form, false);
}

std::vector<double> generalized_born_first_term(const DetectorConfig& cfg,
                                                std::span<const double> sigma2s, double tol,
                                                GainIntegration form) {
  return normalized_channel_series(cfg, sigma2s, tol, form, true);
}

}  // namespace threshdet
