#pragma once

#include <span>
#include <vector>

#include "threshdet/gain_models.hpp"
#include "threshdet/hitting_time.hpp"

namespace threshdet {

/// One threshold detector: discrimination threshold, interaction window and
/// the gain distribution of its amplification stage.
struct DetectorConfig {
  double threshold_energy;  // E_d
  double window;            // average signal-detector interaction time
  GainModel gain;

  void validate() const;
};

enum class ClickMethod { full_series, first_term, delta_limit };

/// Which variable the gain average integrates over. Both parameterizations
/// evaluate the same number; eta_form keeps the integrand Gaussian-tailed
/// and is the default, g_form integrates against the raw gain density.
enum class GainIntegration { eta_form, g_form };

struct ClickEstimate {
  double mean_clicks = 0.0;
  double run_duration = 0.0;
  ClickMethod method = ClickMethod::full_series;
};

/// Per-window detection probability for a deterministic (point-mass) gain;
/// exact reduction to the hitting-time series, no quadrature involved.
/// sigma2 == 0 returns probability zero. MisuseError for non-atom gains.
SeriesValue detection_prob_fixed_gain(const DetectorConfig& cfg, double sigma2);

/// Gain-averaged per-window detection probability
///   2 sum_k (-1)^k  \int rho_eta(l) erfc((1+2k) l sqrt(E_d/(2 sigma2 dt))) dl
/// evaluated by adaptive quadrature per term (absolute tolerance
/// tol/(k+1)^2) with alternating-series truncation across k. Point-mass
/// gains collapse to the fixed-gain series exactly.
SeriesValue detection_prob_random_gain(const DetectorConfig& cfg, double sigma2,
                                       double tol = 1e-10,
                                       GainIntegration form = GainIntegration::eta_form);

/// The rough kernel approximation of the per-window probability,
///   4 eps \int f_eta(l) D_eps(l) dl   with eps = sigma2 dt / E_d
/// (for a point mass this is the exponential asymptotic form). Quantifies
/// how coarse the approximation behind the plain Born rule is.
double detection_prob_rough(const DetectorConfig& cfg, double sigma2);

/// Expected clicks over run_duration: (T/dt) * per-window probability for
/// the series methods; the delta_limit method uses the small-signal law
/// 2 sigma2 T f_eta(0+) / E_d (one-sided half-mass convention) and requires
/// a gain model with a valid Born limit. Estimates are capped at one click
/// per window.
ClickEstimate expected_clicks(const DetectorConfig& cfg, double sigma2,
                              double run_duration, ClickMethod method);

/// Generalized Born rule: P_j proportional to the gain-averaged series of
/// channel j, normalized over channels. All detectors share cfg (threshold,
/// window, gain distribution). Channels with zero power get P_j = 0;
/// all-zero powers are a DomainError. The output is a probability vector.
std::vector<double> generalized_born_probabilities(
    const DetectorConfig& cfg, std::span<const double> sigma2s, double tol = 1e-10,
    GainIntegration form = GainIntegration::eta_form);

/// Same with only the k = 0 series term kept in numerator and denominator.
std::vector<double> generalized_born_first_term(
    const DetectorConfig& cfg, std::span<const double> sigma2s, double tol = 1e-10,
    GainIntegration form = GainIntegration::eta_form);

}  // namespace threshdet
