#pragma once

namespace threshdet {

/// Parameters of the threshold-crossing law for Wiener-process energy.
struct HittingLawParams {
  double sigma2 = 0.0;            // signal power
  double threshold_energy = 0.0;  // detection threshold E_d
  double gain = 0.0;              // amplification factor g
  double window = 0.0;            // interaction window

  /// Energy barrier on the field amplitude: a = sqrt(E_d / g).
  double barrier() const;

  /// The dimensionless product eps*g = sigma2 * window * gain / E_d that the
  /// law depends on exclusively.
  double epsilon_gain() const;

  void validate() const;  // DomainError unless every field is positive finite
};

/// Value of a truncated alternating series together with the magnitude of
/// the first omitted term (a rigorous bound for series with terms that
/// decrease in magnitude).
struct SeriesValue {
  double value = 0.0;
  int terms_used = 0;
  double truncation_bound = 0.0;
};

inline constexpr double kDefaultSeriesTol = 1e-12;

/// P(tau <= window) for the two-sided barrier law:
///   2 * sum_k (-1)^k erfc((1+2k) sqrt(E_d / (2 sigma2 window g))).
/// Terms are added while the next one is >= tol and >= 1e-3 of the partial
/// sum; the result is clamped to [0, 1] (exceeding the bound by more than
/// the truncation error raises ConsistencyError rather than clamping
/// silently).
SeriesValue hitting_cdf(const HittingLawParams& params, double tol = kDefaultSeriesTol);

/// First-term approximation 2 erfc(1/sqrt(2 eps g)); accurate for eps*g << 1,
/// meaningless (can exceed 1) once eps*g is of order one.
double hitting_cdf_first_term(const HittingLawParams& params);

/// Rough exponential asymptotic 2 sqrt(2 eps g / pi) exp(-1/(2 eps g)).
/// Requires eps*g < 1 (RegimeError otherwise).
double hitting_cdf_exponential_asymptotic(const HittingLawParams& params);

namespace detail {
/// Shared series core: 2 * sum_k (-1)^k erfc((1+2k) x) with the truncation
/// rule above; rel_stop is the relative floor of the stopping rule.
SeriesValue alternating_erfc_series(double x, double tol, double rel_stop);
}  // namespace detail

}  // namespace threshdet
