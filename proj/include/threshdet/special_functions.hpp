#pragma once

namespace threshdet {

/// Result of a truncated asymptotic (divergent) series evaluation.
/// For an alternating series with terms decreasing in magnitude the true
/// value differs from `value` by at most `error_bound`, the magnitude of the
/// first omitted term.
struct AsymptoticSeriesResult {
  double value = 0.0;
  int terms_used = 0;
  double error_bound = 0.0;
};

/// Standard normal CDF. Absolute error below 1e-15 for |x| <= 8.
double std_normal_cdf(double x);

/// Inverse of std_normal_cdf on (0, 1). Acklam's rational approximation
/// polished with one Halley step; used for quantile-based support cutoffs.
double std_normal_quantile(double p);

/// Error function, relative error at machine-precision level.
double erf(double x);

/// Complementary error function. Relative error <= 1e-14 throughout the
/// range where erfc is representable in double precision (x below ~26.5;
/// beyond that the true value underflows and 0 is returned).
double erfc(double x);

/// Scaled complementary error function exp(x^2) * erfc(x).
double erfcx(double x);

/// Divergent large-x expansion
///   erfc(x) ~ e^{-x^2}/(x sqrt(pi)) * sum_n (-1)^n (2n-1)!! / (2x^2)^n,
/// truncated at the optimal point (just before the first term whose
/// magnitude exceeds its predecessor) or after max_terms terms, whichever
/// comes first. Requires x > 0.
AsymptoticSeriesResult erfc_asymptotic(double x, int max_terms);

/// Gaussian delta-sequence kernel D_eps(lambda) = e^{-lambda^2/(2 eps)} / sqrt(2 pi eps).
/// Integrates to 1 over the real line; concentrates at 0 as eps -> 0.
double gaussian_kernel(double lambda, double epsilon);

}  // namespace threshdet
