#pragma once

// Test-only numerical oracles, deliberately independent of the library
// implementation paths they are used to check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace oracles {

namespace detail {
inline double simpson_rec(const std::function<double(double)>& f, double a, double b,
                          double fa, double fm, double fb, double whole, double tol,
                          int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) < 15.0 * tol) return left + right + delta / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}
}  // namespace detail

// Adaptive Simpson quadrature (not Gauss-Kronrod, on purpose).
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-14) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_rec(f, a, b, fa, fm, fb, whole, tol, 60);
}

// One-sample Kolmogorov-Smirnov distance between a sample and a CDF.
inline double ks_distance(std::vector<double> sample,
                          const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max(d, std::fabs(static_cast<double>(i + 1) / n - f));
    d = std::max(d, std::fabs(static_cast<double>(i) / n - f));
  }
  return d;
}

// Two-sample Kolmogorov-Smirnov distance.
inline double ks_distance_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j])
      ++i;
    else
      ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

// Asymptotic KS critical value at significance alpha (alpha=0.01 -> 1.628/sqrt(n)).
inline double ks_critical(double n, double alpha = 0.01) {
  return std::sqrt(-0.5 * std::log(alpha / 2.0)) / std::sqrt(n);
}

inline double ks_critical_two_sample(double n, double m, double alpha = 0.01) {
  return std::sqrt(-0.5 * std::log(alpha / 2.0)) * std::sqrt((n + m) / (n * m));
}

}  // namespace oracles
