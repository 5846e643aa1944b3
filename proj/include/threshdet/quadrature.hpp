#pragma once

#include <functional>
#include <span>

namespace threshdet {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  // estimated absolute error
  int evaluations = 0;
  int intervals = 0;
};

/// Adaptive 15-point Gauss-Kronrod integration of f over [lower, upper].
///
/// Starts from the initial subdivision induced by `breakpoints` (interior
/// points; callers pass density quantiles or other scale markers so that
/// sharply localized integrands are seen by the rule) and bisects the
/// worst-error interval until the summed error estimate drops below
/// max(abs_tol, rel_tol * |integral|). Throws NumericalError with
/// diagnostics when max_intervals subdivisions do not suffice.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    double lower, double upper,
                                    double abs_tol, double rel_tol = 0.0,
                                    std::span<const double> breakpoints = {},
                                    int max_intervals = 4000);

}  // namespace threshdet
