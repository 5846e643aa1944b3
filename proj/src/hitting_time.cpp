#include "threshdet/hitting_time.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "threshdet/errors.hpp"
#include "threshdet/special_functions.hpp"

namespace threshdet {

double HittingLawParams::barrier() const {
  return std::sqrt(threshold_energy / gain);
}

double HittingLawParams::epsilon_gain() const {
  return sigma2 * window * gain / threshold_energy;
}

void HittingLawParams::validate() const {
  const auto bad = [](double x) { return !(std::isfinite(x) && x > 0.0); };
  if (bad(sigma2) || bad(threshold_energy) || bad(gain) || bad(window))
    throw DomainError("HittingLawParams: all parameters must be positive and finite");
}

namespace detail {

SeriesValue alternating_erfc_series(double x, double tol, double rel_stop) {
  double partial = 0.0;
  double prev_term = std::numeric_limits<double>::infinity();
  int k = 0;
  double omitted = 0.0;
  for (;; ++k) {
    const double term = 2.0 * erfc((1.0 + 2.0 * k) * x);
    // erfc((1+2k)x) is strictly decreasing in k for x > 0, which is what
    // makes the first omitted term a valid bound
    if (term > prev_term)
      throw ConsistencyError("alternating_erfc_series: terms not decreasing");
    if (k > 0 && (term < tol || term < rel_stop * std::fabs(partial))) {
      omitted = term;
      break;
    }
    partial += (k % 2 == 0) ? term : -term;
    prev_term = term;
  }
  return {partial, k, omitted};
}

}  // namespace detail

namespace {

SeriesValue clamp_probability(SeriesValue sv, double slack) {
  if (sv.value < -slack || sv.value > 1.0 + slack) {
    std::ostringstream msg;
    msg << "hitting series value " << sv.value << " outside [0,1] by more than its error bound "
        << slack;
    throw ConsistencyError(msg.str());
  }
  sv.value = std::min(1.0, std::max(0.0, sv.value));
  return sv;
}

}  // namespace

SeriesValue hitting_cdf(const HittingLawParams& params, double tol) {
  params.validate();
  if (!(std::isfinite(tol) && tol > 0.0)) throw DomainError("hitting_cdf: tol must be > 0");
  const double x = 1.0 / std::sqrt(2.0 * params.epsilon_gain());
  SeriesValue sv = detail::alternating_erfc_series(x, tol, 1e-3);
  return clamp_probability(sv, sv.truncation_bound + 1e-15);
}

double hitting_cdf_first_term(const HittingLawParams& params) {
  params.validate();
  return 2.0 * erfc(1.0 / std::sqrt(2.0 * params.epsilon_gain()));
}

double hitting_cdf_exponential_asymptotic(const HittingLawParams& params) {
  params.validate();
  const double eg = params.epsilon_gain();
  if (eg >= 1.0)
    throw RegimeError("hitting_cdf_exponential_asymptotic: requires eps*g < 1");
  return 2.0 * std::sqrt(2.0 * eg / std::numbers::pi) * std::exp(-1.0 / (2.0 * eg));
}

}  // namespace threshdet
