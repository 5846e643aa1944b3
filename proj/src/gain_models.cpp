#include "threshdet/gain_models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "threshdet/errors.hpp"
#include "threshdet/quadrature.hpp"
#include "threshdet/special_functions.hpp"

namespace threshdet {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

// Histogram construction parameters (dynode_compound). The seed is a fixed
// constant so that a model built from the same parameters is always the same
// object, independent of any user-facing seed.
constexpr std::uint64_t kHistogramSeed = 0x64796e6f64657321ULL;
constexpr int kHistogramSamples = 400000;
constexpr int kHistogramBins = 320;

void require_positive(double x, const char* what) {
  if (!(std::isfinite(x) && x > 0.0))
    throw DomainError(std::string(what) + " must be positive and finite");
}

long sample_poisson(double mean, RandomStream& rng) {
  if (mean <= 0.0) return 0;
  if (mean < 10.0) {
    // Knuth: multiply uniforms until the product drops below exp(-mean).
    const double limit = std::exp(-mean);
    long k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= rng.uniform_open();
    } while (p > limit);
    return k - 1;
  }
  // Hoermann's PTRS transformed-rejection sampler for mean >= 10.
  const double b = 0.931 + 2.53 * std::sqrt(mean);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  const double log_mean = std::log(mean);
  for (;;) {
    const double u = rng.uniform() - 0.5;
    const double v = rng.uniform();
    const double us = 0.5 - std::fabs(u);
    const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<long>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
        k * log_mean - mean - std::lgamma(k + 1.0))
      return static_cast<long>(k);
  }
}

}  // namespace

const char* to_string(GainKind kind) {
  switch (kind) {
    case GainKind::point_mass: return "point_mass";
    case GainKind::dynode_compound: return "dynode_compound";
    case GainKind::lognormal: return "lognormal";
    case GainKind::exponential: return "exponential";
    case GainKind::rayleigh_eta: return "rayleigh_eta";
  }
  return "unknown";
}

GainModel::GainModel(GainKind kind, double p1, double p2, int stages)
    : kind_(kind), p1_(p1), p2_(p2), stages_(stages) {}

GainModel GainModel::point_mass(double gain) {
  require_positive(gain, "point_mass gain");
  GainModel m(GainKind::point_mass, gain, 0.0, 0);
  m.born_valid_ = false;
  m.f_eta_zero_ = kNan;  // an atom off the origin has no density limit
  return m;
}

GainModel GainModel::dynode_compound(double collection_fraction, double mean_yield, int stages) {
  require_positive(collection_fraction, "dynode collection_fraction");
  require_positive(mean_yield, "dynode mean_yield");
  if (stages < 1) throw DomainError("dynode stages must be >= 1");
  GainModel m(GainKind::dynode_compound, collection_fraction, mean_yield, stages);
  double q = 0.0;  // extinction probability after n stages
  for (int n = 0; n < stages; ++n) q = std::exp(mean_yield * (q - 1.0));
  m.extinction_prob_ = q;
  m.build_dynode_histogram();
  m.born_valid_ = false;  // bounded support: rho_eta vanishes near 0
  m.f_eta_zero_ = 0.0;
  m.check_normalization();
  return m;
}

GainModel GainModel::lognormal(double log_mean, double log_sd) {
  if (!std::isfinite(log_mean)) throw DomainError("lognormal log_mean must be finite");
  require_positive(log_sd, "lognormal log_sd");
  GainModel m(GainKind::lognormal, log_mean, log_sd, 0);
  // rho_eta(l)/l -> 0 faster than any power: the limit exists but vanishes,
  // so the Born limit (which needs a finite nonzero value) does not apply.
  m.born_valid_ = false;
  m.f_eta_zero_ = 0.0;
  m.check_normalization();
  return m;
}

GainModel GainModel::exponential(double rate) {
  require_positive(rate, "exponential rate");
  GainModel m(GainKind::exponential, rate, 0.0, 0);
  m.born_valid_ = false;
  m.f_eta_zero_ = 0.0;
  m.check_normalization();
  return m;
}

GainModel GainModel::rayleigh_eta(double scale) {
  require_positive(scale, "rayleigh_eta scale");
  GainModel m(GainKind::rayleigh_eta, scale, 0.0, 0);
  // rho_eta(l) = l/scale^2 + O(l^3) near zero: f_eta(0+) = 1/scale^2.
  m.born_valid_ = true;
  m.f_eta_zero_ = 1.0 / (scale * scale);
  m.check_normalization();
  return m;
}

double GainModel::atom_gain() const {
  if (kind_ != GainKind::point_mass)
    throw MisuseError("atom_gain: model is not a point mass");
  return p1_;
}

std::vector<std::pair<const char*, double>> GainModel::parameters() const {
  switch (kind_) {
    case GainKind::point_mass:
      return {{"gain", p1_}};
    case GainKind::dynode_compound:
      return {{"collection_fraction", p1_},
              {"mean_yield", p2_},
              {"stages", static_cast<double>(stages_)}};
    case GainKind::lognormal:
      return {{"log_mean", p1_}, {"log_sd", p2_}};
    case GainKind::exponential:
      return {{"rate", p1_}};
    case GainKind::rayleigh_eta:
      return {{"scale", p1_}};
  }
  return {};
}

double GainModel::rho_g(double lambda) const {
  if (!(std::isfinite(lambda) && lambda > 0.0))
    throw DomainError("rho_g: density is defined for lambda > 0");
  switch (kind_) {
    case GainKind::point_mass:
      return 0.0;  // the atom carries no density part
    case GainKind::dynode_compound:
      return histogram_density(lambda);
    case GainKind::lognormal: {
      const double z = (std::log(lambda) - p1_) / p2_;
      return std::exp(-0.5 * z * z) / (lambda * p2_ * std::sqrt(2.0 * std::numbers::pi));
    }
    case GainKind::exponential:
      return p1_ * std::exp(-p1_ * lambda);
    case GainKind::rayleigh_eta: {
      const double s2 = p1_ * p1_;
      return std::exp(-1.0 / (2.0 * s2 * lambda)) / (2.0 * s2 * lambda * lambda);
    }
  }
  return 0.0;
}

double GainModel::rho_eta(double lambda) const {
  if (!(std::isfinite(lambda) && lambda > 0.0))
    throw DomainError("rho_eta: density is defined for lambda > 0");
  switch (kind_) {
    case GainKind::point_mass:
      return 0.0;
    case GainKind::rayleigh_eta: {
      const double s2 = p1_ * p1_;
      return (lambda / s2) * std::exp(-lambda * lambda / (2.0 * s2));
    }
    case GainKind::lognormal: {
      // eta = exp(-ln g / 2) is lognormal with parameters (-mu/2, s/2)
      const double mu = -p1_ / 2.0, s = p2_ / 2.0;
      const double z = (std::log(lambda) - mu) / s;
      return std::exp(-0.5 * z * z) / (lambda * s * std::sqrt(2.0 * std::numbers::pi));
    }
    default:
      // change of variables g = 1/eta^2: rho_eta(l) = (2/l^3) rho_g(1/l^2)
      return 2.0 / (lambda * lambda * lambda) * rho_g(1.0 / (lambda * lambda));
  }
}

double GainModel::f_eta(double lambda) const {
  if (!std::isfinite(lambda)) throw DomainError("f_eta: non-finite argument");
  if (lambda == 0.0) return f_eta_at_zero();
  const double l = std::fabs(lambda);
  if (kind_ == GainKind::point_mass) {
    const double eta0 = 1.0 / std::sqrt(p1_);
    return l == eta0 ? 1.0 / eta0 : 0.0;  // unit mass at eta0, scaled by 1/|l|
  }
  return rho_eta(l) / l;
}

EtaDensity GainModel::eta_density() const noexcept {
  return {kind_, f_eta_zero_, born_valid_};
}

double GainModel::f_eta_at_zero() const {
  if (!born_valid_) {
    std::ostringstream msg;
    msg << "f_eta_at_zero: limit not usable for " << to_string(kind_)
        << " (needs a finite nonzero limit of rho_eta(l)/l)";
    throw LimitUndefinedError(msg.str());
  }
  return f_eta_zero_;
}

double GainModel::sample_gain(RandomStream& rng) const {
  switch (kind_) {
    case GainKind::point_mass:
      return p1_;
    case GainKind::dynode_compound: {
      // Galton-Watson cascade conditioned on survival, so g > 0 always.
      for (;;) {
        long z = 1;
        for (int n = 0; n < stages_ && z > 0; ++n)
          z = sample_poisson(p2_ * static_cast<double>(z), rng);
        if (z > 0) return p1_ * static_cast<double>(z);
      }
    }
    case GainKind::lognormal:
      return std::exp(p1_ + p2_ * rng.normal());
    case GainKind::exponential:
      return -std::log(rng.uniform_open()) / p1_;
    case GainKind::rayleigh_eta: {
      const double eta = p1_ * std::sqrt(-2.0 * std::log(rng.uniform_open()));
      return 1.0 / (eta * eta);
    }
  }
  return 0.0;
}

double GainModel::mean_gain() const {
  switch (kind_) {
    case GainKind::point_mass:
      return p1_;
    case GainKind::dynode_compound:
      // E[Z_N | survival] = mean_yield^stages / (1 - extinction probability)
      return p1_ * std::pow(p2_, stages_) / (1.0 - extinction_prob_);
    case GainKind::lognormal:
      return std::exp(p1_ + p2_ * p2_ / 2.0);
    case GainKind::exponential:
      return 1.0 / p1_;
    case GainKind::rayleigh_eta:
      return kInf;  // E[1/eta^2] diverges logarithmically at eta = 0
  }
  return kNan;
}

double GainModel::cdf_g(double g) const {
  if (!std::isfinite(g)) throw DomainError("cdf_g: non-finite argument");
  if (g <= 0.0) return 0.0;
  switch (kind_) {
    case GainKind::point_mass:
      return g < p1_ ? 0.0 : 1.0;
    case GainKind::dynode_compound:
      return histogram_cdf(g);
    case GainKind::lognormal:
      return std_normal_cdf((std::log(g) - p1_) / p2_);
    case GainKind::exponential:
      return -std::expm1(-p1_ * g);
    case GainKind::rayleigh_eta:
      return std::exp(-1.0 / (2.0 * p1_ * p1_ * g));
  }
  return 0.0;
}

double GainModel::quantile_g(double p) const {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile_g: p must lie in (0, 1)");
  switch (kind_) {
    case GainKind::point_mass:
      return p1_;
    case GainKind::dynode_compound:
      return histogram_quantile(p);
    case GainKind::lognormal:
      return std::exp(p1_ + p2_ * std_normal_quantile(p));
    case GainKind::exponential:
      return -std::log1p(-p) / p1_;
    case GainKind::rayleigh_eta:
      return -1.0 / (2.0 * p1_ * p1_ * std::log(p));
  }
  return kNan;
}

double GainModel::g_lower(double tail_mass) const {
  if (is_atom()) return p1_;
  return quantile_g(tail_mass);
}

double GainModel::g_upper(double tail_mass) const {
  if (is_atom()) return p1_;
  return quantile_g(1.0 - tail_mass);
}

double GainModel::eta_lower(double tail_mass) const {
  // P(eta < x) = P(g > 1/x^2)
  return 1.0 / std::sqrt(g_upper(tail_mass));
}

double GainModel::eta_upper(double tail_mass) const {
  return 1.0 / std::sqrt(g_lower(tail_mass));
}

namespace {
constexpr double kQuantileMarks[] = {1e-9, 1e-6, 1e-3, 0.01, 0.1,  0.25,    0.5,
                                     0.75, 0.9,  0.99, 1.0 - 1e-3, 1.0 - 1e-6,
                                     1.0 - 1e-9, 1.0 - 1e-12};
}

std::vector<double> GainModel::g_breakpoints() const {
  std::vector<double> pts;
  if (is_atom()) return pts;
  if (kind_ == GainKind::dynode_compound) return knot_x_;  // density kinks
  pts.reserve(std::size(kQuantileMarks));
  for (double p : kQuantileMarks) pts.push_back(quantile_g(p));
  std::sort(pts.begin(), pts.end());
  return pts;
}

std::vector<double> GainModel::eta_breakpoints() const {
  std::vector<double> pts = g_breakpoints();
  for (double& x : pts) x = 1.0 / std::sqrt(x);
  std::sort(pts.begin(), pts.end());
  return pts;
}

void GainModel::build_dynode_histogram() {
  RandomStream rng(kHistogramSeed);
  std::vector<double> samples(kHistogramSamples);
  for (double& s : samples) s = sample_gain(rng);
  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  const double lo = *lo_it, hi = *hi_it;
  if (!(hi > lo)) {
    // degenerate cascade (e.g. one stage with tiny yield); fall back to a
    // narrow box around the single observed value
    knot_x_ = {lo * 0.99, lo * 1.01};
    knot_y_ = {50.0 / lo, 50.0 / lo};
  } else {
    const double width = (hi - lo) / kHistogramBins;
    std::vector<double> counts(kHistogramBins, 0.0);
    for (double s : samples) {
      int bin = static_cast<int>((s - lo) / width);
      bin = std::clamp(bin, 0, kHistogramBins - 1);
      counts[bin] += 1.0;
    }
    // three moving-average passes, window 5
    for (int pass = 0; pass < 3; ++pass) {
      std::vector<double> smooth(kHistogramBins, 0.0);
      for (int i = 0; i < kHistogramBins; ++i) {
        double acc = 0.0;
        int n = 0;
        for (int j = std::max(0, i - 2); j <= std::min(kHistogramBins - 1, i + 2); ++j) {
          acc += counts[j];
          ++n;
        }
        smooth[i] = acc / n;
      }
      counts.swap(smooth);
    }
    knot_x_.resize(kHistogramBins + 1);
    knot_y_.resize(kHistogramBins + 1);
    for (int i = 0; i <= kHistogramBins; ++i) {
      knot_x_[i] = lo + i * width;
      const double left = (i > 0) ? counts[i - 1] : counts[0];
      const double right = (i < kHistogramBins) ? counts[i] : counts[kHistogramBins - 1];
      knot_y_[i] = 0.5 * (left + right) / (kHistogramSamples * width);
    }
  }
  // exact renormalization of the piecewise-linear density
  double integral = 0.0;
  for (std::size_t i = 0; i + 1 < knot_x_.size(); ++i)
    integral += 0.5 * (knot_y_[i] + knot_y_[i + 1]) * (knot_x_[i + 1] - knot_x_[i]);
  for (double& y : knot_y_) y /= integral;
  knot_cdf_.assign(knot_x_.size(), 0.0);
  for (std::size_t i = 0; i + 1 < knot_x_.size(); ++i)
    knot_cdf_[i + 1] = knot_cdf_[i] +
                       0.5 * (knot_y_[i] + knot_y_[i + 1]) * (knot_x_[i + 1] - knot_x_[i]);
  knot_cdf_.back() = 1.0;
}

double GainModel::histogram_density(double x) const {
  if (x <= knot_x_.front() || x >= knot_x_.back()) return 0.0;
  const auto it = std::upper_bound(knot_x_.begin(), knot_x_.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - knot_x_.begin()) - 1;
  const double t = (x - knot_x_[i]) / (knot_x_[i + 1] - knot_x_[i]);
  return knot_y_[i] + t * (knot_y_[i + 1] - knot_y_[i]);
}

double GainModel::histogram_cdf(double x) const {
  if (x <= knot_x_.front()) return 0.0;
  if (x >= knot_x_.back()) return 1.0;
  const auto it = std::upper_bound(knot_x_.begin(), knot_x_.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - knot_x_.begin()) - 1;
  const double dx = x - knot_x_[i];
  const double w = knot_x_[i + 1] - knot_x_[i];
  const double slope = (knot_y_[i + 1] - knot_y_[i]) / w;
  return knot_cdf_[i] + knot_y_[i] * dx + 0.5 * slope * dx * dx;
}

double GainModel::histogram_quantile(double p) const {
  const auto it = std::lower_bound(knot_cdf_.begin(), knot_cdf_.end(), p);
  if (it == knot_cdf_.begin()) return knot_x_.front();
  if (it == knot_cdf_.end()) return knot_x_.back();
  std::size_t i = static_cast<std::size_t>(it - knot_cdf_.begin()) - 1;
  double lo = knot_x_[i], hi = knot_x_[i + 1];
  for (int step = 0; step < 60; ++step) {
    const double mid = 0.5 * (lo + hi);
    (histogram_cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

void GainModel::check_normalization() const {
  if (is_atom()) return;
  const double tail = 1e-13;
  const auto breaks = g_breakpoints();
  const auto result = integrate_adaptive([this](double x) { return rho_g(x); },
                                         g_lower(tail), g_upper(tail), 1e-10, 0.0, breaks);
  if (std::fabs(result.value - 1.0) > 1e-8) {
    std::ostringstream msg;
    msg << "gain model " << to_string(kind_) << ": density integrates to "
        << result.value << ", expected 1";
    throw ConsistencyError(msg.str());
  }
}

}  // namespace threshdet
