#pragma once

#include <cstdint>
#include <vector>

#include "threshdet/random.hpp"

namespace threshdet {

enum class GainKind { point_mass, dynode_compound, lognormal, exponential, rayleigh_eta };

const char* to_string(GainKind kind);

/// Metadata of the eta = 1/sqrt(g) reparameterization of a gain model.
///
/// f_eta_at_zero is the limit of rho_eta(l)/l for l -> 0+, the constant that
/// controls the small-signal click rate. born_limit_valid is true only when
/// that limit exists, is finite and is nonzero; only then does the
/// detection-probability vector converge to the Born weights.
struct EtaDensity {
  GainKind source = GainKind::point_mass;
  double f_eta_at_zero = 0.0;  // NaN when the limit does not exist
  bool born_limit_valid = false;
};

/// Parametric distribution of the detector gain g > 0.
///
/// Continuous kinds carry exact densities; point_mass is a flagged atom with
/// dedicated code paths (no delta-function numerics); dynode_compound is a
/// Poisson multiplication cascade whose density has no closed form and is
/// represented by a smoothed histogram built once at construction.
///
/// Models are immutable after construction and safe to share across threads.
class GainModel {
 public:
  /// Deterministic gain g0.
  static GainModel point_mass(double gain);

  /// Multiplication cascade over `stages` dynodes: each electron produces a
  /// Poisson(mean_yield) number of secondaries per stage; the output is
  /// scaled by the collection fraction. Samples are conditioned on cascade
  /// survival so that g > 0 always.
  static GainModel dynode_compound(double collection_fraction, double mean_yield, int stages);

  /// ln g ~ Normal(log_mean, log_sd^2).
  static GainModel lognormal(double log_mean, double log_sd);

  /// g ~ Exponential(rate), density rate * exp(-rate * g).
  static GainModel exponential(double rate);

  /// eta = 1/sqrt(g) ~ Rayleigh(scale). The one shipped family with a valid
  /// Born limit: f_eta(0+) = 1/scale^2.
  static GainModel rayleigh_eta(double scale);

  GainKind kind() const noexcept { return kind_; }
  bool is_atom() const noexcept { return kind_ == GainKind::point_mass; }
  double atom_gain() const;  // MisuseError unless point_mass

  /// Kind-specific named parameters, in declaration order (for serialization).
  std::vector<std::pair<const char*, double>> parameters() const;

  /// Density of g at lambda > 0. Atoms have no density part: 0 everywhere.
  double rho_g(double lambda) const;

  /// Density of eta = 1/sqrt(g): rho_eta(l) = (2/l^3) rho_g(1/l^2).
  double rho_eta(double lambda) const;

  /// f_eta(l) = rho_eta(|l|)/|l|; at l == 0 the stored limit is used and
  /// LimitUndefinedError is thrown unless born_limit_valid.
  double f_eta(double lambda) const;

  EtaDensity eta_density() const noexcept;
  bool born_limit_valid() const noexcept { return born_valid_; }
  double f_eta_at_zero() const;  // LimitUndefinedError unless born_limit_valid

  /// Draw one gain; deterministic given the stream state.
  double sample_gain(RandomStream& rng) const;

  /// Analytic mean gain (dynode: conditioned on survival; rayleigh_eta: +inf).
  double mean_gain() const;

  /// CDF / quantile of g (continuous and histogram models; atom is a step).
  double cdf_g(double g) const;
  double quantile_g(double p) const;

  /// Support cutoffs leaving at most tail_mass probability outside; used to
  /// truncate semi-infinite quadrature domains.
  double g_lower(double tail_mass) const;
  double g_upper(double tail_mass) const;
  double eta_lower(double tail_mass) const;
  double eta_upper(double tail_mass) const;

  /// Interior quantile markers handed to the quadrature as breakpoints.
  std::vector<double> eta_breakpoints() const;
  std::vector<double> g_breakpoints() const;

 private:
  GainModel(GainKind kind, double p1, double p2, int stages);

  void build_dynode_histogram();
  double histogram_density(double x) const;
  double histogram_cdf(double x) const;
  double histogram_quantile(double p) const;
  void check_normalization() const;

  GainKind kind_;
  double p1_ = 0.0;  // g0 | collection_fraction | log_mean | rate | scale
  double p2_ = 0.0;  // mean_yield | log_sd
  int stages_ = 0;
  double extinction_prob_ = 0.0;  // dynode: P(cascade dies within `stages_`)
  bool born_valid_ = false;
  double f_eta_zero_ = 0.0;

  // piecewise-linear density knots (dynode_compound only)
  std::vector<double> knot_x_, knot_y_, knot_cdf_;
};

}  // namespace threshdet
