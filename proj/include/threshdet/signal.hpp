#pragma once

#include <Eigen/Dense>
#include <complex>
#include <span>
#include <vector>

namespace threshdet {

/// Hermitian positive-semidefinite covariance operator of an m-channel
/// Wiener process; entry (j, j) is the power of channel j.
///
/// Construction validates hermiticity and positivity. Eigenvalues in
/// [-1e-10 * trace, 0) are treated as rounding noise: they are clipped to
/// zero (the matrix is rebuilt from the clipped spectrum) and the instance
/// is flagged via eigenvalues_clipped().
class CovarianceOperator {
 public:
  explicit CovarianceOperator(Eigen::MatrixXcd matrix);
  static CovarianceOperator from_row_major(int dim,
                                           std::span<const std::complex<double>> entries);

  int dim() const noexcept { return static_cast<int>(matrix_.rows()); }
  const Eigen::MatrixXcd& matrix() const noexcept { return matrix_; }
  double trace() const noexcept { return trace_; }
  bool eigenvalues_clipped() const noexcept { return clipped_; }

  /// True when every imaginary part is negligible (real-restricted signal).
  bool is_real() const noexcept;

 private:
  Eigen::MatrixXcd matrix_;
  double trace_ = 0.0;
  bool clipped_ = false;
};

/// Trace-one Hermitian PSD matrix; the normalized covariance.
class DensityOperator {
 public:
  explicit DensityOperator(Eigen::MatrixXcd matrix);
  int dim() const noexcept { return static_cast<int>(matrix_.rows()); }
  const Eigen::MatrixXcd& matrix() const noexcept { return matrix_; }

 private:
  Eigen::MatrixXcd matrix_;
};

/// Diagonal of B: per-channel powers (sigma_1^2, ..., sigma_m^2).
std::vector<double> channel_powers(const CovarianceOperator& b);

/// rho = B / Tr B.
DensityOperator density_operator(const CovarianceOperator& b);

/// rho_jj, computed both as the diagonal entry and as Tr(rho |e_j><e_j|);
/// the two routes are cross-checked to 1e-14.
double born_probability(const DensityOperator& rho, int channel);

/// Covariance in a new orthonormal channel basis (columns of `basis`):
/// U^dagger B U. Trace is preserved; DomainError when U is not unitary.
CovarianceOperator decompose_signal(const CovarianceOperator& b,
                                    const Eigen::MatrixXcd& basis);

/// Unitary whose columns diagonalize B (eigenvalues ascending).
Eigen::MatrixXcd diagonalizing_basis(const CovarianceOperator& b);

/// Signal specification: a scalar Wiener process of power sigma2 or an
/// m-channel process with covariance operator B.
class SignalModel {
 public:
  static SignalModel scalar(double sigma2);
  static SignalModel multichannel(CovarianceOperator b);

  bool is_scalar() const noexcept { return scalar_; }
  int channels() const noexcept { return covariance_.dim(); }
  double power(int channel) const;
  double total_power() const noexcept { return covariance_.trace(); }
  const CovarianceOperator& covariance() const noexcept { return covariance_; }

 private:
  SignalModel(bool scalar, CovarianceOperator b);
  bool scalar_;
  CovarianceOperator covariance_;
};

}  // namespace threshdet
