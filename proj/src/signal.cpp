#include "threshdet/signal.hpp"

#include <cmath>
#include <sstream>

#include "threshdet/errors.hpp"

namespace threshdet {

namespace {
constexpr double kHermitianTol = 1e-12;
constexpr double kPsdTolFactor = 1e-10;  // eigenvalues >= -factor * trace accepted
}  // namespace

CovarianceOperator::CovarianceOperator(Eigen::MatrixXcd matrix) : matrix_(std::move(matrix)) {
  if (matrix_.rows() < 1 || matrix_.rows() != matrix_.cols())
    throw DomainError("CovarianceOperator: matrix must be square with dim >= 1");
  const double scale = std::max(1.0, matrix_.cwiseAbs().maxCoeff());
  const double herm_dev = (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
  if (herm_dev > kHermitianTol * scale)
    throw DomainError("CovarianceOperator: matrix is not Hermitian");
  matrix_ = 0.5 * (matrix_ + matrix_.adjoint().eval());  // remove rounding skew

  trace_ = matrix_.trace().real();
  if (!(trace_ > 0.0) || !std::isfinite(trace_))
    throw DomainError("CovarianceOperator: trace must be positive");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(matrix_);
  const double min_eig = es.eigenvalues().minCoeff();
  if (min_eig < -kPsdTolFactor * trace_) {
    std::ostringstream msg;
    msg << "CovarianceOperator: not positive semidefinite (min eigenvalue " << min_eig << ")";
    throw DomainError(msg.str());
  }
  if (min_eig < 0.0) {
    Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(0.0);
    matrix_ = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().adjoint();
    trace_ = matrix_.trace().real();
    clipped_ = true;
  }
}

CovarianceOperator CovarianceOperator::from_row_major(
    int dim, std::span<const std::complex<double>> entries) {
  if (dim < 1) throw DomainError("CovarianceOperator: dim must be >= 1");
  if (static_cast<int>(entries.size()) != dim * dim)
    throw DomainError("CovarianceOperator: entry count does not match dim^2");
  Eigen::MatrixXcd m(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) m(i, j) = entries[static_cast<std::size_t>(i) * dim + j];
  return CovarianceOperator(std::move(m));
}

bool CovarianceOperator::is_real() const noexcept {
  return matrix_.imag().cwiseAbs().maxCoeff() <= kHermitianTol * std::max(1.0, trace_);
}

DensityOperator::DensityOperator(Eigen::MatrixXcd matrix) : matrix_(std::move(matrix)) {
  const double tr = matrix_.trace().real();
  if (std::fabs(tr - 1.0) > 1e-12)
    throw DomainError("DensityOperator: trace must equal 1");
}

std::vector<double> channel_powers(const CovarianceOperator& b) {
  std::vector<double> powers(static_cast<std::size_t>(b.dim()));
  for (int j = 0; j < b.dim(); ++j) powers[static_cast<std::size_t>(j)] = b.matrix()(j, j).real();
  return powers;
}

DensityOperator density_operator(const CovarianceOperator& b) {
  if (!(b.trace() > 0.0)) throw DomainError("density_operator: zero trace");
  return DensityOperator(b.matrix() / b.trace());
}

double born_probability(const DensityOperator& rho, int channel) {
  if (channel < 0 || channel >= rho.dim())
    throw DomainError("born_probability: channel index out of range");
  const double diagonal_form = rho.matrix()(channel, channel).real();

  // trace route with the explicit projector |e_j><e_j|
  Eigen::MatrixXcd projector = Eigen::MatrixXcd::Zero(rho.dim(), rho.dim());
  projector(channel, channel) = 1.0;
  const double trace_form = (rho.matrix() * projector).trace().real();

  if (std::fabs(diagonal_form - trace_form) > 1e-14)
    throw ConsistencyError("born_probability: diagonal and trace forms disagree");
  return diagonal_form;
}

CovarianceOperator decompose_signal(const CovarianceOperator& b,
                                    const Eigen::MatrixXcd& basis) {
  if (basis.rows() != b.dim() || basis.cols() != b.dim())
    throw DomainError("decompose_signal: basis has wrong shape");
  const Eigen::MatrixXcd gram = basis.adjoint() * basis;
  const double unitary_dev =
      (gram - Eigen::MatrixXcd::Identity(b.dim(), b.dim())).cwiseAbs().maxCoeff();
  if (unitary_dev > 1e-12)
    throw DomainError("decompose_signal: basis columns are not orthonormal");
  return CovarianceOperator(basis.adjoint() * b.matrix() * basis);
}

Eigen::MatrixXcd diagonalizing_basis(const CovarianceOperator& b) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(b.matrix());
  return es.eigenvectors();
}

SignalModel::SignalModel(bool scalar, CovarianceOperator b)
    : scalar_(scalar), covariance_(std::move(b)) {}

SignalModel SignalModel::scalar(double sigma2) {
  if (!(std::isfinite(sigma2) && sigma2 > 0.0))
    throw DomainError("SignalModel: scalar power must be positive");
  Eigen::MatrixXcd m(1, 1);
  m(0, 0) = sigma2;
  return SignalModel(true, CovarianceOperator(std::move(m)));
}

SignalModel SignalModel::multichannel(CovarianceOperator b) {
  return SignalModel(false, std::move(b));
}

double SignalModel::power(int channel) const {
  if (channel < 0 || channel >= channels())
    throw DomainError("SignalModel: channel index out of range");
  return covariance_.matrix()(channel, channel).real();
}

}  // namespace threshdet
