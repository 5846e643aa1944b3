#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>

#include "threshdet/errors.hpp"
#include "threshdet/random.hpp"
#include "threshdet/signal.hpp"

using namespace threshdet;
using Complex = std::complex<double>;

namespace {

// Hermitian PSD matrix A A^dagger + small ridge from a seeded fill.
Eigen::MatrixXcd random_psd(int dim, std::uint64_t seed) {
  RandomStream rng(seed);
  Eigen::MatrixXcd a(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) a(i, j) = Complex(rng.normal(), rng.normal());
  return a * a.adjoint() / dim;
}

Eigen::MatrixXcd random_unitary(int dim, std::uint64_t seed) {
  RandomStream rng(seed);
  Eigen::MatrixXcd a(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) a(i, j) = Complex(rng.normal(), rng.normal());
  return Eigen::HouseholderQR<Eigen::MatrixXcd>(a).householderQ();
}

}  // namespace

TEST_CASE("channel_powers reads the diagonal") {
  SUBCASE("identity times a constant") {
    const CovarianceOperator b(Eigen::MatrixXcd::Identity(3, 3) * 2.5);
    for (double p : channel_powers(b)) CHECK(p == doctest::Approx(2.5));
  }
  SUBCASE("diag(1, 3)") {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2, 2);
    m(0, 0) = 1.0;
    m(1, 1) = 3.0;
    const CovarianceOperator b(m);
    const auto powers = channel_powers(b);
    CHECK(powers[0] == 1.0);
    CHECK(powers[1] == 3.0);
    CHECK(b.trace() == doctest::Approx(4.0));
  }
  SUBCASE("random PSD m = 5: powers sum to the trace") {
    const CovarianceOperator b(random_psd(5, 99));
    double sum = 0.0;
    for (double p : channel_powers(b)) sum += p;
    CHECK(sum == doctest::Approx(b.trace()).epsilon(1e-12));
  }
}

TEST_CASE("density_operator normalizes by the trace") {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = 3.0;
  const auto rho = density_operator(CovarianceOperator(m));
  CHECK(rho.matrix()(0, 0).real() == doctest::Approx(0.25));
  CHECK(rho.matrix()(1, 1).real() == doctest::Approx(0.75));

  SUBCASE("scale invariance over twelve orders of magnitude") {
    const Eigen::MatrixXcd base = random_psd(3, 7);
    const auto reference = density_operator(CovarianceOperator(base));
    for (double c : {1e-6, 1.0, 1e6}) {
      const auto scaled = density_operator(CovarianceOperator(base * c));
      CHECK((scaled.matrix() - reference.matrix()).cwiseAbs().maxCoeff() < 1e-14);
    }
  }
  SUBCASE("dense m = 3 output is PSD with unit trace") {
    const auto rho3 = density_operator(CovarianceOperator(random_psd(3, 11)));
    CHECK(rho3.matrix().trace().real() == doctest::Approx(1.0).epsilon(1e-12));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho3.matrix());
    CHECK(es.eigenvalues().minCoeff() >= -1e-12);
  }
}

TEST_CASE("born_probability diagonal and trace forms") {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = 3.0;
  const auto rho = density_operator(CovarianceOperator(m));
  CHECK(born_probability(rho, 0) == doctest::Approx(0.25));
  CHECK(born_probability(rho, 1) == doctest::Approx(0.75));
  CHECK_THROWS_AS(born_probability(rho, 2), DomainError);
  CHECK_THROWS_AS(born_probability(rho, -1), DomainError);

  SUBCASE("probability vector for a dense m = 4 state") {
    const auto rho4 = density_operator(CovarianceOperator(random_psd(4, 21)));
    double sum = 0.0;
    for (int j = 0; j < 4; ++j) {
      const double p = born_probability(rho4, j);
      CHECK(p >= 0.0);
      sum += p;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("decompose_signal changes basis") {
  const CovarianceOperator b(random_psd(3, 33));
  SUBCASE("identity basis leaves B unchanged") {
    const auto same = decompose_signal(b, Eigen::MatrixXcd::Identity(3, 3));
    CHECK((same.matrix() - b.matrix()).cwiseAbs().maxCoeff() < 1e-14);
  }
  SUBCASE("random unitary preserves the trace") {
    const auto rotated = decompose_signal(b, random_unitary(3, 44));
    CHECK(rotated.trace() == doctest::Approx(b.trace()).epsilon(1e-12));
    double sum = 0.0;
    for (double p : channel_powers(rotated)) sum += p;
    CHECK(sum == doctest::Approx(b.trace()).epsilon(1e-12));
  }
  SUBCASE("diagonalizing basis yields the eigenvalues") {
    const auto diag = decompose_signal(b, diagonalizing_basis(b));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(b.matrix());
    for (int i = 0; i < 3; ++i) {
      CHECK(diag.matrix()(i, i).real() == doctest::Approx(es.eigenvalues()(i)).epsilon(1e-10));
      for (int j = 0; j < 3; ++j)
        if (i != j) CHECK(std::abs(diag.matrix()(i, j)) < 1e-12 * b.trace());
    }
  }
  SUBCASE("non-unitary basis is rejected") {
    Eigen::MatrixXcd skew = Eigen::MatrixXcd::Identity(3, 3) * 1.1;
    CHECK_THROWS_AS(decompose_signal(b, skew), DomainError);
  }
}

TEST_CASE("covariance validation") {
  SUBCASE("non-Hermitian matrix rejected") {
    Eigen::MatrixXcd m(2, 2);
    m << Complex(1.0, 0.0), Complex(0.5, 0.1), Complex(0.5, 0.1), Complex(1.0, 0.0);
    CHECK_THROWS_AS(CovarianceOperator{m}, DomainError);
  }
  SUBCASE("negative definite rejected") {
    Eigen::MatrixXcd m = -Eigen::MatrixXcd::Identity(2, 2);
    CHECK_THROWS_AS(CovarianceOperator{m}, DomainError);
  }
  SUBCASE("rounding-level negative eigenvalue clipped with a flag") {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(2, 2);
    m(0, 0) = -1e-12;  // tiny negative within the tolerance band of trace ~ 1
    const CovarianceOperator b(m);
    CHECK(b.eigenvalues_clipped());
    CHECK(b.matrix()(0, 0).real() >= 0.0);
  }
  SUBCASE("row-major entry constructor") {
    const std::vector<Complex> entries = {Complex(2.0, 0.0), Complex(0.0, 0.5),
                                          Complex(0.0, -0.5), Complex(1.0, 0.0)};
    const auto b = CovarianceOperator::from_row_major(2, entries);
    CHECK(b.trace() == doctest::Approx(3.0));
    CHECK_FALSE(b.is_real());
    CHECK_THROWS_AS(CovarianceOperator::from_row_major(3, entries), DomainError);
  }
}

TEST_CASE("SignalModel wraps scalar and multichannel specifications") {
  const auto s = SignalModel::scalar(2.0);
  CHECK(s.is_scalar());
  CHECK(s.channels() == 1);
  CHECK(s.power(0) == 2.0);
  CHECK(s.total_power() == 2.0);
  CHECK_THROWS_AS(SignalModel::scalar(0.0), DomainError);

  const auto m = SignalModel::multichannel(CovarianceOperator(random_psd(3, 55)));
  CHECK_FALSE(m.is_scalar());
  CHECK(m.channels() == 3);
  CHECK_THROWS_AS(m.power(3), DomainError);
}
