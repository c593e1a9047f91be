#include <gtest/gtest.h>

#include <random>

#include "mfsync/linalg.hpp"
#include "oracles/oracles.hpp"

using namespace mfsync;

namespace {

ComplexMatrix to_eigen(const oracle::CMat& h) {
  const auto n = static_cast<Eigen::Index>(h.size());
  ComplexMatrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = h[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return m;
}

ComplexMatrix random_complex(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& gen) {
  std::normal_distribution<double> normal;
  ComplexMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = Complex(normal(gen), normal(gen));
  return m;
}

ComplexMatrix random_unitary(Eigen::Index d, std::mt19937_64& gen) {
  Eigen::HouseholderQR<ComplexMatrix> qr(random_complex(d, d, gen));
  return qr.householderQ() * ComplexMatrix::Identity(d, d);
}

// Largest principal-angle sine between the column spans of orthonormal a and b.
double subspace_gap(const ComplexMatrix& a, const ComplexMatrix& b) {
  const ComplexMatrix residual = b - a * (a.adjoint() * b);
  return Eigen::JacobiSVD<ComplexMatrix>(residual).singularValues()(0);
}

}  // namespace

TEST(HermitianMatrix, RejectsNonHermitianInput) {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 1) = Complex(1.0, 0.0);
  EXPECT_THROW(HermitianMatrix{m}, Error);
  try {
    HermitianMatrix{m};
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotHermitian);
  }
}

TEST(HermitianMatrix, FromUpperIsExactlyHermitianWithRealDiagonal) {
  std::mt19937_64 gen(3);
  const auto h = HermitianMatrix::from_upper(random_complex(6, 6, gen));
  EXPECT_EQ((h.dense() - h.dense().adjoint()).cwiseAbs().maxCoeff(), 0.0);
  for (Eigen::Index i = 0; i < 6; ++i) EXPECT_EQ(h(i, i).imag(), 0.0);
}

TEST(LeadingEigenpair, RankOneProjector) {
  const ComplexVector z = (ComplexVector(4) << std::polar(1.0, 0.3), std::polar(1.0, 2.0), std::polar(1.0, -1.1),
                           std::polar(1.0, 4.0))
                              .finished();
  const auto pair = leading_eigenpair(HermitianMatrix(z * z.adjoint()));
  EXPECT_NEAR(pair.value, 4.0, 1e-12);
  // Equal to z up to one global phase.
  const Complex phase = pair.vector.dot(z) / 4.0;
  EXPECT_NEAR(std::abs(phase), 1.0, 1e-12);
  EXPECT_LT((pair.vector - std::conj(phase) * z).norm(), 1e-10);
}

TEST(LeadingEigenpair, Diagonal) {
  ComplexMatrix m = ComplexMatrix::Zero(3, 3);
  m.diagonal() << 2.0, 1.0, 1.0;
  const auto pair = leading_eigenpair(HermitianMatrix(m));
  EXPECT_NEAR(pair.value, 2.0, 1e-14);
  EXPECT_NEAR(pair.vector(0).real(), std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(pair.vector(0).imag(), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(pair.vector(1)) + std::abs(pair.vector(2)), 0.0, 1e-12);
}

TEST(LeadingEigenpair, MatchesJacobiOracle) {
  std::mt19937_64 gen(11);
  const auto h = oracle::random_hermitian(8, gen);
  const auto ref = oracle::hermitian_eigen(h);
  const auto pair = leading_eigenpair(HermitianMatrix(to_eigen(h)));
  EXPECT_NEAR(pair.value, ref.values.back(), 1e-8);
}

TEST(LeadingEigenpair, PhaseConventionAndNorm) {
  std::mt19937_64 gen(5);
  for (int rep = 0; rep < 20; ++rep) {
    const auto h = HermitianMatrix(to_eigen(oracle::random_hermitian(10, gen)));
    const auto pair = leading_eigenpair(h);
    EXPECT_NEAR(pair.vector.norm(), std::sqrt(10.0), 1e-9);
    Eigen::Index arg = 0;
    pair.vector.cwiseAbs().maxCoeff(&arg);
    EXPECT_GT(pair.vector(arg).real(), 0.0);
    EXPECT_EQ(pair.vector(arg).imag(), 0.0);
    // Rayleigh quotient and residual.
    EXPECT_NEAR((pair.vector.adjoint() * h.dense() * pair.vector)(0).real() / 10.0, pair.value, 1e-9);
    EXPECT_LE((h.dense() * pair.vector - pair.value * pair.vector).norm(), 1e-10 * h.frobenius_norm() * std::sqrt(10.0));
    EXPECT_LE(std::abs(pair.value), h.frobenius_norm());
  }
}

TEST(LeadingEigenpair, ShiftInvariance) {
  std::mt19937_64 gen(8);
  const ComplexMatrix m = to_eigen(oracle::random_hermitian(9, gen));
  const auto a = leading_eigenpair(HermitianMatrix(m));
  for (double c : {-5.0, 0.7, 40.0}) {
    const auto b = leading_eigenpair(HermitianMatrix(ComplexMatrix(m + c * ComplexMatrix::Identity(9, 9))));
    EXPECT_LT((a.vector - b.vector).norm(), 1e-8) << "shift " << c;
    EXPECT_NEAR(b.value - c, a.value, 1e-9);
  }
}

TEST(LeadingEigenpair, PicksAlgebraicallyLargestEvenWhenNegativeDominates) {
  ComplexMatrix m = ComplexMatrix::Zero(3, 3);
  m.diagonal() << -10.0, 1.0, 0.5;
  const auto pair = leading_eigenpair(HermitianMatrix(m));
  EXPECT_NEAR(pair.value, 1.0, 1e-14);
  EXPECT_NEAR(std::abs(pair.vector(1)), std::sqrt(3.0), 1e-12);
}

TEST(LeadingEigenpair, Errors) {
  try {
    leading_eigenpair(HermitianMatrix::zero(4));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ZeroMatrix);
  }
  // Tied top eigenvalue: the leading vector is not determined.
  try {
    leading_eigenpair(HermitianMatrix(ComplexMatrix(ComplexMatrix::Identity(3, 3))));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoConvergence);
  }
}

TEST(TopEigenvectors, RecoversOrthonormalSpan) {
  std::mt19937_64 gen(21);
  const ComplexMatrix x = random_unitary(9, gen).leftCols(3);
  const ComplexMatrix u = top_d_eigenvectors(HermitianMatrix(ComplexMatrix(x * x.adjoint())), 3);
  EXPECT_LT((u.adjoint() * u - ComplexMatrix::Identity(3, 3)).norm(), 1e-8);
  EXPECT_LT(subspace_gap(x, u), 1e-6);
}

TEST(TopEigenvectors, FullBasisIsUnitary) {
  std::mt19937_64 gen(22);
  const ComplexMatrix u = top_d_eigenvectors(HermitianMatrix(to_eigen(oracle::random_hermitian(7, gen))), 7);
  EXPECT_LT((u * u.adjoint() - ComplexMatrix::Identity(7, 7)).norm(), 1e-8);
}

TEST(TopEigenvectors, MatchesOracleSubspace) {
  std::mt19937_64 gen(23);
  const auto h = oracle::random_hermitian(12, gen);
  const auto ref = oracle::hermitian_eigen(h);
  ComplexMatrix expected(12, 3);
  for (int c = 0; c < 3; ++c)
    for (int r = 0; r < 12; ++r) expected(r, c) = ref.vectors[ref.vectors.size() - 1 - c][r];
  const ComplexMatrix u = top_d_eigenvectors(HermitianMatrix(to_eigen(h)), 3);
  EXPECT_LT(subspace_gap(expected, u), 1e-8);
  EXPECT_THROW(top_d_eigenvectors(HermitianMatrix(to_eigen(h)), 13), Error);
}

TEST(Oracle, HundredRandomMatrices) {
  std::mt19937_64 gen(1234);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 2 + static_cast<std::size_t>(rep % 15);
    const auto h = oracle::random_hermitian(n, gen);
    const auto ref = oracle::hermitian_eigen(h);
    const auto pair = leading_eigenpair(HermitianMatrix(to_eigen(h)));
    ASSERT_NEAR(pair.value, ref.values.back(), 1e-8) << "matrix " << rep;
    Complex overlap = 0.0;
    for (std::size_t i = 0; i < n; ++i) overlap += std::conj(ref.vectors.back()[i]) * pair.vector(static_cast<Eigen::Index>(i));
    ASSERT_NEAR(std::abs(overlap), std::sqrt(static_cast<double>(n)), 1e-8) << "matrix " << rep;
  }
}

TEST(UnitaryProjection, FixesUnitaryAndScaledIdentity) {
  std::mt19937_64 gen(31);
  const ComplexMatrix q = random_unitary(4, gen);
  EXPECT_LT((unitary_projection(q) - q).norm(), 1e-10);
  EXPECT_LT((unitary_projection(ComplexMatrix(2.0 * ComplexMatrix::Identity(3, 3))) - ComplexMatrix::Identity(3, 3)).norm(),
            1e-12);
}

TEST(UnitaryProjection, IsNearestAmongRandomUnitaries) {
  std::mt19937_64 gen(32);
  ComplexMatrix m;
  do {
    m = random_complex(3, 3, gen);
  } while ([&] {
    const auto s = Eigen::JacobiSVD<ComplexMatrix>(m).singularValues();
    return s(0) / s(2) >= 10.0;
  }());
  const ComplexMatrix u = unitary_projection(m);
  EXPECT_LT((u * u.adjoint() - ComplexMatrix::Identity(3, 3)).norm(), 1e-10);
  const double best = (m - u).norm();
  for (int rep = 0; rep < 1000; ++rep) EXPECT_LE(best, (m - random_unitary(3, gen)).norm() + 1e-12);
  EXPECT_LT((unitary_projection(u) - u).norm(), 1e-10);
}

TEST(UnitaryProjection, RankDeficient) {
  ComplexMatrix m = ComplexMatrix::Identity(3, 3);
  m(2, 2) = 0.0;
  try {
    unitary_projection(m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::RankDeficient);
  }
}
