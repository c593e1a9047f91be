#include <gtest/gtest.h>

#include <algorithm>
#include <numbers>

#include "mfsync/so3/rotation.hpp"
#include "mfsync/so3/wigner.hpp"

using namespace mfsync;
using namespace mfsync::so3;
using std::numbers::pi;

TEST(Rotation, CanonicalSignAndNorm) {
  const Rotation r(-0.5, 0.5, 0.5, 0.5);
  EXPECT_GE(r.w(), 0.0);
  EXPECT_NEAR(r.w() * r.w() + r.x() * r.x() + r.y() * r.y() + r.z() * r.z(), 1.0, 1e-15);
  const Rotation s(2.0, 0.0, 0.0, 0.0);
  EXPECT_EQ(s, Rotation::identity());
}

TEST(Rotation, MatrixAgreesWithComposition) {
  Rng rng(1);
  for (int rep = 0; rep < 100; ++rep) {
    const auto a = sample_rotation(rng), b = sample_rotation(rng);
    EXPECT_LT(((a * b).matrix() - a.matrix() * b.matrix()).norm(), 1e-12);
    EXPECT_LT((a.inverse().matrix() - a.matrix().transpose()).norm(), 1e-12);
    EXPECT_NEAR(a.matrix().determinant(), 1.0, 1e-12);
    EXPECT_LT(angular_distance(Rotation::from_matrix(a.matrix()), a), 1e-7);
  }
}

TEST(Rotation, AxisAngle) {
  const auto r = Rotation::axis_angle(Eigen::Vector3d::UnitZ(), pi / 2);
  EXPECT_LT((r.matrix() * Eigen::Vector3d::UnitX() - Eigen::Vector3d::UnitY()).norm(), 1e-12);
  EXPECT_NEAR(r.angle(), pi / 2, 1e-12);
  EXPECT_NEAR(Rotation::axis_angle(Eigen::Vector3d(1, 1, 0), 2.5).angle(), 2.5, 1e-12);
}

TEST(Rotation, NearestRotationFixesReflection) {
  Rng rng(2);
  const Eigen::Matrix3d r = sample_rotation(rng).matrix();
  EXPECT_LT((nearest_rotation(1.7 * r) - r).norm(), 1e-12);
  Eigen::Matrix3d flipped = r;
  flipped.col(2) *= -1.0;
  EXPECT_NEAR(nearest_rotation(flipped).determinant(), 1.0, 1e-12);
}

TEST(HaarSampling, MeanAngleAndDeterminism) {
  Rng rng(3);
  double total = 0.0;
  const int samples = 100000;
  for (int s = 0; s < samples; ++s) total += sample_rotation(rng).angle();
  // E[alpha] under density (1 - cos a)/pi on [0, pi] is pi/2 + 2/pi.
  EXPECT_NEAR(total / samples * 180.0 / pi, 126.5, 1.0);
  Rng a(4), b(4);
  EXPECT_EQ(sample_rotation(a), sample_rotation(b));
}

TEST(HaarSampling, NontrivialIrrepsAverageToZero) {
  Rng rng(5);
  ComplexMatrix mean = ComplexMatrix::Zero(3, 3);
  for (int s = 0; s < 10000; ++s) mean += wigner_rep(1, sample_rotation(rng));
  mean /= 10000.0;
  EXPECT_LT(std::abs(mean.trace()), 0.05);
}

TEST(Wigner, IdentityAndDimensions) {
  for (int k = 1; k <= kMaxWignerDegree; ++k) {
    const auto rho = wigner_rep(k, Rotation::identity());
    ASSERT_EQ(rho.rows(), rep_dimension(k));
    EXPECT_EQ(rho, ComplexMatrix::Identity(2 * k + 1, 2 * k + 1)) << k;
  }
  try {
    wigner_rep(9, Rotation::identity());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnsupportedDegree);
  }
}

TEST(Wigner, ZAxisRotationSpectrum) {
  for (double alpha : {0.3, 1.0, 2.9}) {
    const auto rho = wigner_rep(1, Rotation::axis_angle(Eigen::Vector3d::UnitZ(), alpha));
    EXPECT_NEAR(rho.trace().real(), 1.0 + 2.0 * std::cos(alpha), 1e-10);
    EXPECT_NEAR(rho.trace().imag(), 0.0, 1e-10);
    // Eigenvalues e^{-i alpha}, 1, e^{i alpha}.
    Eigen::ComplexEigenSolver<ComplexMatrix> es(rho);
    std::vector<double> phases;
    for (int i = 0; i < 3; ++i) phases.push_back(std::arg(es.eigenvalues()(i)));
    std::sort(phases.begin(), phases.end());
    EXPECT_NEAR(phases[0], -alpha, 1e-10);
    EXPECT_NEAR(phases[1], 0.0, 1e-10);
    EXPECT_NEAR(phases[2], alpha, 1e-10);
  }
}

TEST(Wigner, UnitaryHomomorphismAndCharacter) {
  Rng rng(6);
  for (int rep = 0; rep < 100; ++rep) {
    const auto g = sample_rotation(rng), h = sample_rotation(rng);
    for (int k = 1; k <= kMaxWignerDegree; ++k) {
      const auto rg = wigner_rep(k, g), rh = wigner_rep(k, h);
      const auto id = ComplexMatrix::Identity(2 * k + 1, 2 * k + 1);
      ASSERT_LT((rg * rg.adjoint() - id).norm(), 1e-9) << k;
      ASSERT_LT((wigner_rep(k, g * h) - rg * rh).norm(), 1e-8) << k;
      ASSERT_NEAR(rg.trace().real(), character(k, g.angle()), 1e-8) << k;
      ASSERT_NEAR(rg.trace().imag(), 0.0, 1e-8) << k;
    }
  }
}

TEST(Wigner, CharacterFormula) {
  EXPECT_EQ(character(3, 0.0), 7.0);
  for (int k = 1; k <= 8; ++k)
    for (double a : {0.1, 1.0, 2.0, 3.0}) {
      double sum = 0.0;
      for (int m = -k; m <= k; ++m) sum += std::cos(m * a);
      EXPECT_NEAR(character(k, a), sum, 1e-10);
    }
}

TEST(Wigner, RealBasisChangeIntertwines) {
  const auto& c = real_basis_change();
  EXPECT_LT((c * c.adjoint() - Eigen::Matrix3cd::Identity()).norm(), 1e-12);
  Rng rng(7);
  for (int rep = 0; rep < 50; ++rep) {
    const auto g = sample_rotation(rng);
    const Eigen::Matrix3cd rho = wigner_rep(1, g);
    const Eigen::Matrix3cd real = c * rho * c.adjoint();
    EXPECT_LT((real - g.matrix().cast<Complex>()).norm(), 1e-10);
  }
}
