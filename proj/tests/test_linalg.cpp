#include "support.hpp"

#include <polyfilt/error.hpp>
#include <polyfilt/linalg.hpp>

#include <gtest/gtest.h>

using namespace polyfilt;
using namespace polyfilt::test;

TEST(Linalg, PenroseIdentitiesOnRankDeficientMatrices) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int r = 2 + trial % 4, c = 3 + trial % 3, k = 1 + trial % 2;
    const Matrix a = random_matrix(rng, r, k) * random_matrix(rng, k, c);
    const Matrix p = pseudo_inverse(a);
    const double s = std::max(1.0, max_abs(a));
    EXPECT_LT(max_abs(a * p * a - a), 1e-10 * s);
    EXPECT_LT(max_abs(p * a * p - p), 1e-10 * s * max_abs(p));
    EXPECT_LT(max_abs((a * p).transpose() - a * p), 1e-10);
    EXPECT_LT(max_abs((p * a).transpose() - p * a), 1e-10);
  }
}

TEST(Linalg, PseudoInverseOfInvertibleIsInverse) {
  Matrix a(2, 2);
  a << 2, 1, 1, 3;
  EXPECT_LT(max_abs(pseudo_inverse(a) - a.inverse()), 1e-14);
  EXPECT_LT(max_abs(pseudo_inverse(Matrix::Zero(2, 3))), 0.0 + 1e-300);
}

TEST(Linalg, ClampPsdRemovesRoundoffOnly) {
  Matrix c(2, 2);
  c << 1.0, 1.0, 1.0, 1.0 - 1e-13;
  const Matrix k = clamp_psd(c);
  EXPECT_GE(min_eigenvalue(k), -1e-15);
  EXPECT_LT(max_abs(k - c), 1e-12);
  Matrix bad(2, 2);
  bad << 1.0, 0.0, 0.0, -0.1;
  EXPECT_THROW(clamp_psd(bad), NumericalError);
  EXPECT_THROW(clamp_psd_trace(bad), NumericalError);
}

TEST(Linalg, PsdSqrtFactorises) {
  std::mt19937_64 rng(3);
  const Matrix c = random_psd(rng, 4, 2);
  const Matrix b = psd_sqrt(c);
  EXPECT_LT(max_abs(b * b.transpose() - c), 1e-10 * max_abs(c));
}

TEST(Linalg, ConditionAndSpectralRadius) {
  Matrix a(2, 2);
  a << 0.5, 1.0, 0.0, -0.8;
  EXPECT_NEAR(spectral_radius(a), 0.8, 1e-14);
  Matrix rot(2, 2);
  rot << 0.0, -0.9, 0.9, 0.0;  // eigenvalues +-0.9i
  EXPECT_NEAR(spectral_radius(rot), 0.9, 1e-14);
  EXPECT_NEAR(condition_number(Matrix::Identity(3, 3) * 2.0), 1.0, 1e-14);
  Matrix sing = Matrix::Zero(2, 2);
  sing(0, 0) = 1.0;
  EXPECT_TRUE(std::isinf(condition_number(sing)) || condition_number(sing) > 1e15);
}

TEST(Linalg, IndexSelection) {
  Matrix m(3, 3);
  m << 1, 2, 3, 4, 5, 6, 7, 8, 9;
  const Matrix s = take(m, {0, 2}, {1});
  ASSERT_EQ(s.rows(), 2);
  EXPECT_EQ(s(1, 0), 8);
  EXPECT_EQ(take_rows(m, {1})(0, 2), 6);
  EXPECT_EQ(take_cols(m, {2})(2, 0), 9);
  Vector v(3);
  v << 1, 2, 3;
  EXPECT_EQ(take(v, {2})(0), 3);
}
