#include "support.hpp"

#include <polyfilt/heston.hpp>
#include <polyfilt/oracle.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace polyfilt;
using namespace polyfilt::test;

namespace {

LinearGaussianSSM small_model() {
  LinearGaussianSSM m;
  Matrix A(2, 2);
  A << 0.6, 0.2, -0.1, 0.4;
  Matrix C(2, 2);
  C << 0.5, 0.1, 0.1, 0.2;
  m.a = Schedule<Vector>::constant(Vector::Constant(2, 0.1));
  m.A = Schedule<Matrix>::constant(A);
  m.C = Schedule<Matrix>::constant(C);
  m.mu0 = Vector::Ones(2);
  m.Sigma0 = Matrix::Identity(2, 2) * 0.3;
  return m;
}

}  // namespace

TEST(Oracle, CrossMomentsFollowRecursion) {
  const LinearGaussianSSM m = small_model();
  const MomentTable tab = MomentTable::from_gaussian(m, 5);
  // E X(t) X(s)^T = a mu(s)^T + A E X(t-1) X(s)^T for t > s.
  for (int s = 0; s <= 3; ++s)
    for (int t = s + 1; t <= 5; ++t) {
      const Matrix expect = m.a.at(t) * tab.mean(s).transpose() + m.A.at(t) * tab.cross(s, t - 1);
      EXPECT_LT(max_abs(tab.cross(s, t) - expect), 1e-14);
      EXPECT_LT(max_abs(tab.cross(t, s) - tab.cross(s, t).transpose()), 1e-15);
    }
  EXPECT_LT(max_abs(tab.cross(2, 2) - tab.second(2)), 1e-15);
  EXPECT_THROW(tab.mean(6), std::out_of_range);
}

TEST(Oracle, ModelAndGaussianTablesAgree) {
  const LinearGaussianSSM m = small_model();
  const MomentTable a = MomentTable::from_gaussian(m, 4);
  const MomentTable b = MomentTable::from_model(lift_gaussian(m), 4);
  for (int t = 0; t <= 4; ++t) {
    EXPECT_LT(max_abs(a.second(t) - b.second(t)), 1e-13);
    EXPECT_LT(max_abs(a.cross(0, t) - b.cross(0, t)), 1e-13);
  }
}

TEST(Oracle, ObservedTargetHasZeroError) {
  const LinearGaussianSSM m = small_model();
  const MomentTable tab = MomentTable::from_gaussian(m, 3);
  const ObservationPartition part({1}, 2);
  const LinearEstimator e = linear_mmse(tab, part, 2, 2);
  EXPECT_NEAR(e.error_cov(1, 1), 0.0, 1e-12);
  Vector z(3);
  z << 0.3, -0.2, 0.9;
  EXPECT_NEAR(e.apply(z)(1), 0.9, 1e-12);
}

TEST(Oracle, MatchesGaussianConditioningAtTimeZero) {
  LinearGaussianSSM m = small_model();
  m.Sigma0 << 0.4, 0.15, 0.15, 0.3;
  const MomentTable tab = MomentTable::from_gaussian(m, 1);
  const ObservationPartition part({0}, 2);
  const LinearEstimator e = linear_mmse(tab, part, 0, 0);
  const double g = 0.15 / 0.4;
  EXPECT_NEAR(e.gamma(1, 0), g, 1e-14);
  EXPECT_NEAR(e.alpha(1), 1.0 - g * 1.0, 1e-14);
  EXPECT_NEAR(e.error_cov(1, 1), 0.3 - 0.15 * g, 1e-14);
}

TEST(Oracle, MoreDataNeverIncreasesError) {
  const LinearGaussianSSM m = small_model();
  const MomentTable tab = MomentTable::from_gaussian(m, 6);
  const ObservationPartition part({0}, 2);
  double prev = std::numeric_limits<double>::infinity();
  for (int s = 0; s <= 6; ++s) {
    const double v = linear_mmse(tab, part, 3, s).error_cov(1, 1);
    EXPECT_LE(v, prev + 1e-14) << s;
    prev = v;
  }
}

TEST(Oracle, MonteCarloOfConstantPathHasNoError) {
  PathSampler sampler = [](std::uint64_t) { return std::vector<Vector>(3, Vector::Constant(2, 1.5)); };
  const McEstimate est = mc_moments(sampler, 2, 100, 4);
  ASSERT_EQ(est.mean.size(), 2 + 4);
  EXPECT_NEAR(est.mean(0), 1.5, 1e-15);
  EXPECT_NEAR(est.mean(2), 2.25, 1e-15);
  EXPECT_EQ(est.std_error.maxCoeff(), 0.0);
  EXPECT_EQ(est.paths, 100u);
}

TEST(Oracle, MonteCarloIsThreadIndependent) {
  PathSampler sampler = [](std::uint64_t i) {
    std::mt19937_64 rng = path_rng(1, i);
    std::normal_distribution<double> n;
    return std::vector<Vector>{Vector::Constant(1, n(rng))};
  };
  const McEstimate a = mc_moments(sampler, 0, 2000, 1);
  const McEstimate b = mc_moments(sampler, 0, 2000, 7);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.std_error, b.std_error);
}

TEST(Oracle, MonteCarloNormalMomentsWithinThreeStandardErrors) {
  PathSampler sampler = [](std::uint64_t i) {
    std::mt19937_64 rng = path_rng(2, i);
    std::normal_distribution<double> n;
    return std::vector<Vector>{Vector::Constant(1, n(rng))};
  };
  auto f = [](const std::vector<Vector>& p) {
    Vector r(2);
    r << p[0](0) * p[0](0), std::pow(p[0](0), 4);
    return r;
  };
  const McEstimate est = mc_mean(f, sampler, 20000);
  EXPECT_LT(std::abs(est.mean(0) - 1.0), 3 * est.std_error(0));
  EXPECT_LT(std::abs(est.mean(1) - 3.0), 3 * est.std_error(1));
}

TEST(Oracle, RegressionRecoversLinearMmse) {
  const LinearGaussianSSM m = small_model();
  const ObservationPartition part({0}, 2);
  PathSampler sampler = [&](std::uint64_t i) {
    std::mt19937_64 rng = path_rng(3, i);
    std::vector<Vector> xs{m.mu0 + psd_sqrt(m.Sigma0) * random_vector(rng, 2)};
    for (int t = 1; t <= 2; ++t) xs.push_back(m.a.at(t) + m.A.at(t) * xs.back() + psd_sqrt(m.C.at(t)) * random_vector(rng, 2));
    return xs;
  };
  const LinearEstimator emp = mc_regression(sampler, part, 2, 2, 40000);
  const LinearEstimator ex = linear_mmse(MomentTable::from_gaussian(m, 2), part, 2, 2);
  EXPECT_LT(max_abs(emp.gamma - ex.gamma), 0.03);
  EXPECT_LT(max_abs(emp.alpha - ex.alpha), 0.03);
}
