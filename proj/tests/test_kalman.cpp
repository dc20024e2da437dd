#include "support.hpp"

#include <polyfilt/kalman.hpp>
#include <polyfilt/oracle.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace polyfilt;
using namespace polyfilt::test;

namespace {

LinearGaussianSSM random_model(std::mt19937_64& rng, int d, int horizon) {
  LinearGaussianSSM m;
  std::vector<Vector> as;
  std::vector<Matrix> As, Cs;
  for (int t = 0; t < horizon; ++t) {
    as.push_back(random_vector(rng, d, 0.3));
    As.push_back(random_matrix(rng, d, d, 0.4 / std::sqrt(d)));
    Cs.push_back(random_psd(rng, d) * 0.2);
  }
  m.a = Schedule<Vector>::per_step(as);
  m.A = Schedule<Matrix>::per_step(As);
  m.C = Schedule<Matrix>::per_step(Cs);
  m.mu0 = random_vector(rng, d);
  m.Sigma0 = random_psd(rng, d);
  return m;
}

std::vector<Vector> sample_path(std::mt19937_64& rng, const LinearGaussianSSM& m, int horizon) {
  std::vector<Vector> xs{m.mu0 + psd_sqrt(m.Sigma0) * random_vector(rng, m.dim())};
  for (int t = 1; t <= horizon; ++t)
    xs.push_back(m.a.at(t) + m.A.at(t) * xs.back() + psd_sqrt(m.C.at(t)) * random_vector(rng, m.dim()));
  return xs;
}

std::vector<Vector> observed(const ObservationPartition& part, const std::vector<Vector>& xs) {
  std::vector<Vector> ys;
  for (const auto& x : xs) ys.push_back(take(x, part.observed()));
  return ys;
}

}  // namespace

TEST(Kalman, UpdateMatchesConditioningFormula) {
  FilterState prior{1, 0, Vector(2), Matrix(2, 2)};
  prior.mean << 0.5, -1.0;
  prior.cov << 2.0, 0.6, 0.6, 1.0;
  const ObservationPartition part({0}, 2);
  const FilterState post = kalman_update(prior, part, Vector::Constant(1, 1.5));
  EXPECT_EQ(post.s, 1);
  EXPECT_NEAR(post.mean(0), 1.5, 1e-15);
  EXPECT_NEAR(post.mean(1), -1.0 + 0.3 * 1.0, 1e-15);
  EXPECT_NEAR(post.cov(0, 0), 0.0, 1e-15);
  EXPECT_NEAR(post.cov(1, 1), 1.0 - 0.36 / 2.0, 1e-15);
}

TEST(Kalman, ScalarAr1StationaryGain) {
  // Latent x(t) = phi x(t-1) + e, observed y(t) = x(t) + f, both Gaussian.
  const double phi = 0.7, q = 0.5, r = 0.3;
  LinearGaussianSSM m;
  Matrix A(2, 2);
  A << phi, 0, phi, 0;  // (x, y) with y(t) = phi x(t-1) + e + f
  Matrix C(2, 2);
  C << q, q, q, q + r;
  m.a = Schedule<Vector>::constant(Vector::Zero(2));
  m.A = Schedule<Matrix>::constant(A);
  m.C = Schedule<Matrix>::constant(C);
  m.mu0 = Vector::Zero(2);
  m.Sigma0 = Matrix::Zero(2, 2);
  const ObservationPartition part({1}, 2);
  std::vector<Vector> ys(200, Vector::Zero(1));
  const FilterRun run = filter(m, part, ys);
  // Scalar filter recursion for the latent coordinate.
  double p = 0.0;
  for (int i = 0; i < 2000; ++i) {
    const double pp = phi * phi * p + q;
    p = pp - pp * pp / (pp + r);
  }
  EXPECT_NEAR(run.filtered.back().cov(0, 0), p, 1e-12);
}

TEST(Kalman, FilterPredictSmoothMatchNormalEquations) {
  std::mt19937_64 rng(11);
  const int d = 3, T = 6;
  const LinearGaussianSSM m = random_model(rng, d, T);
  const ObservationPartition part({0, 2}, d);
  const auto xs = sample_path(rng, m, T);
  const auto ys = observed(part, xs);
  const FilterRun run = filter(m, part, ys);
  const MomentTable table = MomentTable::from_gaussian(m, T);
  ASSERT_EQ(run.filtered.size(), static_cast<std::size_t>(T + 1));
  for (int t = 0; t <= T; ++t) {
    const LinearEstimator est = linear_mmse(table, part, t, t);
    const Vector z = stack_observations(part, xs, t);
    EXPECT_LT(max_abs(run.filtered[t].mean - est.apply(z)), 1e-9) << t;
    EXPECT_LT(max_abs(run.filtered[t].cov - est.error_cov), 1e-9) << t;
    if (t >= 1) {
      const LinearEstimator pe = linear_mmse(table, part, t, t - 1);
      EXPECT_LT(max_abs(run.predicted[t].mean - pe.apply(stack_observations(part, xs, t - 1))), 1e-9);
      EXPECT_LT(max_abs(run.predicted[t].cov - pe.error_cov), 1e-9);
    }
  }
  const FilterState pr = predict(m, run.filtered[2], 5);
  const LinearEstimator pe = linear_mmse(table, part, 5, 2);
  EXPECT_LT(max_abs(pr.mean - pe.apply(stack_observations(part, xs, 2))), 1e-9);
  EXPECT_LT(max_abs(pr.cov - pe.error_cov), 1e-9);

  const auto sm = smooth(m, run, 5);
  ASSERT_EQ(sm.size(), 6u);
  for (int t = 0; t <= 5; ++t) {
    const LinearEstimator se = linear_mmse(table, part, t, 5);
    EXPECT_LT(max_abs(sm[t].mean - se.apply(stack_observations(part, xs, 5))), 1e-9) << t;
    EXPECT_LT(max_abs(sm[t].cov - se.error_cov), 1e-9) << t;
  }
  EXPECT_LT(max_abs(sm[5].mean - run.filtered[5].mean), 1e-14);
}

TEST(Kalman, SingularObservationCovarianceUsesPseudoinverse) {
  // X_o(0) is deterministic, so Cov(X_o(0)) = 0.
  LinearGaussianSSM m;
  m.a = Schedule<Vector>::constant(Vector::Zero(2));
  m.A = Schedule<Matrix>::constant(Matrix::Identity(2, 2) * 0.5);
  m.C = Schedule<Matrix>::constant(Matrix::Identity(2, 2));
  m.mu0 = Vector::Ones(2);
  m.Sigma0 = Matrix::Zero(2, 2);
  m.Sigma0(1, 1) = 1.0;
  const ObservationPartition part({0}, 2);
  std::vector<Vector> ys{Vector::Constant(1, 1.0), Vector::Constant(1, 0.2)};
  const FilterRun run = filter(m, part, ys);
  EXPECT_TRUE(run.filtered[0].mean.allFinite());
  EXPECT_NEAR(run.filtered[0].mean(1), 1.0, 1e-15);
  EXPECT_NEAR(run.filtered[0].cov(1, 1), 1.0, 1e-15);
  EXPECT_GE(min_eigenvalue(run.filtered[1].cov), -1e-15);
}

TEST(Kalman, RejectsBadRequests) {
  std::mt19937_64 rng(3);
  const LinearGaussianSSM m = random_model(rng, 2, 3);
  const ObservationPartition part({0}, 2);
  std::vector<Vector> ys(3, Vector::Zero(1));
  const FilterRun run = filter(m, part, ys);
  EXPECT_THROW(predict(m, run.filtered[2], 2), std::invalid_argument);
  EXPECT_THROW(smooth(m, run, 5), std::out_of_range);
  EXPECT_THROW(filter(m, part, std::vector<Vector>{}), std::invalid_argument);
  EXPECT_THROW(filter(m, part, std::vector<Vector>{Vector::Zero(2)}), std::invalid_argument);
  EXPECT_THROW(ObservationPartition({0, 0}, 2), std::invalid_argument);
  EXPECT_THROW(ObservationPartition({2}, 2), std::out_of_range);
  EXPECT_THROW(ObservationPartition({}, 2), std::invalid_argument);
}
