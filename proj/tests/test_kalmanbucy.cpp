#include "kb_convergence.hpp"
#include "support.hpp"

#include <polyfilt/error.hpp>
#include <polyfilt/kalmanbucy.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace polyfilt;
using namespace polyfilt::test;

namespace {

// Latent OU v with observed Y, dY = v dt + dW.
GaussianOU latent_ou(double kappa, double sigma) {
  GaussianOU ou;
  Matrix A(2, 2);
  A << -kappa, 0.0, 1.0, 0.0;
  Matrix C = Matrix::Zero(2, 2);
  C(0, 0) = sigma * sigma;
  C(1, 1) = 1.0;
  ou.a = TimeFunction<Vector>::constant(Vector::Zero(2));
  ou.A = TimeFunction<Matrix>::constant(A);
  ou.C = TimeFunction<Matrix>::constant(C);
  ou.mu0 = Vector::Zero(2);
  ou.Sigma0 = Matrix::Zero(2, 2);
  ou.Sigma0(0, 0) = sigma * sigma / (2 * kappa);
  return ou;
}

}  // namespace

TEST(KalmanBucy, RiccatiReachesStationaryRoot) {
  for (double kappa : {0.5, 1.0, 2.0}) {
    const double sigma = 0.7;
    const GaussianOU ou = latent_ou(kappa, sigma);
    const ObservationPartition part({1}, 2);
    const std::vector<double> grid{0.0, 50.0 / kappa};
    const RiccatiSolution r = riccati_solve(ou, part, initial_error_covariance(ou.Sigma0, part), grid);
    EXPECT_NEAR(r.Sigma.back()(0, 0), -kappa + std::sqrt(kappa * kappa + sigma * sigma), 1e-6);
    EXPECT_NEAR(r.Sigma.back()(1, 1), 0.0, 1e-12);
  }
}

TEST(KalmanBucy, RiccatiMatchesScalarClosedForm) {
  // S' = -2 k S + s^2 - S^2 has S(t) = r1 + (r1 - r2) / (c e^{(r1 - r2) t} - 1).
  const double kappa = 1.3, sigma = 0.5;
  const GaussianOU ou = latent_ou(kappa, sigma);
  const ObservationPartition part({1}, 2);
  const double r1 = -kappa + std::hypot(kappa, sigma), r2 = -kappa - std::hypot(kappa, sigma);
  const double s0 = ou.Sigma0(0, 0);
  const double c = (s0 - r2) / (s0 - r1);
  const std::vector<double> grid = uniform_grid(3.0, 0.25);
  const RiccatiSolution r = riccati_solve(ou, part, initial_error_covariance(ou.Sigma0, part), grid);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double exact = r1 + (r1 - r2) / (c * std::exp((r1 - r2) * grid[k]) - 1.0);
    EXPECT_NEAR(r.Sigma[k](0, 0), exact, 1e-7);
  }
}

TEST(KalmanBucy, FullyObservedHasZeroError) {
  GaussianOU ou;
  ou.a = TimeFunction<Vector>::constant(Vector::Constant(1, 0.1));
  ou.A = TimeFunction<Matrix>::constant(Matrix::Constant(1, 1, -1.0));
  ou.C = TimeFunction<Matrix>::constant(Matrix::Constant(1, 1, 0.4));
  ou.mu0 = Vector::Zero(1);
  ou.Sigma0 = Matrix::Constant(1, 1, 0.3);
  const ObservationPartition part({0}, 1);
  ObservationPath path;
  for (int i = 0; i <= 10; ++i) path.times.push_back(0.1 * i), path.values.push_back(Vector::Constant(1, 0.05 * i));
  const ContinuousFilterOutput out = kb_filter(ou, part, path);
  for (std::size_t k = 0; k < path.times.size(); ++k) {
    EXPECT_NEAR(out.riccati.Sigma[k](0, 0), 0.0, 1e-12);
    EXPECT_NEAR(out.mean[k](0), path.values[k](0), 1e-12);
  }
}

TEST(KalmanBucy, PredictMatchesExactOu) {
  const GaussianOU ou = KbConvergenceCase{}.model();
  Vector x(2);
  x << 0.7, 1.2;
  Matrix S(2, 2);
  S << 0.05, 0.0, 0.0, 0.0;
  const std::vector<double> ts{1.0, 1.5, 3.0};
  const ContinuousPrediction pr = kb_predict(ou, x, S, ts);
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const OuStep st = ou_exact_step(ou.A.at(0), ou.a.at(0), ou.C.at(0), ts[k] - ts[0]);
    EXPECT_LT(max_abs(pr.mean[k] - (st.Phi * x + st.g)), 1e-7);
    EXPECT_LT(max_abs(pr.cov[k] - (st.Phi * S * st.Phi.transpose() + st.Q)), 1e-7);
  }
  EXPECT_THROW(kb_predict(ou, x, S, std::vector<double>{1.0}), std::invalid_argument);
}

TEST(KalmanBucy, ConvergesToExactDiscreteFilterAtFirstOrder) {
  KbConvergenceCase cs;
  cs.paths = 5;
  const KbConvergenceResult r = kb_convergence(cs);
  EXPECT_GE(r.order, 0.9);
  EXPECT_LT(r.rms[2], r.rms[1]);
  EXPECT_LT(r.rms[1], r.rms[0]);
}

TEST(KalmanBucy, SmootherApproachesDiscreteSmootherAndReducesError) {
  const KbConvergenceCase cs;
  const GaussianOU ou = cs.model();
  const ObservationPartition part({1}, 2);
  const double dt = 1e-3;
  const int n = 2000;
  const OuStep st = ou_exact_step(ou.A.at(0), ou.a.at(0), ou.C.at(0), dt);
  const Matrix L = psd_sqrt(st.Q);
  std::mt19937_64 rng(9);
  ObservationPath path;
  Vector x = ou.mu0;
  for (int i = 0; i <= n; ++i) {
    if (i > 0) x = st.g + st.Phi * x + L * random_vector(rng, 2);
    path.times.push_back(i * dt);
    path.values.push_back(take(x, part.observed()));
  }
  KalmanBucyOptions opts;
  opts.with_gamma = true;
  const ContinuousFilterOutput out = kb_filter(ou, part, path, opts);
  const auto sm = kb_smooth_all(ou, part, path, out, n);
  ASSERT_EQ(sm.size(), static_cast<std::size_t>(n + 1));

  const LinearGaussianSSM dm = exact_discrete(ou, dt);
  const FilterRun run = filter(dm, part, path.values);
  const auto dsm = smooth(dm, run, n);
  for (int k : {0, 500, 1000, 1500, 1999}) {
    EXPECT_NEAR(sm[k].mean(0), dsm[k].mean(0), 2e-2) << k;
    EXPECT_NEAR(sm[k].cov(0, 0), dsm[k].cov(0, 0), 2e-3) << k;
    EXPECT_GE(min_eigenvalue(out.riccati.Sigma[k] - sm[k].cov), -1e-10) << k;
  }
  EXPECT_LT(max_abs(sm[n].mean - out.mean[n]), 1e-14);
  const ContinuousEstimate one = kb_smooth(ou, part, path, out, 700, n);
  EXPECT_LT(max_abs(one.mean - sm[700].mean), 1e-8);
  EXPECT_LT(max_abs(one.cov - sm[700].cov), 1e-8);
}

TEST(KalmanBucy, SmoothingRequiresGamma) {
  const GaussianOU ou = latent_ou(1.0, 0.5);
  const ObservationPartition part({1}, 2);
  ObservationPath path;
  for (int i = 0; i <= 4; ++i) path.times.push_back(0.1 * i), path.values.push_back(Vector::Zero(1));
  const ContinuousFilterOutput out = kb_filter(ou, part, path);
  EXPECT_THROW(kb_smooth(ou, part, path, out, 1, 3), std::invalid_argument);
}

TEST(KalmanBucy, SingularObservationNoiseIsNumericalError) {
  GaussianOU ou = latent_ou(1.0, 0.5);
  Matrix C = Matrix::Zero(2, 2);
  C(0, 0) = 0.25;
  ou.C = TimeFunction<Matrix>::constant(C);
  const ObservationPartition part({1}, 2);
  EXPECT_THROW(kalman_bucy_gain(ou, part, Matrix::Identity(2, 2), 0.0), NumericalError);
  ObservationPath path{{0.0, 1.0}, {Vector::Zero(1), Vector::Zero(1)}};
  EXPECT_THROW(kb_filter(ou, part, path), NumericalError);
}
