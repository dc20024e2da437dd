#include "support.hpp"

#include <polyfilt/expm.hpp>
#include <polyfilt/ode.hpp>

#include <gtest/gtest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

using namespace polyfilt;
using namespace polyfilt::test;

TEST(Expm, MatchesEigenAcrossNorms) {
  std::mt19937_64 rng(5);
  for (double scale : {1e-4, 0.1, 1.0, 5.0, 30.0}) {
    for (int n : {1, 3, 6, 10}) {
      const Matrix a = random_matrix(rng, n, n, scale / std::sqrt(n));
      const Matrix ref = a.exp();
      const Matrix got = matrix_exponential(a);
      EXPECT_LT(max_abs(got - ref), 1e-12 * std::max(1.0, max_abs(ref))) << "scale " << scale << " n " << n;
    }
  }
}

TEST(Expm, NilpotentAndDiagonalExact) {
  Matrix n = Matrix::Zero(3, 3);
  n(0, 1) = 2.0;
  n(1, 2) = 3.0;
  Matrix expect = Matrix::Identity(3, 3) + n + 0.5 * n * n;
  EXPECT_LT(max_abs(matrix_exponential(n) - expect), 1e-15);
  Matrix d = Vector::LinSpaced(4, -3.0, 2.0).asDiagonal();
  Matrix e = matrix_exponential(d);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(e(i, i), std::exp(d(i, i)), 1e-14 * std::exp(d(i, i)));
  EXPECT_LT(max_abs(matrix_exponential(Matrix::Zero(2, 2)) - Matrix::Identity(2, 2)), 0.0 + 1e-300);
}

TEST(Expm, SemigroupProperty) {
  std::mt19937_64 rng(8);
  const Matrix a = random_matrix(rng, 5, 5, 0.7);
  const Matrix lhs = matrix_exponential(a * 0.3) * matrix_exponential(a * 0.9);
  EXPECT_LT(max_abs(lhs - matrix_exponential(a * 1.2)), 1e-12 * max_abs(lhs));
}

TEST(Ode, ExponentialDecayAtOutputTimes) {
  OdeRhs f = [](double, const Vector& y, Vector& dy) { dy = -2.0 * y; };
  const std::vector<double> ts{0.0, 0.1, 0.5, 1.3, 3.0};
  OdeOptions tight;
  tight.abs_tol = 1e-13;
  tight.rel_tol = 1e-12;
  const auto ys = integrate_rk45(f, Vector::Ones(1), ts, tight);
  for (std::size_t i = 0; i < ts.size(); ++i) EXPECT_NEAR(ys[i](0), std::exp(-2.0 * ts[i]), 1e-10);
}

TEST(Ode, HarmonicOscillatorDenseOutput) {
  OdeRhs f = [](double, const Vector& y, Vector& dy) {
    dy.resize(2);
    dy << y(1), -y(0);
  };
  std::vector<double> ts;
  for (int i = 0; i <= 200; ++i) ts.push_back(0.05 * i);
  Vector y0(2);
  y0 << 1.0, 0.0;
  const auto ys = integrate_rk45(f, y0, ts);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    EXPECT_NEAR(ys[i](0), std::cos(ts[i]), 1e-6);
    EXPECT_NEAR(ys[i](1), -std::sin(ts[i]), 1e-6);
  }
}

TEST(Ode, HonoursBreakpointsOfPiecewiseRhs) {
  // y' = 1 on [0, 1), y' = -3 afterwards.
  OdeRhs f = [](double t, const Vector&, Vector& dy) { dy = Vector::Constant(1, t < 1.0 ? 1.0 : -3.0); };
  const std::vector<double> ts{0.0, 0.5, 1.0, 1.5, 2.0};
  const std::vector<double> bp{1.0};
  const auto ys = integrate_rk45(f, Vector::Zero(1), ts, {}, bp);
  const double expect[] = {0.0, 0.5, 1.0, -0.5, -2.0};
  for (std::size_t i = 0; i < ts.size(); ++i) EXPECT_NEAR(ys[i](0), expect[i], 1e-12);
}

TEST(Ode, RejectsDecreasingTimes) {
  OdeRhs f = [](double, const Vector& y, Vector& dy) { dy = y; };
  const std::vector<double> ts{0.0, 1.0, 0.5};
  EXPECT_THROW(integrate_rk45(f, Vector::Ones(1), ts), std::invalid_argument);
}
