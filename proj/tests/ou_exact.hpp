#pragma once

#include <polyfilt/linalg.hpp>

#include <unsupported/Eigen/MatrixFunctions>

namespace polyfilt::test {

// X(t+h) = Phi X(t) + g + N(0, Q) for dX = (a + A X) dt + B dW, BB^T = C,
// via Eigen's exponential of block matrices (Van Loan).
struct OuStep {
  Matrix Phi;
  Vector g;
  Matrix Q;
};

inline OuStep ou_exact_step(const Matrix& A, const Vector& a, const Matrix& C, double h) {
  const auto d = A.rows();
  Matrix aug = Matrix::Zero(d + 1, d + 1);
  aug.topLeftCorner(d, d) = A * h;
  aug.topRightCorner(d, 1) = a * h;
  const Matrix ea = aug.exp();
  Matrix vl = Matrix::Zero(2 * d, 2 * d);
  vl.topLeftCorner(d, d) = -A * h;
  vl.topRightCorner(d, d) = C * h;
  vl.bottomRightCorner(d, d) = A.transpose() * h;
  const Matrix ev = vl.exp();
  const Matrix phi_t = ev.bottomRightCorner(d, d);
  Matrix q = phi_t.transpose() * ev.topRightCorner(d, d);
  q = 0.5 * (q + q.transpose()).eval();
  return {ea.topLeftCorner(d, d), ea.topRightCorner(d, 1), q};
}

}  // namespace polyfilt::test
