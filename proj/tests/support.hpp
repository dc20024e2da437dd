#pragma once

#include <polyfilt/linalg.hpp>

#include <random>

namespace polyfilt::test {

inline Matrix random_matrix(std::mt19937_64& rng, int r, int c, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = n(rng);
  return m;
}

inline Vector random_vector(std::mt19937_64& rng, int n, double scale = 1.0) {
  return random_matrix(rng, n, 1, scale);
}

// Random covariance of the given rank.
inline Matrix random_psd(std::mt19937_64& rng, int n, int rank = -1) {
  const Matrix f = random_matrix(rng, n, rank < 0 ? n : rank);
  return f * f.transpose();
}

inline double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace polyfilt::test
