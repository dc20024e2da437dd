#pragma once

#include <Eigen/Dense>

#include <vector>

namespace polyfilt {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IndexList = std::vector<int>;

Matrix symmetrize(const Matrix& m);

// Smallest eigenvalue of the symmetric part.
double min_eigenvalue(const Matrix& sym);

// Symmetric eigen-clamp: eigenvalues in [-threshold, 0) are set to zero,
// threshold = rel * max(1, ||C||). Anything below -threshold throws
// NumericalError naming `what`.
Matrix clamp_psd(const Matrix& c, double rel = 1e-10, const char* what = "covariance");

// Same, with the Kalman convention: threshold = rel * |trace|.
Matrix clamp_psd_trace(const Matrix& c, double rel = 1e-8, const char* what = "error covariance");

// B with B B^T = C via the clamped eigendecomposition.
Matrix psd_sqrt(const Matrix& c);

// Moore-Penrose inverse by SVD; singular values below tol * sigma_max are
// treated as zero.
Matrix pseudo_inverse(const Matrix& m, double tol = 1e-12);

// 2-norm condition number (infinite when singular).
double condition_number(const Matrix& m);

double spectral_radius(const Matrix& a);

bool all_finite(const Matrix& m);

// Sub-blocks by index lists.
Matrix take(const Matrix& m, const IndexList& rows, const IndexList& cols);
Matrix take_rows(const Matrix& m, const IndexList& rows);
Matrix take_cols(const Matrix& m, const IndexList& cols);
Vector take(const Vector& v, const IndexList& idx);

}  // namespace polyfilt
