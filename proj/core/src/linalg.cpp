#include "polyfilt/linalg.hpp"

#include "polyfilt/error.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <string>

namespace polyfilt {

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

double min_eigenvalue(const Matrix& sym) {
  if (sym.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(sym), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

namespace {

Matrix clamp_with_threshold(const Matrix& c, double threshold, const char* what) {
  if (c.rows() != c.cols()) throw std::invalid_argument(std::string(what) + " must be square");
  if (c.size() == 0) return c;
  if (!all_finite(c)) throw NumericalError(std::string(what) + " has non-finite entries");
  const Matrix s = symmetrize(c);
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  Vector ev = es.eigenvalues();
  if (ev.minCoeff() >= 0.0) return s;
  if (ev.minCoeff() < -threshold)
    throw NumericalError(std::string(what) + " is indefinite: eigenvalue " + std::to_string(ev.minCoeff()));
  ev = ev.cwiseMax(0.0);
  return symmetrize(es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose());
}

}  // namespace

Matrix clamp_psd(const Matrix& c, double rel, const char* what) {
  const double norm = c.size() ? symmetrize(c).operatorNorm() : 0.0;
  return clamp_with_threshold(c, rel * std::max(1.0, norm), what);
}

Matrix clamp_psd_trace(const Matrix& c, double rel, const char* what) {
  // The absolute floor keeps exactly-zero matrices with roundoff from failing.
  const double thr = rel * std::abs(c.trace()) + 1e-14;
  return clamp_with_threshold(c, thr, what);
}

Matrix psd_sqrt(const Matrix& c) {
  const Matrix s = clamp_psd(c);
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

Matrix pseudo_inverse(const Matrix& m, double tol) {
  if (m.size() == 0) return Matrix::Zero(m.cols(), m.rows());
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  const double cutoff = tol * (sv.size() ? sv(0) : 0.0);
  Vector inv = Vector::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff && sv(i) > 0.0) inv(i) = 1.0 / sv(i);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

double condition_number(const Matrix& m) {
  if (m.size() == 0) return 1.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& sv = svd.singularValues();
  const double lo = sv(sv.size() - 1);
  if (lo <= 0.0) return std::numeric_limits<double>::infinity();
  return sv(0) / lo;
}

double spectral_radius(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> es(a, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

Matrix take(const Matrix& m, const IndexList& rows, const IndexList& cols) { return m(rows, cols); }
Matrix take_rows(const Matrix& m, const IndexList& rows) { return m(rows, Eigen::all); }
Matrix take_cols(const Matrix& m, const IndexList& cols) { return m(Eigen::all, cols); }
Vector take(const Vector& v, const IndexList& idx) { return v(idx); }

}  // namespace polyfilt
