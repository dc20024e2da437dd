#include "polyfilt/expm.hpp"

#include "polyfilt/error.hpp"

#include <array>
#include <cmath>

namespace polyfilt {

namespace {

// Higham (2005) degree-m thresholds on ||A||_1.
constexpr double kTheta3 = 1.495585217958292e-2;
constexpr double kTheta5 = 2.539398330063230e-1;
constexpr double kTheta7 = 9.504178996162932e-1;
constexpr double kTheta9 = 2.097847961257068e0;
constexpr double kTheta13 = 5.371920351148152e0;

Matrix pade_solve(const Matrix& U, const Matrix& V) { return (V - U).partialPivLu().solve(V + U); }

Matrix pade_low(const Matrix& A, int m) {
  static const std::array<double, 4> b3{120., 60., 12., 1.};
  static const std::array<double, 6> b5{30240., 15120., 3360., 420., 30., 1.};
  static const std::array<double, 8> b7{17297280., 8648640., 1995840., 277200., 25200., 1512., 56., 1.};
  static const std::array<double, 10> b9{17643225600., 8821612800., 2075673600., 302702400., 30270240.,
                                         2162160.,     110880.,     3960.,       90.,        1.};
  const double* b = m == 3 ? b3.data() : m == 5 ? b5.data() : m == 7 ? b7.data() : b9.data();
  const auto n = A.rows();
  const Matrix I = Matrix::Identity(n, n);
  const Matrix A2 = A * A;
  Matrix U = b[1] * I;
  Matrix V = b[0] * I;
  Matrix P = I;
  for (int k = 2; k <= m; k += 2) {
    P = P * A2;
    U += b[k + 1] * P;
    V += b[k] * P;
  }
  U = A * U;
  return pade_solve(U, V);
}

Matrix pade13(const Matrix& A) {
  static const std::array<double, 14> b{64764752532480000., 32382376266240000., 7771770303897600.,
                                        1187353796428800.,  129060195264000.,   10559470521600.,
                                        670442572800.,      33522128640.,       1323241920.,
                                        40840800.,          960960.,            16380.,
                                        182.,               1.};
  const auto n = A.rows();
  const Matrix I = Matrix::Identity(n, n);
  const Matrix A2 = A * A;
  const Matrix A4 = A2 * A2;
  const Matrix A6 = A4 * A2;
  const Matrix U = A * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * I);
  const Matrix V = A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I;
  return pade_solve(U, V);
}

}  // namespace

Matrix matrix_exponential(const Matrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("matrix_exponential: matrix must be square");
  if (!m.allFinite()) throw NumericalError("matrix_exponential: non-finite entries");
  if (m.size() == 0) return m;
  const double norm1 = m.cwiseAbs().colwise().sum().maxCoeff();
  if (norm1 <= kTheta3) return pade_low(m, 3);
  if (norm1 <= kTheta5) return pade_low(m, 5);
  if (norm1 <= kTheta7) return pade_low(m, 7);
  if (norm1 <= kTheta9) return pade_low(m, 9);
  int s = 0;
  if (norm1 > kTheta13) s = static_cast<int>(std::ceil(std::log2(norm1 / kTheta13)));
  Matrix r = pade13(m / std::ldexp(1.0, s));
  for (int i = 0; i < s; ++i) r = r * r;
  if (!r.allFinite()) throw NumericalError("matrix_exponential: overflow");
  return r;
}

}  // namespace polyfilt
