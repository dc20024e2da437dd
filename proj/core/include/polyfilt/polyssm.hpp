#pragma once

#include "polyfilt/linalg.hpp"
#include "polyfilt/multiindex.hpp"
#include "polyfilt/schedule.hpp"

#include <map>
#include <optional>
#include <vector>

namespace polyfilt {

// B(t) = (b_{lambda,mu}) over the order-n basis (with zero). Validated on
// construction: block lower triangular in degree, row 0 equal to e_0.
class CoefficientMatrix {
 public:
  CoefficientMatrix() = default;
  CoefficientMatrix(IndexBasis basis, Schedule<Matrix> steps);
  static CoefficientMatrix constant(IndexBasis basis, Matrix b);

  const IndexBasis& basis() const { return basis_; }
  int dim() const { return basis_.dim(); }
  int order() const { return basis_.order(); }
  bool is_constant() const { return steps_.is_constant(); }
  std::optional<int> horizon() const { return steps_.horizon(); }

  const Matrix& at(int t) const { return steps_.at(t); }
  const Schedule<Matrix>& schedule() const { return steps_; }
  double entry(const MultiIndex& lambda, const MultiIndex& mu, int t = 1) const;

 private:
  IndexBasis basis_;
  Schedule<Matrix> steps_;
};

// Throws std::invalid_argument unless b is block lower triangular with
// first row e_0 (exact zeros).
void check_coefficient_structure(const IndexBasis& basis, const Matrix& b, bool generator = false);

class PolySSM {
 public:
  PolySSM() = default;
  // initial_moments holds E X(0)^lambda over coefficients.basis().
  PolySSM(CoefficientMatrix coefficients, Vector initial_moments);

  int dim() const { return coeffs_.dim(); }
  int order() const { return coeffs_.order(); }
  const CoefficientMatrix& coefficients() const { return coeffs_; }
  const Vector& initial_moments() const { return m0_; }

 private:
  CoefficientMatrix coeffs_;
  Vector m0_;
};

// x(t) = a(t) + A(t) x(t-1) + martingale increment.
struct LinearRecursion {
  Schedule<Vector> a;
  Schedule<Matrix> A;
  int dim() const;
};

struct LinearGaussianSSM {
  Schedule<Vector> a;
  Schedule<Matrix> A;
  Schedule<Matrix> C;
  Vector mu0;
  Matrix Sigma0;

  int dim() const { return static_cast<int>(mu0.size()); }
  std::optional<int> horizon() const;
  LinearRecursion recursion() const { return {a, A}; }
  // Dimension and PSD checks; throws std::invalid_argument / NumericalError.
  void validate() const;
};

struct MomentPoint {
  Vector mean;    // mu(t)
  Matrix second;  // P(t) = E X(t) X(t)^T
  Matrix covariance() const { return second - mean * mean.transpose(); }
};

// a_j = b_{lambda_j,0}, A_ij = b_{lambda_i,lambda_j} over the nonzero basis
// of degree <= max_degree (default: full order).
LinearRecursion extract_linear(const CoefficientMatrix& b, int max_degree = -1);

// (prod_{r=s+1}^t B(r)) m.
Vector conditional_moments(const PolySSM& model, const Vector& at_s, int s, int t);

// Exact E X(t)^lambda over the full basis for t = 0..horizon.
std::vector<Vector> moment_path(const PolySSM& model, int horizon);

Vector stationary_mean(const LinearRecursion& rec);

// Lyapunov recurrence. Returns entries t = 0..horizon.
std::vector<MomentPoint> second_moments(const LinearRecursion& rec, const Schedule<Matrix>& C, const Vector& mu0,
                                        const Matrix& P0, int horizon);
std::vector<MomentPoint> second_moments(const LinearGaussianSSM& model, int horizon);

// P(s,t) = E X(t) X(s)^T.
Matrix cross_moment(const LinearRecursion& rec, const Matrix& P_s, const Vector& mu_s, int s, int t);

// mu and P of the state from a moment vector over an order >= 2 basis.
MomentPoint state_moments(const IndexBasis& basis, const Vector& moments);

// C(t), t = 1..horizon (index t-1).
std::vector<Matrix> noise_covariance(const PolySSM& model, int horizon);

LinearGaussianSSM gaussian_equivalent(const PolySSM& model, int horizon);

// Order-2 polynomial model of a linear Gaussian one (steps 1..horizon, or
// constant when all three schedules are).
PolySSM lift_gaussian(const LinearGaussianSSM& model, int horizon = 0);

// Order-2m model of X -> order-2 model of (X^lambda)_{1<=|lambda|<=m}.
PolySSM lift(const PolySSM& model, int m);

// Moments of a Gaussian N(mean, cov) over an arbitrary basis.
Vector gaussian_moments(const IndexBasis& basis, const Vector& mean, const Matrix& cov);

// -------- state augmentation --------

// E(prod_{j,l} Y_{jl}^{alpha_jl}) for the k x k random matrix Y(t); alpha
// is flattened row-major.
class AuxiliaryMoments {
 public:
  static AuxiliaryMoments deterministic(Matrix y);
  static AuxiliaryMoments table(int k, std::map<std::vector<int>, double> values);

  int k() const { return k_; }
  double expectation(const std::vector<int>& alpha) const;

 private:
  int k_ = 0;
  std::optional<Matrix> y_;
  std::map<std::vector<int>, double> table_;
};

enum class AugmentVariant {
  CurrentState,  // Z(t) = Y(t) Z(t-1) + c(t) + C(t) X(t)
  LaggedState,   // Z(t) = Y(t) Z(t-1) + c(t) + C(t) X(t-1)
};

// Coefficients of (X, Z) over the order-n basis in N^{d+k}. b_step is one
// step of the X model; c has length k, cmat is k x d.
Matrix augment_step(const IndexBasis& x_basis, const Matrix& b_step, const AuxiliaryMoments& y, const Vector& c,
                    const Matrix& cmat, AugmentVariant variant);

CoefficientMatrix augment(const CoefficientMatrix& b, const AuxiliaryMoments& y, const Vector& c, const Matrix& cmat,
                          AugmentVariant variant);

}  // namespace polyfilt
