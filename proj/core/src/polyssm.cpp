#include "polyfilt/polyssm.hpp"

#include "polyfilt/error.hpp"

#include <cmath>
#include <string>

namespace polyfilt {

void check_coefficient_structure(const IndexBasis& basis, const Matrix& b, bool generator) {
  const auto n = static_cast<Eigen::Index>(basis.size());
  if (!basis.includes_zero()) throw std::invalid_argument("coefficient basis must include the zero multi-index");
  if (b.rows() != n || b.cols() != n)
    throw std::invalid_argument("coefficient matrix is " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()) +
                                ", basis has " + std::to_string(n) + " elements");
  if (!b.allFinite()) throw std::invalid_argument("coefficient matrix has non-finite entries");
  for (Eigen::Index i = 0; i < n; ++i) {
    const int di = basis.unrank(static_cast<std::size_t>(i)).degree();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (basis.unrank(static_cast<std::size_t>(j)).degree() > di && b(i, j) != 0.0)
        throw std::invalid_argument("coefficient matrix not triangular at " +
                                    basis.unrank(static_cast<std::size_t>(i)).to_string() + "," +
                                    basis.unrank(static_cast<std::size_t>(j)).to_string());
    }
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    const double want = (j == 0 && !generator) ? 1.0 : 0.0;
    if (b(0, j) != want)
      throw std::invalid_argument(generator ? "generator row 0 must vanish" : "row 0 of B must be e_0");
  }
}

CoefficientMatrix::CoefficientMatrix(IndexBasis basis, Schedule<Matrix> steps)
    : basis_(std::move(basis)), steps_(std::move(steps)) {
  if (steps_.empty()) throw std::invalid_argument("CoefficientMatrix needs at least one step");
  for (const auto& m : steps_.values()) check_coefficient_structure(basis_, m);
}

CoefficientMatrix CoefficientMatrix::constant(IndexBasis basis, Matrix b) {
  return CoefficientMatrix(std::move(basis), Schedule<Matrix>::constant(std::move(b)));
}

double CoefficientMatrix::entry(const MultiIndex& lambda, const MultiIndex& mu, int t) const {
  return at(t)(static_cast<Eigen::Index>(basis_.rank(lambda)), static_cast<Eigen::Index>(basis_.rank(mu)));
}

PolySSM::PolySSM(CoefficientMatrix coefficients, Vector initial_moments)
    : coeffs_(std::move(coefficients)), m0_(std::move(initial_moments)) {
  const auto& basis = coeffs_.basis();
  if (m0_.size() != static_cast<Eigen::Index>(basis.size()))
    throw std::invalid_argument("initial moment vector has wrong length");
  if (!m0_.allFinite()) throw std::invalid_argument("initial moments must be finite");
  if (std::abs(m0_(0) - 1.0) > 1e-12) throw std::invalid_argument("initial moment of the zero index must be 1");
  if (basis.order() >= 2) {
    const MomentPoint mp = state_moments(basis, m0_);
    const Matrix cov = mp.covariance();
    if (min_eigenvalue(cov) < -1e-8 * std::max(1.0, std::abs(cov.trace())))
      throw std::invalid_argument("initial second moments are not positive semidefinite");
  }
}

int LinearRecursion::dim() const { return static_cast<int>(A.at(1).rows()); }

std::optional<int> LinearGaussianSSM::horizon() const {
  std::optional<int> h;
  for (auto hs : {a.horizon(), A.horizon(), C.horizon()})
    if (hs) h = h ? std::min(*h, *hs) : *hs;
  return h;
}

void LinearGaussianSSM::validate() const {
  const auto d = mu0.size();
  if (d == 0) throw std::invalid_argument("LinearGaussianSSM: empty state");
  if (Sigma0.rows() != d || Sigma0.cols() != d) throw std::invalid_argument("LinearGaussianSSM: Sigma0 shape");
  for (const auto& v : a.values())
    if (v.size() != d) throw std::invalid_argument("LinearGaussianSSM: a(t) shape");
  for (const auto& m : A.values())
    if (m.rows() != d || m.cols() != d) throw std::invalid_argument("LinearGaussianSSM: A(t) shape");
  for (const auto& m : C.values()) {
    if (m.rows() != d || m.cols() != d) throw std::invalid_argument("LinearGaussianSSM: C(t) shape");
    const double thr = 1e-10 * std::max(1.0, symmetrize(m).operatorNorm());
    if (min_eigenvalue(m) < -thr) throw NumericalError("LinearGaussianSSM: C(t) is not positive semidefinite");
  }
  if (min_eigenvalue(Sigma0) < -1e-10 * std::max(1.0, std::abs(Sigma0.trace())))
    throw NumericalError("LinearGaussianSSM: Sigma0 is not positive semidefinite");
}

LinearRecursion extract_linear(const CoefficientMatrix& b, int max_degree) {
  const auto& basis = b.basis();
  if (max_degree < 0) max_degree = basis.order();
  if (max_degree < 1 || max_degree > basis.order()) throw std::invalid_argument("extract_linear: bad degree");
  // With zero first, the nonzero indices of degree <= k occupy rows 1..end_k-1.
  const auto end = static_cast<Eigen::Index>(basis.degree_begin(max_degree + 1));
  const Eigen::Index m = end - 1;
  LinearRecursion rec;
  rec.a = b.schedule().map([&](const Matrix& bt) -> Vector { return bt.block(1, 0, m, 1); });
  rec.A = b.schedule().map([&](const Matrix& bt) -> Matrix { return bt.block(1, 1, m, m); });
  return rec;
}

Vector conditional_moments(const PolySSM& model, const Vector& at_s, int s, int t) {
  if (s > t) throw std::invalid_argument("conditional_moments: s must not exceed t");
  if (s < 0) throw std::invalid_argument("conditional_moments: negative time");
  if (at_s.size() != static_cast<Eigen::Index>(model.coefficients().basis().size()))
    throw std::invalid_argument("conditional_moments: input length mismatch");
  if (std::abs(at_s(0) - 1.0) > 1e-12) throw std::invalid_argument("conditional_moments: leading entry must be 1");
  Vector m = at_s;
  for (int r = s + 1; r <= t; ++r) m = model.coefficients().at(r) * m;
  return m;
}

std::vector<Vector> moment_path(const PolySSM& model, int horizon) {
  if (horizon < 0) throw std::invalid_argument("moment_path: negative horizon");
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(horizon) + 1);
  out.push_back(model.initial_moments());
  for (int t = 1; t <= horizon; ++t) out.push_back(model.coefficients().at(t) * out.back());
  return out;
}

Vector stationary_mean(const LinearRecursion& rec) {
  if (!rec.a.is_constant() || !rec.A.is_constant())
    throw std::invalid_argument("stationary_mean needs a homogeneous recursion");
  const Matrix& A = rec.A.at(1);
  const double rho = spectral_radius(A);
  if (!(rho <= 1.0 - 1e-8))
    throw NumericalError("stationary_mean: recursion is not contractive (spectral radius " + std::to_string(rho) + ")");
  const Matrix I = Matrix::Identity(A.rows(), A.cols());
  return (I - A).partialPivLu().solve(rec.a.at(1));
}

std::vector<MomentPoint> second_moments(const LinearRecursion& rec, const Schedule<Matrix>& C, const Vector& mu0,
                                        const Matrix& P0, int horizon) {
  if (horizon < 0) throw std::invalid_argument("second_moments: negative horizon");
  std::vector<MomentPoint> out;
  out.reserve(static_cast<std::size_t>(horizon) + 1);
  out.push_back({mu0, symmetrize(P0)});
  for (int t = 1; t <= horizon; ++t) {
    const Vector& a = rec.a.at(t);
    const Matrix& A = rec.A.at(t);
    const MomentPoint& prev = out.back();
    const Vector Amu = A * prev.mean;
    MomentPoint next;
    next.mean = a + Amu;
    next.second = a * a.transpose() + a * Amu.transpose() + Amu * a.transpose() + A * prev.second * A.transpose() +
                  C.at(t);
    next.second = symmetrize(next.second);
    out.push_back(std::move(next));
  }
  return out;
}

std::vector<MomentPoint> second_moments(const LinearGaussianSSM& model, int horizon) {
  const Matrix P0 = model.Sigma0 + model.mu0 * model.mu0.transpose();
  return second_moments(model.recursion(), model.C, model.mu0, P0, horizon);
}

Matrix cross_moment(const LinearRecursion& rec, const Matrix& P_s, const Vector& mu_s, int s, int t) {
  if (s > t) throw std::invalid_argument("cross_moment: s must not exceed t");
  Matrix M = P_s;
  for (int r = s + 1; r <= t; ++r) M = rec.A.at(r) * M + rec.a.at(r) * mu_s.transpose();
  return M;
}

MomentPoint state_moments(const IndexBasis& basis, const Vector& moments) {
  if (basis.order() < 2) throw std::invalid_argument("state_moments needs an order >= 2 basis");
  const int d = basis.dim();
  MomentPoint mp;
  mp.mean.resize(d);
  mp.second.resize(d, d);
  for (int i = 0; i < d; ++i) {
    const MultiIndex ei = MultiIndex::unit(d, i);
    mp.mean(i) = moments(static_cast<Eigen::Index>(basis.rank(ei)));
    for (int j = 0; j < d; ++j)
      mp.second(i, j) = moments(static_cast<Eigen::Index>(basis.rank(ei + MultiIndex::unit(d, j))));
  }
  return mp;
}

std::vector<Matrix> noise_covariance(const PolySSM& model, int horizon) {
  if (model.order() < 2) throw std::invalid_argument("noise_covariance needs a model of order >= 2");
  if (horizon < 0) throw std::invalid_argument("noise_covariance: negative horizon");
  const auto& basis = model.coefficients().basis();
  const LinearRecursion rec = extract_linear(model.coefficients(), 1);
  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(horizon));
  Vector m = model.initial_moments();
  MomentPoint prev = state_moments(basis, m);
  for (int t = 1; t <= horizon; ++t) {
    m = model.coefficients().at(t) * m;
    MomentPoint cur = state_moments(basis, m);
    const Vector& a = rec.a.at(t);
    const Matrix& A = rec.A.at(t);
    const Vector Amu = A * prev.mean;
    Matrix C = cur.second - a * a.transpose() - a * Amu.transpose() - Amu * a.transpose() -
               A * prev.second * A.transpose();
    out.push_back(clamp_psd(C, 1e-10, "noise covariance"));
    prev = std::move(cur);
  }
  return out;
}

LinearGaussianSSM gaussian_equivalent(const PolySSM& model, int horizon) {
  if (horizon < 1) throw std::invalid_argument("gaussian_equivalent: horizon must be >= 1");
  LinearGaussianSSM g;
  const LinearRecursion rec = extract_linear(model.coefficients(), 1);
  g.a = rec.a;
  g.A = rec.A;
  g.C = Schedule<Matrix>::per_step(noise_covariance(model, horizon));
  const MomentPoint m0 = state_moments(model.coefficients().basis(), model.initial_moments());
  g.mu0 = m0.mean;
  g.Sigma0 = clamp_psd(m0.covariance(), 1e-10, "initial covariance");
  return g;
}

namespace {

Matrix lift_gaussian_step(const IndexBasis& basis, const Vector& a, const Matrix& A, const Matrix& C) {
  const int d = basis.dim();
  const auto n = static_cast<Eigen::Index>(basis.size());
  Matrix b = Matrix::Zero(n, n);
  b(0, 0) = 1.0;
  auto r1 = [&](int i) { return static_cast<Eigen::Index>(basis.rank(MultiIndex::unit(d, i))); };
  auto r2 = [&](int i, int j) {
    return static_cast<Eigen::Index>(basis.rank(MultiIndex::unit(d, i) + MultiIndex::unit(d, j)));
  };
  for (int i = 0; i < d; ++i) {
    b(r1(i), 0) = a(i);
    for (int k = 0; k < d; ++k) b(r1(i), r1(k)) = A(i, k);
  }
  // E X_i X_j = (a_i + A_i x)(a_j + A_j x) + C_ij
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      const Eigen::Index row = r2(i, j);
      b(row, 0) = a(i) * a(j) + C(i, j);
      for (int k = 0; k < d; ++k) b(row, r1(k)) = a(i) * A(j, k) + a(j) * A(i, k);
      for (int k = 0; k < d; ++k) {
        for (int l = k; l < d; ++l) {
          const double v = (k == l) ? A(i, k) * A(j, k) : A(i, k) * A(j, l) + A(i, l) * A(j, k);
          b(row, r2(k, l)) = v;
        }
      }
    }
  }
  return b;
}

}  // namespace

PolySSM lift_gaussian(const LinearGaussianSSM& model, int horizon) {
  model.validate();
  const int d = model.dim();
  IndexBasis basis = IndexBasis::enumerate(d, 2);
  const bool constant = model.a.is_constant() && model.A.is_constant() && model.C.is_constant();
  Schedule<Matrix> steps;
  if (constant) {
    steps = Schedule<Matrix>::constant(lift_gaussian_step(basis, model.a.at(1), model.A.at(1), model.C.at(1)));
  } else {
    if (horizon <= 0) horizon = model.horizon().value_or(0);
    if (horizon <= 0) throw std::invalid_argument("lift_gaussian: time-varying model needs a horizon");
    std::vector<Matrix> bs;
    for (int t = 1; t <= horizon; ++t) bs.push_back(lift_gaussian_step(basis, model.a.at(t), model.A.at(t), model.C.at(t)));
    steps = Schedule<Matrix>::per_step(std::move(bs));
  }
  Vector m0 = gaussian_moments(basis, model.mu0, model.Sigma0);
  return PolySSM(CoefficientMatrix(std::move(basis), std::move(steps)), std::move(m0));
}

Vector gaussian_moments(const IndexBasis& basis, const Vector& mean, const Matrix& cov) {
  const int d = basis.dim();
  if (mean.size() != d || cov.rows() != d || cov.cols() != d)
    throw std::invalid_argument("gaussian_moments: dimension mismatch");
  // Stein: E X_j f(X) = mean_j E f + sum_k cov_jk E d_k f, on monomials. The
  // basis is graded so every lower monomial is already filled in.
  const auto n = static_cast<Eigen::Index>(basis.size());
  Vector m = Vector::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const MultiIndex& lam = basis.unrank(static_cast<std::size_t>(i));
    if (lam.degree() == 0) {
      m(i) = 1.0;
      continue;
    }
    int j = 0;
    while (lam[j] == 0) ++j;
    const MultiIndex nu = lam - MultiIndex::unit(d, j);
    double v = mean(j) * m(static_cast<Eigen::Index>(basis.rank(nu)));
    for (int k = 0; k < d; ++k) {
      if (nu[k] == 0 || cov(j, k) == 0.0) continue;
      v += cov(j, k) * nu[k] * m(static_cast<Eigen::Index>(basis.rank(nu - MultiIndex::unit(d, k))));
    }
    m(i) = v;
  }
  return m;
}

PolySSM lift(const PolySSM& model, int m) {
  if (m < 1) throw std::invalid_argument("lift: m must be >= 1");
  const auto& xb = model.coefficients().basis();
  if (xb.order() < 2 * m) throw std::invalid_argument("lift: model order must be at least 2m");
  const int d = model.dim();
  const IndexBasis zlabels = IndexBasis::enumerate(d, m, false);  // coordinates of Z
  const int D = static_cast<int>(zlabels.size());
  IndexBasis zb = IndexBasis::enumerate(D, 2);

  // X exponent of the Z monomial kappa.
  auto x_of = [&](const MultiIndex& kappa) {
    MultiIndex x = MultiIndex::zero(d);
    for (int i = 0; i < D; ++i)
      for (int r = 0; r < kappa[i]; ++r) x = x + zlabels.unrank(static_cast<std::size_t>(i));
    return x;
  };
  // A Z monomial representing x^mu, |mu| <= 2m, of Z-degree <= 2 (1 if |mu| <= m).
  auto z_of = [&](const MultiIndex& mu) {
    MultiIndex z = MultiIndex::zero(D);
    if (mu.degree() == 0) return z;
    if (mu.degree() <= m) return z + MultiIndex::unit(D, static_cast<int>(zlabels.rank(mu)));
    std::vector<int> first(static_cast<std::size_t>(d), 0);
    int need = m;
    for (int j = 0; j < d && need > 0; ++j) {
      const int take_j = std::min(need, mu[j]);
      first[static_cast<std::size_t>(j)] = take_j;
      need -= take_j;
    }
    const MultiIndex f(first);
    const MultiIndex rest = mu - f;
    return z + MultiIndex::unit(D, static_cast<int>(zlabels.rank(f))) +
           MultiIndex::unit(D, static_cast<int>(zlabels.rank(rest)));
  };

  const auto nz = static_cast<Eigen::Index>(zb.size());
  auto build = [&](const Matrix& bx) {
    Matrix bz = Matrix::Zero(nz, nz);
    for (Eigen::Index r = 0; r < nz; ++r) {
      const MultiIndex nu = x_of(zb.unrank(static_cast<std::size_t>(r)));
      const auto xr = static_cast<Eigen::Index>(xb.rank(nu));
      for (Eigen::Index c = 0; c < bx.cols(); ++c) {
        const double v = bx(xr, c);
        if (v == 0.0) continue;
        const MultiIndex mu = xb.unrank(static_cast<std::size_t>(c));
        bz(r, static_cast<Eigen::Index>(zb.rank(z_of(mu)))) += v;
      }
    }
    return bz;
  };
  Schedule<Matrix> steps = model.coefficients().schedule().map(build);
  Vector m0(nz);
  for (Eigen::Index r = 0; r < nz; ++r)
    m0(r) = model.initial_moments()(static_cast<Eigen::Index>(xb.rank(x_of(zb.unrank(static_cast<std::size_t>(r))))));
  return PolySSM(CoefficientMatrix(std::move(zb), std::move(steps)), std::move(m0));
}

}  // namespace polyfilt
