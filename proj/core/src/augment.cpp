#include "polyfilt/polyssm.hpp"

#include <cmath>
#include <functional>

namespace polyfilt {

namespace {

double ipow(double x, int p) {
  double r = 1.0;
  for (int i = 0; i < p; ++i) r *= x;
  return r;
}

// Calls f(alpha) for every rows x cols matrix alpha whose row j sums to
// row_sum[j] (exact) or to at most row_sum[j] (when bounded). alpha flat,
// row-major.
void for_each_row_split(const std::vector<int>& row_sum, int cols, bool bounded,
                        const std::function<void(const std::vector<int>&)>& f) {
  const auto rows = static_cast<int>(row_sum.size());
  std::vector<std::vector<std::vector<int>>> choices(static_cast<std::size_t>(rows));
  for (int j = 0; j < rows; ++j) {
    const int s = row_sum[static_cast<std::size_t>(j)];
    auto& cj = choices[static_cast<std::size_t>(j)];
    if (bounded) {
      for (int tot = 0; tot <= s; ++tot)
        for (auto& c : compositions(cols, tot)) cj.push_back(std::move(c));
    } else {
      cj = compositions(cols, s);
    }
  }
  std::vector<int> alpha(static_cast<std::size_t>(rows * cols), 0);
  std::function<void(int)> rec = [&](int j) {
    if (j == rows) {
      f(alpha);
      return;
    }
    for (const auto& c : choices[static_cast<std::size_t>(j)]) {
      std::copy(c.begin(), c.end(), alpha.begin() + j * cols);
      rec(j + 1);
    }
  };
  rec(0);
}

std::vector<int> column_sums(const std::vector<int>& alpha, int rows, int cols) {
  std::vector<int> s(static_cast<std::size_t>(cols), 0);
  for (int j = 0; j < rows; ++j)
    for (int l = 0; l < cols; ++l) s[static_cast<std::size_t>(l)] += alpha[static_cast<std::size_t>(j * cols + l)];
  return s;
}

using Terms = std::vector<std::pair<MultiIndex, double>>;

void accumulate(Terms& terms, const MultiIndex& key, double v) {
  for (auto& [k, acc] : terms)
    if (k == key) {
      acc += v;
      return;
    }
  terms.emplace_back(key, v);
}

// S_{nu,eta} for all nu: sum over k x d alpha with row sums eta.
Terms s_terms(const MultiIndex& eta, const Matrix& cmat) {
  const int k = static_cast<int>(cmat.rows());
  const int d = static_cast<int>(cmat.cols());
  Terms out;
  for_each_row_split(eta.exponents(), d, false, [&](const std::vector<int>& alpha) {
    double v = 1.0;
    for (int j = 0; j < k && v != 0.0; ++j) {
      std::span<const int> row(alpha.data() + j * d, static_cast<std::size_t>(d));
      v *= static_cast<double>(multinomial(row));
      for (int l = 0; l < d; ++l) v *= ipow(cmat(j, l), row[static_cast<std::size_t>(l)]);
    }
    if (v != 0.0) accumulate(out, MultiIndex(column_sums(alpha, k, d)), v);
  });
  return out;
}

// S~_{nu,eta} for all nu: sum over k x k alpha with row sums <= eta.
Terms stilde_terms(const MultiIndex& eta, const Vector& c, const AuxiliaryMoments& y) {
  const int k = y.k();
  Terms out;
  for_each_row_split(eta.exponents(), k, true, [&](const std::vector<int>& alpha) {
    double v = 1.0;
    for (int j = 0; j < k && v != 0.0; ++j) {
      std::vector<int> parts(alpha.begin() + j * k, alpha.begin() + (j + 1) * k);
      int used = 0;
      for (int p : parts) used += p;
      const int rest = eta[j] - used;
      parts.push_back(rest);
      v *= static_cast<double>(multinomial(parts)) * ipow(c(j), rest);
    }
    if (v == 0.0) return;
    v *= y.expectation(alpha);
    if (v != 0.0) accumulate(out, MultiIndex(column_sums(alpha, k, k)), v);
  });
  return out;
}

std::vector<MultiIndex> sub_indices(const MultiIndex& lam) {
  std::vector<MultiIndex> out{MultiIndex::zero(lam.dim())};
  for (int j = 0; j < lam.dim(); ++j) {
    std::vector<MultiIndex> next;
    for (const auto& base : out)
      for (int e = 0; e <= lam[j]; ++e) {
        std::vector<int> ex = base.exponents();
        ex[static_cast<std::size_t>(j)] = e;
        next.emplace_back(std::move(ex));
      }
    out = std::move(next);
  }
  return out;
}

MultiIndex concat(const MultiIndex& a, const MultiIndex& b) {
  std::vector<int> e = a.exponents();
  e.insert(e.end(), b.exponents().begin(), b.exponents().end());
  return MultiIndex(std::move(e));
}

}  // namespace

AuxiliaryMoments AuxiliaryMoments::deterministic(Matrix y) {
  if (y.rows() != y.cols() || y.rows() == 0) throw std::invalid_argument("AuxiliaryMoments: Y must be square");
  AuxiliaryMoments m;
  m.k_ = static_cast<int>(y.rows());
  m.y_ = std::move(y);
  return m;
}

AuxiliaryMoments AuxiliaryMoments::table(int k, std::map<std::vector<int>, double> values) {
  if (k < 1) throw std::invalid_argument("AuxiliaryMoments: k must be >= 1");
  for (const auto& [key, v] : values)
    if (static_cast<int>(key.size()) != k * k) throw std::invalid_argument("AuxiliaryMoments: key must have k*k entries");
  AuxiliaryMoments m;
  m.k_ = k;
  m.table_ = std::move(values);
  return m;
}

double AuxiliaryMoments::expectation(const std::vector<int>& alpha) const {
  if (static_cast<int>(alpha.size()) != k_ * k_) throw std::invalid_argument("AuxiliaryMoments: exponent size");
  bool zero = true;
  for (int a : alpha) zero = zero && a == 0;
  if (zero) return 1.0;
  if (y_) {
    double v = 1.0;
    for (int j = 0; j < k_; ++j)
      for (int l = 0; l < k_; ++l) v *= ipow((*y_)(j, l), alpha[static_cast<std::size_t>(j * k_ + l)]);
    return v;
  }
  auto it = table_.find(alpha);
  if (it == table_.end()) throw std::out_of_range("AuxiliaryMoments: moment of Y not supplied in table");
  return it->second;
}

Matrix augment_step(const IndexBasis& x_basis, const Matrix& b_step, const AuxiliaryMoments& y, const Vector& c,
                    const Matrix& cmat, AugmentVariant variant) {
  const int d = x_basis.dim();
  const int k = y.k();
  const int n = x_basis.order();
  if (c.size() != k) throw std::invalid_argument("augment: c has wrong length");
  if (cmat.rows() != k || cmat.cols() != d) throw std::invalid_argument("augment: C must be k x d");
  check_coefficient_structure(x_basis, b_step);

  const IndexBasis basis = IndexBasis::enumerate(d + k, n);
  const auto N = static_cast<Eigen::Index>(basis.size());
  Matrix out = Matrix::Zero(N, N);

  for (Eigen::Index r = 0; r < N; ++r) {
    const MultiIndex& lam = basis.unrank(static_cast<std::size_t>(r));
    const MultiIndex l1(std::vector<int>(lam.exponents().begin(), lam.exponents().begin() + d));
    const MultiIndex l2(std::vector<int>(lam.exponents().begin() + d, lam.exponents().end()));
    for (const MultiIndex& eta : sub_indices(l2)) {
      const double binom = static_cast<double>(multi_binomial(l2, eta));
      const Terms s = s_terms(eta, cmat);
      const Terms st = stilde_terms(l2 - eta, c, y);
      for (const auto& [nu, sv] : s) {
        for (const auto& [mu2, stv] : st) {
          const double w = binom * sv * stv;
          if (w == 0.0) continue;
          if (variant == AugmentVariant::CurrentState) {
            const auto xr = static_cast<Eigen::Index>(x_basis.rank(l1 + nu));
            for (Eigen::Index xc = 0; xc < b_step.cols(); ++xc) {
              const double bv = b_step(xr, xc);
              if (bv == 0.0) continue;
              const MultiIndex mu = concat(x_basis.unrank(static_cast<std::size_t>(xc)), mu2);
              out(r, static_cast<Eigen::Index>(basis.rank(mu))) += w * bv;
            }
          } else {
            const auto xr = static_cast<Eigen::Index>(x_basis.rank(l1));
            for (Eigen::Index xc = 0; xc < b_step.cols(); ++xc) {
              const double bv = b_step(xr, xc);
              if (bv == 0.0) continue;
              const MultiIndex mu = concat(x_basis.unrank(static_cast<std::size_t>(xc)) + nu, mu2);
              out(r, static_cast<Eigen::Index>(basis.rank(mu))) += w * bv;
            }
          }
        }
      }
    }
  }
  return out;
}

CoefficientMatrix augment(const CoefficientMatrix& b, const AuxiliaryMoments& y, const Vector& c, const Matrix& cmat,
                          AugmentVariant variant) {
  const IndexBasis& xb = b.basis();
  Schedule<Matrix> steps =
      b.schedule().map([&](const Matrix& bt) { return augment_step(xb, bt, y, c, cmat, variant); });
  return CoefficientMatrix(IndexBasis::enumerate(xb.dim() + y.k(), xb.order()), std::move(steps));
}

}  // namespace polyfilt
