#include "polyfilt/heston.hpp"

#include "polyfilt/error.hpp"

#include <map>
#include <tuple>

namespace polyfilt {

namespace {

// Lagged monomial v^a Y^q Yt^r.
using Key = std::tuple<int, int, int>;

MultiIndex represent(int a, int q, int r) {
  const int w = std::min(q, r);
  std::vector<int> x(kMicroDim, 0);
  x[kV] = a;
  x[kY] = (q - w) % 2;
  x[kY2] = (q - w) / 2;
  x[kYt] = (r - w) % 2;
  x[kYt2] = (r - w) / 2;
  x[kYYt] = w;
  return MultiIndex(x);
}

}  // namespace

PolySSM microstructure_model(const HestonParams& p, const NoiseParams& q, int order, double dt) {
  q.validate();
  if (order < 1) throw std::invalid_argument("microstructure_model: order must be >= 1");
  if (!(dt > 0.0)) throw std::invalid_argument("microstructure_model: dt must be positive");

  // Conditional moments of (v, Y, Y^2) over one step at twice the order.
  const int inner = 2 * order;
  const PolyProcess proc = heston_process(p, inner);
  const std::vector<double> grid{0.0, dt};
  const PolySSM bar = discretize(proc, grid);
  const IndexBasis& ib = bar.coefficients().basis();
  const Matrix& bb = bar.coefficients().at(1);

  IndexBasis basis = IndexBasis::enumerate(kMicroDim, order);
  const auto n = static_cast<Eigen::Index>(basis.size());
  Matrix b = Matrix::Zero(n, n);
  Vector m0 = Vector::Zero(n);

  for (Eigen::Index row = 0; row < n; ++row) {
    const MultiIndex& lam = basis.unrank(static_cast<std::size_t>(row));
    const int a = lam[kV];
    const int qy = lam[kY] + 2 * lam[kY2] + lam[kYYt];
    const int qt = lam[kYt] + 2 * lam[kYt2] + lam[kYYt];
    const int sq = 2 * lam[kDYt2];

    std::map<Key, double> acc;
    // (Yt - Yt(t-1))^sq, Yt = Y + eps
    for (int k = 0; k <= sq; ++k) {
      const double ck = static_cast<double>(binomial(static_cast<unsigned>(sq), static_cast<unsigned>(k))) *
                        (((sq - k) % 2) ? -1.0 : 1.0);
      const int c = qt + k;
      for (int j = 0; j <= c; ++j) {
        const double em = noise_moment(c - j, q.tau);
        if (em == 0.0) continue;
        const double cj = ck * static_cast<double>(binomial(static_cast<unsigned>(c), static_cast<unsigned>(j))) * em;
        const int qq = qy + j;
        const MultiIndex src({a, qq % 2, qq / 2});
        const auto src_row = static_cast<Eigen::Index>(ib.rank(src));
        for (Eigen::Index col = 0; col < bb.cols(); ++col) {
          const double v = bb(src_row, col);
          if (v == 0.0) continue;
          const MultiIndex& mu = ib.unrank(static_cast<std::size_t>(col));
          acc[Key{mu[0], mu[1] + 2 * mu[2], sq - k}] += cj * v;
        }
      }
    }
    for (const auto& [key, v] : acc) {
      const auto& [ka, kq, kr] = key;
      const MultiIndex mu = represent(ka, kq, kr);
      if (mu.degree() > lam.degree())
        throw NumericalError("microstructure_model: coefficient structure is not triangular");
      b(row, static_cast<Eigen::Index>(basis.rank(mu))) += v;
    }

    // X(0) = (v0, 0, 0, eps0, eps0^2, 0, 0)
    if (lam[kY] == 0 && lam[kY2] == 0 && lam[kDYt2] == 0 && lam[kYYt] == 0)
      m0(row) = initial_variance_moment(p, a) * noise_moment(lam[kYt] + 2 * lam[kYt2], q.tau);
  }
  return PolySSM(CoefficientMatrix::constant(std::move(basis), std::move(b)), std::move(m0));
}

}  // namespace polyfilt
