#include "polyfilt/heston.hpp"

#include "polyfilt/error.hpp"

#include <cmath>
#include <map>
#include <string>

namespace polyfilt {

void HestonParams::validate() const {
  if (!(kappa > 0.0)) throw std::invalid_argument("Heston: kappa must be positive");
  if (!(m > 0.0)) throw std::invalid_argument("Heston: m must be positive");
  if (!(sigma >= 0.0)) throw std::invalid_argument("Heston: sigma must be non-negative");
  if (!(std::abs(rho) <= 1.0)) throw std::invalid_argument("Heston: rho must lie in [-1, 1]");
  if (!std::isfinite(mu)) throw std::invalid_argument("Heston: mu must be finite");
  if (!(mu_v >= 0.0)) throw std::invalid_argument("Heston: mu_v must be non-negative");
  if (!(sigma_v >= 0.0)) throw std::invalid_argument("Heston: sigma_v must be non-negative");
  if (sigma_v > 0.0 && mu_v == 0.0) throw std::invalid_argument("Heston: sigma_v > 0 needs mu_v > 0");
}

double stationary_variance(double kappa, double m, double sigma) { return sigma * sigma * m / (2.0 * kappa); }

HestonParams HestonParams::stationary(double kappa, double m, double sigma, double rho, double mu) {
  HestonParams p;
  p.kappa = kappa;
  p.m = m;
  p.sigma = sigma;
  p.rho = rho;
  p.mu = mu;
  p.mu_v = m;
  p.sigma_v = stationary_variance(kappa, m, sigma);
  return p;
}

void NoiseParams::validate() const {
  if (!(tau >= 0.0)) throw std::invalid_argument("noise: tau must be non-negative");
}

double cir_mean(const HestonParams& p, double u) { return p.m + (p.mu_v - p.m) * std::exp(-p.kappa * u); }

double cir_variance(const HestonParams& p, double u) {
  const double e1 = std::exp(-p.kappa * u);
  const double e2 = e1 * e1;
  const double s2 = p.sigma * p.sigma;
  return p.sigma_v * e2 + s2 / p.kappa * p.mu_v * (e1 - e2) + p.m * s2 / (2.0 * p.kappa) * (1.0 - e1) * (1.0 - e1);
}

double initial_variance_moment(const HestonParams& p, int k) {
  if (k < 0) throw std::invalid_argument("initial_variance_moment: negative order");
  if (p.sigma_v == 0.0) return std::pow(p.mu_v, k);
  const double shape = p.mu_v * p.mu_v / p.sigma_v;
  const double scale = p.sigma_v / p.mu_v;
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= (shape + i) * scale;
  return r;
}

Matrix heston_closed_form_covariance(const HestonParams& p, int t) {
  const double k = p.kappa, m = p.m, s = p.sigma, r = p.rho, muv = p.mu_v;
  const double ek = std::exp(-k), ekt = std::exp(-k * t), eK = std::exp(k);
  const double s2 = s * s, r2 = r * r;
  const double dm = muv - m;
  const double C11 = (1 - ek) * s2 / k * ((1 - ekt) * m + ekt * muv - (1 - ek) * m / 2);
  const double C12 = m / k * r * s * (1 - ek) + r * s * dm * ekt;
  const double C13 = s2 / (2 * k * k) * ((1 + 4 * r2 - ek) * m - 2 * dm * ekt) * (1 - ek) +
                     s2 / k * ((1 + k * r2) * dm * ekt - 2 * r2 * m * ek);
  const double C22 = m + dm * (1 - ek) * std::exp(-k * (t - 1)) / k;
  const double C23 = 3 * r * s / (k * k) * (dm * ekt - m * ek) * (eK - 1) - 3 * r * s / k * dm * ekt + 3 * r * s / k * m;

  // C33 = q0 + q1 E v(t-1) + q2 E v(t-1)^2
  const double k2 = k * k, k3 = k2 * k, ek2 = ek * ek;
  const double q2 = 2 * (1 - ek) * (1 - ek) / k2;
  const double q1 = 4 * m / k - 4 * m * ek / k - 6 * r2 * s2 * ek / k - 4 * m / k2 + 8 * m * ek / k2 -
                    4 * m * ek2 / k2 - 12 * r2 * s2 * ek / k2 - 6 * s2 * ek / k2 + 12 * r2 * s2 / k3 -
                    12 * r2 * s2 * ek / k3 + 3 * s2 / k3 - 3 * s2 * ek2 / k3;
  const double q0 = 2 * m * m - 4 * m * m / k + 4 * m * m * ek / k + 6 * m * r2 * s2 * ek / k + 2 * m * m / k2 -
                    4 * m * m * ek / k2 + 2 * m * m * ek2 / k2 + 12 * m * r2 * s2 / k2 + 24 * m * r2 * s2 * ek / k2 +
                    3 * m * s2 / k2 + 6 * m * s2 * ek / k2 - 36 * m * r2 * s2 / k3 + 36 * m * r2 * s2 * ek / k3 -
                    7.5 * m * s2 / k3 + 6 * m * s2 * ek / k3 + 1.5 * m * s2 * ek2 / k3;
  const double ev = cir_mean(p, t - 1);
  const double ev2 = cir_variance(p, t - 1) + ev * ev;
  const double C33 = q0 + q1 * ev + q2 * ev2;

  Matrix C(3, 3);
  C << C11, C12, C13, C12, C22, C23, C13, C23, C33;
  return C;
}

LinearGaussianSSM heston_gaussian_equivalent(const HestonParams& p, int horizon, double dt) {
  p.validate();
  if (dt != 1.0)
    throw std::invalid_argument("heston_gaussian_equivalent: closed forms need unit spacing; use heston_returns_model");
  if (p.mu != 0.0) throw std::invalid_argument("heston_gaussian_equivalent: closed forms assume mu = 0");
  if (horizon < 1) throw std::invalid_argument("heston_gaussian_equivalent: horizon must be >= 1");
  const double k = p.kappa, ek = std::exp(-k);
  Vector a(3);
  a << p.m * (1 - ek), 0.0, p.m * (1 - (1 - ek) / k);
  Matrix A = Matrix::Zero(3, 3);
  A(0, 0) = ek;
  A(2, 0) = (1 - ek) / k;
  std::vector<Matrix> cs;
  for (int t = 1; t <= horizon; ++t) cs.push_back(clamp_psd(heston_closed_form_covariance(p, t)));
  LinearGaussianSSM g;
  g.a = Schedule<Vector>::constant(a);
  g.A = Schedule<Matrix>::constant(A);
  g.C = Schedule<Matrix>::per_step(std::move(cs));
  g.mu0 = Vector::Zero(3);
  g.mu0(0) = p.mu_v;
  g.Sigma0 = Matrix::Zero(3, 3);
  g.Sigma0(0, 0) = p.sigma_v;
  return g;
}

GeneratorMatrix heston_generator(const HestonParams& p, int order) {
  p.validate();
  if (order < 1) throw std::invalid_argument("heston_generator: order must be >= 1");
  const int d = 3;
  auto e = [](std::initializer_list<int> js) {
    std::vector<int> x(3, 0);
    for (int j : js) ++x[static_cast<std::size_t>(j)];
    return MultiIndex(x);
  };
  // Drift (|lambda| = 1) and diffusion (|lambda| = 2) coefficients of the
  // polynomial diffusion, keyed by (lambda, mu).
  struct Entry {
    MultiIndex lam, mu;
    double v;
  };
  const double s = p.sigma, r = p.rho;
  const std::vector<Entry> a{
      {e({0}), e({}), p.kappa * p.m},  {e({0}), e({0}), -p.kappa},   {e({1}), e({}), p.mu},
      {e({2}), e({0}), 1.0},           {e({2}), e({1}), 2.0 * p.mu}, {e({0, 0}), e({0}), s * s},
      {e({0, 1}), e({0}), r * s},      {e({0, 2}), e({0, 1}), 2.0 * r * s},
      {e({1, 1}), e({0}), 1.0},        {e({1, 2}), e({0, 1}), 2.0},  {e({2, 2}), e({0, 2}), 4.0},
  };
  IndexBasis basis = IndexBasis::enumerate(d, order);
  const auto n = static_cast<Eigen::Index>(basis.size());
  Matrix bc = Matrix::Zero(n, n);
  // b^c_{lambda,mu} = sum_nu C(lambda,nu) a_{lambda-nu,mu-nu}
  for (Eigen::Index row = 0; row < n; ++row) {
    const MultiIndex& lam = basis.unrank(static_cast<std::size_t>(row));
    for (const Entry& en : a) {
      if (!en.lam.is_below(lam)) continue;
      const MultiIndex nu = lam - en.lam;
      const MultiIndex mu = en.mu + nu;
      if (en.v == 0.0) continue;
      bc(row, static_cast<Eigen::Index>(basis.rank(mu))) += static_cast<double>(multi_binomial(lam, nu)) * en.v;
    }
  }
  return GeneratorMatrix::constant(std::move(basis), std::move(bc));
}

PolyProcess heston_process(const HestonParams& p, int order) {
  GeneratorMatrix g = heston_generator(p, order);
  const auto& basis = g.basis();
  Vector m0 = Vector::Zero(static_cast<Eigen::Index>(basis.size()));
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const MultiIndex& lam = basis.unrank(i);
    if (lam[1] == 0 && lam[2] == 0) m0(static_cast<Eigen::Index>(i)) = initial_variance_moment(p, lam[0]);
  }
  return PolyProcess(std::move(g), std::move(m0));
}

PolySSM heston_returns_model(const HestonParams& p, int order, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("heston_returns_model: dt must be positive");
  const PolyProcess proc = heston_process(p, order);
  const std::vector<double> grid{0.0, dt};
  const PolySSM bar = discretize(proc, grid);
  const auto& basis = bar.coefficients().basis();
  // dY(t) given F_{t-1} has the law of Y(t) given Y(t-1) = 0, so the
  // (v, dY, dY^2) coefficients are those of (v, Y, Y^2) with every column
  // carrying a power of Y(t-1) removed.
  Matrix b = bar.coefficients().at(1);
  for (std::size_t j = 0; j < basis.size(); ++j) {
    const MultiIndex& mu = basis.unrank(j);
    if (mu[1] != 0 || mu[2] != 0) b.col(static_cast<Eigen::Index>(j)).setZero();
  }
  return PolySSM(CoefficientMatrix::constant(basis, std::move(b)), proc.initial_moments());
}

double noise_moment(int k, double tau) {
  if (k < 0) throw std::invalid_argument("noise_moment: negative order");
  if (k % 2) return 0.0;
  double r = 1.0;
  for (int i = k - 1; i > 0; i -= 2) r *= i;
  return r * std::pow(tau, k);
}

std::mt19937_64 path_rng(std::uint64_t seed, std::uint64_t path_index, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(path_index), static_cast<std::uint32_t>(path_index >> 32),
                    static_cast<std::uint32_t>(stream), 0x9e3779b9u};
  return std::mt19937_64(seq);
}

HestonPath simulate_heston(const HestonParams& p, const NoiseParams& q, const SimulationConfig& cfg,
                           std::uint64_t path_index) {
  p.validate();
  q.validate();
  if (!(cfg.dt > 0.0)) throw std::invalid_argument("simulate_heston: dt must be positive");
  if (cfg.n_steps < 0) throw std::invalid_argument("simulate_heston: n_steps must be non-negative");
  if (cfg.substeps < 1) throw std::invalid_argument("simulate_heston: substeps must be >= 1");

  std::mt19937_64 rng = path_rng(cfg.seed, path_index, 0);
  std::mt19937_64 noise_rng = path_rng(cfg.seed, path_index, 1);
  std::normal_distribution<double> normal(0.0, 1.0);

  double v = p.mu_v;
  if (p.sigma_v > 0.0) {
    std::gamma_distribution<double> g(p.mu_v * p.mu_v / p.sigma_v, p.sigma_v / p.mu_v);
    v = g(rng);
  }
  double y = 0.0;
  const auto n = static_cast<std::size_t>(cfg.n_steps) + 1;
  HestonPath path;
  for (auto* col : {&path.t, &path.v, &path.Y, &path.dY, &path.dY2, &path.Ytilde, &path.dYtilde2}) col->reserve(n);

  auto eps = [&] { return q.tau > 0.0 ? q.tau * normal(noise_rng) : 0.0; };
  double yt = y + eps();
  path.t.push_back(0.0);
  path.v.push_back(v);
  path.Y.push_back(y);
  path.dY.push_back(0.0);
  path.dY2.push_back(0.0);
  path.Ytilde.push_back(yt);
  path.dYtilde2.push_back(0.0);

  const double h = cfg.dt / cfg.substeps;
  const double sq = std::sqrt(h);
  const double rho_c = std::sqrt(std::max(0.0, 1.0 - p.rho * p.rho));
  for (int k = 1; k <= cfg.n_steps; ++k) {
    const double y_prev = y;
    for (int j = 0; j < cfg.substeps; ++j) {
      const double vp = std::max(v, 0.0);
      const double z1 = normal(rng);
      const double z2 = normal(rng);
      const double sv = std::sqrt(vp);
      y += p.mu * h + sv * sq * (p.rho * z1 + rho_c * z2);
      v += p.kappa * (p.m - vp) * h + p.sigma * sv * sq * z1;
    }
    const double yt_prev = yt;
    yt = y + eps();
    const double dy = y - y_prev;
    path.t.push_back(k * cfg.dt);
    path.v.push_back(v);
    path.Y.push_back(y);
    path.dY.push_back(dy);
    path.dY2.push_back(dy * dy);
    path.Ytilde.push_back(yt);
    path.dYtilde2.push_back((yt - yt_prev) * (yt - yt_prev));
  }
  return path;
}

}  // namespace polyfilt
