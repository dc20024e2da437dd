#include "polyfilt/polyproc.hpp"

#include "polyfilt/error.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <string>

namespace polyfilt {

GeneratorMatrix GeneratorMatrix::constant(IndexBasis basis, Matrix bc) {
  return piecewise(std::move(basis), {0.0}, {std::move(bc)});
}

GeneratorMatrix GeneratorMatrix::piecewise(IndexBasis basis, std::vector<double> starts, std::vector<Matrix> segments) {
  if (starts.empty() || starts.size() != segments.size())
    throw std::invalid_argument("GeneratorMatrix: need one start time per segment");
  for (std::size_t i = 1; i < starts.size(); ++i)
    if (!(starts[i] > starts[i - 1])) throw std::invalid_argument("GeneratorMatrix: segment starts must increase");
  for (const auto& m : segments) check_coefficient_structure(basis, m, true);
  GeneratorMatrix g;
  g.basis_ = std::move(basis);
  g.starts_ = std::move(starts);
  g.segments_ = std::move(segments);
  return g;
}

const Matrix& GeneratorMatrix::at(double t) const {
  const auto it = std::upper_bound(starts_.begin(), starts_.end(), t);
  if (it == starts_.begin()) return segments_.front();
  return segments_[static_cast<std::size_t>(it - starts_.begin()) - 1];
}

double GeneratorMatrix::entry(const MultiIndex& lambda, const MultiIndex& mu, double t) const {
  return at(t)(static_cast<Eigen::Index>(basis_.rank(lambda)), static_cast<Eigen::Index>(basis_.rank(mu)));
}

PolyProcess::PolyProcess(GeneratorMatrix generator, Vector initial_moments)
    : gen_(std::move(generator)), m0_(std::move(initial_moments)) {
  // Reuse the discrete-model validation of the moment vector.
  const auto n = static_cast<Eigen::Index>(gen_.basis().size());
  Matrix id = Matrix::Identity(n, n);
  (void)PolySSM(CoefficientMatrix::constant(gen_.basis(), id), m0_);
}

void GaussianOU::validate() const {
  const auto d = mu0.size();
  if (d == 0) throw std::invalid_argument("GaussianOU: empty state");
  if (Sigma0.rows() != d || Sigma0.cols() != d) throw std::invalid_argument("GaussianOU: Sigma0 shape");
  for (const auto& v : a.values())
    if (v.size() != d) throw std::invalid_argument("GaussianOU: a shape");
  for (const auto& m : A.values())
    if (m.rows() != d || m.cols() != d) throw std::invalid_argument("GaussianOU: A shape");
  for (const auto& m : C.values()) {
    if (m.rows() != d || m.cols() != d) throw std::invalid_argument("GaussianOU: C shape");
    if (min_eigenvalue(m) < -1e-10 * std::max(1.0, symmetrize(m).operatorNorm()))
      throw NumericalError("GaussianOU: C is not positive semidefinite");
  }
  if (min_eigenvalue(Sigma0) < -1e-10 * std::max(1.0, std::abs(Sigma0.trace())))
    throw NumericalError("GaussianOU: Sigma0 is not positive semidefinite");
}

std::vector<double> GaussianOU::knots() const {
  std::vector<double> k;
  for (const auto* ts : {&a.times(), &A.times(), &C.times()}) k.insert(k.end(), ts->begin(), ts->end());
  std::sort(k.begin(), k.end());
  k.erase(std::unique(k.begin(), k.end()), k.end());
  return k;
}

std::vector<double> uniform_grid(double t_end, double dt) {
  if (!(t_end >= 0.0) || !(dt > 0.0)) throw std::invalid_argument("uniform_grid: need t_end >= 0 and dt > 0");
  const auto n = static_cast<long>(std::ceil(t_end / dt - 1e-9));
  std::vector<double> g;
  g.reserve(static_cast<std::size_t>(n) + 1);
  for (long k = 0; k < n; ++k) g.push_back(static_cast<double>(k) * dt);
  g.push_back(t_end);
  if (n == 0) g.resize(1);
  return g;
}

namespace {

// F(t1) F(t0)^{-1} for a piecewise-constant generator.
Matrix transition(const GeneratorMatrix& g, double t0, double t1) {
  const auto n = static_cast<Eigen::Index>(g.basis().size());
  Matrix f = Matrix::Identity(n, n);
  if (t1 <= t0) return f;
  const auto& st = g.starts();
  double t = t0;
  while (t < t1) {
    auto it = std::upper_bound(st.begin(), st.end(), t);
    const double seg_end = it == st.end() ? t1 : std::min(t1, *it);
    f = matrix_exponential(g.at(t) * (seg_end - t)) * f;
    t = seg_end;
  }
  return f;
}

// Restore the exact structure lost to roundoff in the exponential.
Matrix project_structure(const IndexBasis& basis, Matrix b) {
  const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  const auto n = b.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    const int di = basis.unrank(static_cast<std::size_t>(i)).degree();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (basis.unrank(static_cast<std::size_t>(j)).degree() <= di) continue;
      if (std::abs(b(i, j)) > 1e-9 * scale)
        throw NumericalError("discretize: transition matrix lost its triangular structure");
      b(i, j) = 0.0;
    }
  }
  b.row(0).setZero();
  b(0, 0) = 1.0;
  return b;
}

}  // namespace

PolySSM discretize(const PolyProcess& proc, std::span<const double> times) {
  if (times.size() < 2) throw std::invalid_argument("discretize: need at least two grid points");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (times[i] < times[i - 1]) throw std::invalid_argument("discretize: grid must be non-decreasing");
  const auto& g = proc.generator();
  const auto& basis = g.basis();

  std::vector<Matrix> steps;
  std::map<double, Matrix> cache;  // only valid for a constant generator
  bool uniform = g.is_constant();
  for (std::size_t k = 1; k < times.size(); ++k) {
    const double dt = times[k] - times[k - 1];
    if (k > 1 && dt != times[1] - times[0]) uniform = false;
    if (g.is_constant()) {
      auto it = cache.find(dt);
      if (it == cache.end())
        it = cache.emplace(dt, project_structure(basis, transition(g, times[k - 1], times[k]))).first;
      steps.push_back(it->second);
    } else {
      steps.push_back(project_structure(basis, transition(g, times[k - 1], times[k])));
    }
  }
  // Moments at times[0] if the grid does not start at the origin.
  Vector m0 = proc.initial_moments();
  if (times[0] != 0.0) {
    if (times[0] < 0.0) throw std::invalid_argument("discretize: grid must start at t >= 0");
    m0 = transition(g, 0.0, times[0]) * m0;
    m0(0) = 1.0;
  }
  Schedule<Matrix> sched = uniform ? Schedule<Matrix>::constant(steps.front()) : Schedule<Matrix>::per_step(steps);
  return PolySSM(CoefficientMatrix(basis, std::move(sched)), std::move(m0));
}

std::vector<Vector> process_moments(const PolyProcess& proc, std::span<const double> times) {
  std::vector<Vector> out;
  out.reserve(times.size());
  Vector m = proc.initial_moments();
  double t = 0.0;
  std::map<double, Matrix> cache;
  for (double tk : times) {
    if (tk < t) throw std::invalid_argument("process_moments: times must be non-decreasing and >= 0");
    if (tk > t) {
      if (proc.generator().is_constant()) {
        const double dt = tk - t;
        auto it = cache.find(dt);
        if (it == cache.end()) it = cache.emplace(dt, transition(proc.generator(), t, tk)).first;
        m = it->second * m;
      } else {
        m = transition(proc.generator(), t, tk) * m;
      }
      m(0) = 1.0;
    }
    t = tk;
    out.push_back(m);
  }
  return out;
}

namespace {

// a_{lambda,mu} = sum_{nu <= lambda, nu <= mu} (-1)^|nu| C(lambda,nu) b^c_{lambda-nu,mu-nu}
double carre_du_champ_coeff(const IndexBasis& basis, const Matrix& bc, const MultiIndex& lam, const MultiIndex& mu) {
  double s = 0.0;
  const int d = lam.dim();
  std::vector<int> nu(static_cast<std::size_t>(d), 0);
  std::function<void(int)> rec = [&](int j) {
    if (j == d) {
      const MultiIndex n(nu);
      const double sign = (n.degree() % 2) ? -1.0 : 1.0;
      const double w = sign * static_cast<double>(multi_binomial(lam, n));
      s += w * bc(static_cast<Eigen::Index>(basis.rank(lam - n)), static_cast<Eigen::Index>(basis.rank(mu - n)));
      return;
    }
    for (int e = 0; e <= std::min(lam[j], mu[j]); ++e) {
      nu[static_cast<std::size_t>(j)] = e;
      rec(j + 1);
    }
    nu[static_cast<std::size_t>(j)] = 0;
  };
  rec(0);
  return s;
}

// Rows: pairs (i,j) with i <= j; cols: basis index. C_ij = row . moments.
Matrix diffusion_functional(const GeneratorMatrix& g, double t) {
  const auto& basis = g.basis();
  const int d = basis.dim();
  const Matrix& bc = g.at(t);
  const auto n = static_cast<Eigen::Index>(basis.size());
  const auto end2 = static_cast<Eigen::Index>(basis.degree_begin(3));
  Matrix f = Matrix::Zero(d * d, n);
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      const MultiIndex lam = MultiIndex::unit(d, i) + MultiIndex::unit(d, j);
      for (Eigen::Index c = 0; c < end2; ++c) {
        const double v = carre_du_champ_coeff(basis, bc, lam, basis.unrank(static_cast<std::size_t>(c)));
        f(i * d + j, c) = v;
        f(j * d + i, c) = v;
      }
    }
  return f;
}

Matrix unflatten(const Vector& v, int d) {
  Matrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = v(i * d + j);
  return m;
}

}  // namespace

Matrix diffusion_covariance(const PolyProcess& proc, double t, const Vector& moments) {
  if (proc.order() < 2) throw std::invalid_argument("diffusion_covariance needs order >= 2");
  if (moments.size() != static_cast<Eigen::Index>(proc.generator().basis().size()))
    throw std::invalid_argument("diffusion_covariance: moment vector length mismatch");
  const Matrix c = unflatten(diffusion_functional(proc.generator(), t) * moments, proc.dim());
  return clamp_psd(c, 1e-10, "diffusion covariance");
}

GaussianOU gaussian_equivalent_continuous(const PolyProcess& proc, std::span<const double> grid) {
  if (proc.order() < 2) throw std::invalid_argument("gaussian_equivalent_continuous needs order >= 2");
  if (grid.empty()) throw std::invalid_argument("gaussian_equivalent_continuous: empty grid");
  const auto& g = proc.generator();
  const int d = proc.dim();
  std::vector<Vector> as;
  std::vector<Matrix> As;
  for (const auto& seg : g.segments()) {
    as.push_back(seg.block(1, 0, d, 1));
    As.push_back(seg.block(1, 1, d, d));
  }
  GaussianOU ou;
  ou.a = TimeFunction<Vector>(g.starts(), as, TimeFunction<Vector>::Interp::Hold);
  ou.A = TimeFunction<Matrix>(g.starts(), As, TimeFunction<Matrix>::Interp::Hold);

  const std::vector<Vector> mom = process_moments(proc, grid);
  std::vector<Matrix> cs, dcs;
  std::vector<double> ts(grid.begin(), grid.end());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Matrix f = diffusion_functional(g, grid[k]);
    cs.push_back(clamp_psd(unflatten(f * mom[k], d), 1e-10, "diffusion covariance"));
    // d/dt E X^mu = (B^c m)_mu, so C is Hermite-interpolable exactly to
    // fourth order between grid points.
    dcs.push_back(symmetrize(unflatten(f * (g.at(grid[k]) * mom[k]), d)));
  }
  if (ts.size() == 1)
    ou.C = TimeFunction<Matrix>::constant(cs.front());
  else
    ou.C = TimeFunction<Matrix>(ts, cs, dcs);
  const MomentPoint m0 = state_moments(g.basis(), proc.initial_moments());
  ou.mu0 = m0.mean;
  ou.Sigma0 = clamp_psd(m0.covariance(), 1e-10, "initial covariance");
  return ou;
}

PolyProcess lift_ou(const GaussianOU& ou) {
  ou.validate();
  if (!ou.a.is_constant() || !ou.A.is_constant() || !ou.C.is_constant())
    throw std::invalid_argument("lift_ou needs constant coefficients");
  const int d = ou.dim();
  const Vector a = ou.a.at(0.0);
  const Matrix A = ou.A.at(0.0);
  const Matrix C = ou.C.at(0.0);
  IndexBasis basis = IndexBasis::enumerate(d, 2);
  const auto n = static_cast<Eigen::Index>(basis.size());
  auto r1 = [&](int i) { return static_cast<Eigen::Index>(basis.rank(MultiIndex::unit(d, i))); };
  auto r2 = [&](int i, int j) {
    return static_cast<Eigen::Index>(basis.rank(MultiIndex::unit(d, i) + MultiIndex::unit(d, j)));
  };
  Matrix bc = Matrix::Zero(n, n);
  for (int i = 0; i < d; ++i) {
    bc(r1(i), 0) = a(i);
    for (int k = 0; k < d; ++k) bc(r1(i), r1(k)) = A(i, k);
  }
  // G x_i x_j = x_i (a_j + A_j x) + x_j (a_i + A_i x) + C_ij
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      const Eigen::Index row = r2(i, j);
      bc(row, 0) = C(i, j);
      bc(row, r1(i)) += a(j);
      bc(row, r1(j)) += a(i);
      for (int l = 0; l < d; ++l) {
        bc(row, r2(i, l)) += A(j, l);
        bc(row, r2(j, l)) += A(i, l);
      }
    }
  Vector m0 = gaussian_moments(basis, ou.mu0, ou.Sigma0);
  return PolyProcess(GeneratorMatrix::constant(std::move(basis), std::move(bc)), std::move(m0));
}

MomentTrajectory moment_ode(const GaussianOU& model, const Vector& mu0, const Matrix& P0, std::span<const double> grid,
                            std::optional<std::size_t> cross_from, const OdeOptions& opts) {
  const int d = model.dim();
  if (mu0.size() != d || P0.rows() != d || P0.cols() != d) throw std::invalid_argument("moment_ode: dimension mismatch");
  if (grid.empty()) throw std::invalid_argument("moment_ode: empty grid");
  if (cross_from && *cross_from >= grid.size()) throw std::out_of_range("moment_ode: cross_from outside grid");
  const std::vector<double> knots = model.knots();

  OdeRhs rhs = [&](double t, const Vector& y, Vector& dy) {
    const Vector a = model.a.at(t);
    const Matrix A = model.A.at(t);
    const Vector mu = y.head(d);
    const Matrix P = symmetrize(Eigen::Map<const Matrix>(y.data() + d, d, d));
    dy.resize(y.size());
    dy.head(d) = a + A * mu;
    const Matrix dP = mu * a.transpose() + a * mu.transpose() + P * A.transpose() + A * P + model.C.at(t);
    Eigen::Map<Matrix>(dy.data() + d, d, d) = symmetrize(dP);
  };
  Vector y0(d + d * d);
  y0.head(d) = mu0;
  Eigen::Map<Matrix>(y0.data() + d, d, d) = symmetrize(P0);
  const auto ys = integrate_rk45(rhs, y0, grid, opts, knots);

  MomentTrajectory out;
  out.times.assign(grid.begin(), grid.end());
  for (const auto& y : ys) {
    out.mean.push_back(y.head(d));
    out.second.push_back(symmetrize(Eigen::Map<const Matrix>(y.data() + d, d, d)));
  }
  if (cross_from) {
    const std::size_t s = *cross_from;
    out.cross_from = s;
    const Vector mu_s = out.mean[s];
    OdeRhs qrhs = [&](double t, const Vector& y, Vector& dy) {
      const Matrix Q = Eigen::Map<const Matrix>(y.data(), d, d);
      dy.resize(y.size());
      Eigen::Map<Matrix>(dy.data(), d, d) = model.a.at(t) * mu_s.transpose() + model.A.at(t) * Q;
    };
    Vector q0(d * d);
    Eigen::Map<Matrix>(q0.data(), d, d) = out.second[s];
    std::span<const double> tail = grid.subspan(s);
    const auto qs = integrate_rk45(qrhs, q0, tail, opts, knots);
    out.cross.assign(s, Matrix());
    for (const auto& q : qs) out.cross.push_back(Eigen::Map<const Matrix>(q.data(), d, d));
  }
  return out;
}

MomentTrajectory moment_ode(const PolyProcess& proc, std::span<const double> grid,
                            std::optional<std::size_t> cross_from, const OdeOptions& opts) {
  const GaussianOU ou = gaussian_equivalent_continuous(proc, grid);
  const Matrix P0 = ou.Sigma0 + ou.mu0 * ou.mu0.transpose();
  return moment_ode(ou, ou.mu0, P0, grid, cross_from, opts);
}

}  // namespace polyfilt
