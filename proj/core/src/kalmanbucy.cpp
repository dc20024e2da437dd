#include "polyfilt/kalmanbucy.hpp"

#include "polyfilt/error.hpp"

#include <cmath>
#include <string>

namespace polyfilt {

void ObservationPath::validate(int observed_count) const {
  if (times.empty() || times.size() != values.size())
    throw std::invalid_argument("ObservationPath: times and values must be non-empty and of equal length");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw std::invalid_argument("ObservationPath: grid must increase strictly");
  for (const auto& v : values) {
    if (v.size() != observed_count) throw std::invalid_argument("ObservationPath: wrong observation width");
    if (!v.allFinite()) throw std::invalid_argument("ObservationPath: non-finite observation");
  }
}

Matrix initial_error_covariance(const Matrix& Sigma0, const ObservationPartition& part, double pinv_tol) {
  const auto& o = part.observed();
  const Matrix S_xo = take_cols(Sigma0, o);
  return clamp_psd_trace(Sigma0 - S_xo * pseudo_inverse(take(Sigma0, o, o), pinv_tol) * S_xo.transpose(), 1e-8,
                         "initial error covariance");
}

Vector initial_estimate(const Vector& mu0, const Matrix& Sigma0, const ObservationPartition& part, const Vector& x_o0,
                        double pinv_tol) {
  const auto& o = part.observed();
  const Matrix S_xo = take_cols(Sigma0, o);
  return mu0 + S_xo * pseudo_inverse(take(Sigma0, o, o), pinv_tol) * (x_o0 - take(mu0, o));
}

namespace {

struct ObsBlocks {
  Matrix Co;
  Matrix C_xo;
  Matrix Ao;
};

ObsBlocks blocks(const GaussianOU& model, const ObservationPartition& part, double t) {
  const auto& o = part.observed();
  const Matrix C = model.C.at(t);
  return {take(C, o, o), take_cols(C, o), take_rows(model.A.at(t), o)};
}

void check_regular(const Matrix& Co, double t, double limit) {
  const double cond = condition_number(Co);
  if (!(cond <= limit))
    throw NumericalError("C_o(t) is not regular at t = " + std::to_string(t) + " (condition number " +
                         std::to_string(cond) + ")");
}

Matrix gain(const ObsBlocks& b, const Matrix& Sigma) {
  // Psi^T = C_o^{-1} (A_o Sigma + C_{o,:})
  return b.Co.ldlt().solve(b.Ao * Sigma + b.C_xo.transpose()).transpose();
}

}  // namespace

Matrix kalman_bucy_gain(const GaussianOU& model, const ObservationPartition& part, const Matrix& Sigma, double t,
                        double condition_limit) {
  const ObsBlocks b = blocks(model, part, t);
  check_regular(b.Co, t, condition_limit);
  return gain(b, Sigma);
}

RiccatiSolution riccati_solve(const GaussianOU& model, const ObservationPartition& part, const Matrix& Sigma_hat0,
                              std::span<const double> grid, const KalmanBucyOptions& opts) {
  model.validate();
  const int d = model.dim();
  if (part.dim() != d) throw std::invalid_argument("riccati_solve: partition dimension mismatch");
  if (Sigma_hat0.rows() != d || Sigma_hat0.cols() != d) throw std::invalid_argument("riccati_solve: Sigma0 shape");
  if (grid.empty()) throw std::invalid_argument("riccati_solve: empty grid");
  for (double t : grid) check_regular(blocks(model, part, t).Co, t, opts.condition_limit);

  const int dd = d * d;
  const bool with_gamma = opts.with_gamma;
  OdeRhs rhs = [&](double t, const Vector& y, Vector& dy) {
    const ObsBlocks b = blocks(model, part, t);
    const Matrix S = symmetrize(Eigen::Map<const Matrix>(y.data(), d, d));
    const Matrix A = model.A.at(t);
    const Matrix Psi = gain(b, S);
    // Sigma' = A S + S A^T + C - Psi C_o Psi^T
    const Matrix dS = A * S + S * A.transpose() + model.C.at(t) - Psi * b.Co * Psi.transpose();
    dy.resize(y.size());
    Eigen::Map<Matrix>(dy.data(), d, d) = symmetrize(dS);
    if (with_gamma) {
      const Matrix G = Eigen::Map<const Matrix>(y.data() + dd, d, d);
      Eigen::Map<Matrix>(dy.data() + dd, d, d) = G * (A - Psi * b.Ao).transpose();
    }
  };
  Vector y0(with_gamma ? 2 * dd : dd);
  Eigen::Map<Matrix>(y0.data(), d, d) = symmetrize(Sigma_hat0);
  if (with_gamma) Eigen::Map<Matrix>(y0.data() + dd, d, d) = Matrix::Identity(d, d);
  // Step control on Sigma alone, so Sigma does not depend on with_gamma.
  OdeOptions ode = opts.ode;
  ode.error_components = dd;
  const auto ys = integrate_rk45(rhs, y0, grid, ode, model.knots());

  RiccatiSolution sol;
  sol.times.assign(grid.begin(), grid.end());
  for (std::size_t k = 0; k < ys.size(); ++k) {
    const Matrix S = clamp_psd_trace(Eigen::Map<const Matrix>(ys[k].data(), d, d), opts.psd_tol, "Riccati solution");
    sol.Psi.push_back(gain(blocks(model, part, grid[k]), S));
    sol.Sigma.push_back(S);
    if (with_gamma) {
      Matrix G = Eigen::Map<const Matrix>(ys[k].data() + dd, d, d);
      const double cond = condition_number(G);
      sol.max_gamma_condition = std::max(sol.max_gamma_condition, cond);
      if (!(cond <= opts.condition_limit))
        throw NumericalError("Gamma(t) is numerically singular at t = " + std::to_string(grid[k]));
      sol.Gamma.push_back(std::move(G));
    }
  }
  return sol;
}

ContinuousFilterOutput kb_filter(const GaussianOU& model, const ObservationPartition& part, const ObservationPath& path,
                                 const KalmanBucyOptions& opts) {
  path.validate(part.observed_count());
  const auto& o = part.observed();
  const Matrix S0 = initial_error_covariance(model.Sigma0, part, opts.pinv_tol);
  ContinuousFilterOutput out;
  out.riccati = riccati_solve(model, part, S0, path.times, opts);
  out.times = path.times;
  Vector x = initial_estimate(model.mu0, model.Sigma0, part, path.values.front(), opts.pinv_tol);
  out.mean.push_back(x);
  for (std::size_t k = 0; k + 1 < path.times.size(); ++k) {
    const double t = path.times[k];
    const double dt = path.times[k + 1] - t;
    const Vector drift = model.a.at(t) + model.A.at(t) * x;
    const Vector innov = (path.values[k + 1] - path.values[k]) - take(drift, o) * dt;
    x = x + drift * dt + out.riccati.Psi[k] * innov;
    if (!x.allFinite()) throw NumericalError("kb_filter: estimate became non-finite");
    out.mean.push_back(x);
  }
  return out;
}

ContinuousPrediction kb_predict(const GaussianOU& model, const Vector& x_s, const Matrix& Sigma_s,
                                std::span<const double> times, const KalmanBucyOptions& opts) {
  const int d = model.dim();
  if (times.size() < 2) throw std::invalid_argument("kb_predict: need the start time and at least one target");
  if (!(times.back() > times.front())) throw std::invalid_argument("kb_predict: target time must exceed s");
  if (x_s.size() != d || Sigma_s.rows() != d || Sigma_s.cols() != d)
    throw std::invalid_argument("kb_predict: dimension mismatch");
  OdeRhs rhs = [&](double t, const Vector& y, Vector& dy) {
    const Matrix A = model.A.at(t);
    const Matrix S = symmetrize(Eigen::Map<const Matrix>(y.data() + d, d, d));
    dy.resize(y.size());
    dy.head(d) = model.a.at(t) + A * y.head(d);
    Eigen::Map<Matrix>(dy.data() + d, d, d) = symmetrize(A * S + S * A.transpose() + model.C.at(t));
  };
  Vector y0(d + d * d);
  y0.head(d) = x_s;
  Eigen::Map<Matrix>(y0.data() + d, d, d) = symmetrize(Sigma_s);
  const auto ys = integrate_rk45(rhs, y0, times, opts.ode, model.knots());
  ContinuousPrediction p;
  p.times.assign(times.begin(), times.end());
  for (const auto& y : ys) {
    p.mean.push_back(y.head(d));
    p.cov.push_back(clamp_psd_trace(Eigen::Map<const Matrix>(y.data() + d, d, d), opts.psd_tol, "prediction covariance"));
  }
  return p;
}

namespace {

void check_smoother_inputs(const ObservationPartition& part, const ObservationPath& path,
                           const ContinuousFilterOutput& out, std::size_t s_idx) {
  if (out.riccati.Gamma.size() != out.times.size())
    throw std::invalid_argument("kb_smooth: filter output lacks Gamma (run kb_filter with with_gamma = true)");
  if (path.times.size() != out.times.size()) throw std::invalid_argument("kb_smooth: path and filter grids differ");
  if (s_idx >= out.times.size()) throw std::out_of_range("kb_smooth: s outside the filtered grid");
  path.validate(part.observed_count());
}

}  // namespace

std::vector<ContinuousEstimate> kb_smooth_all(const GaussianOU& model, const ObservationPartition& part,
                                              const ObservationPath& path, const ContinuousFilterOutput& out,
                                              std::size_t s_idx) {
  check_smoother_inputs(part, path, out, s_idx);
  const int d = model.dim();
  const auto& o = part.observed();
  const auto& G = out.riccati.Gamma;
  // Backward sums of Gamma(r) A_o^T C_o^{-1} [innovation] and
  // Gamma(r) A_o^T C_o^{-1} A_o Gamma(r)^T dr over r = t..s-1 (left points).
  Vector J = Vector::Zero(d);
  Matrix K = Matrix::Zero(d, d);
  std::vector<ContinuousEstimate> res(s_idx + 1);
  for (std::size_t k = s_idx + 1; k-- > 0;) {
    if (k < s_idx) {
      const double r = out.times[k];
      const double dr = out.times[k + 1] - r;
      const ObsBlocks b = blocks(model, part, r);
      const Vector drift_o = take(Vector(model.a.at(r) + model.A.at(r) * out.mean[k]), o);
      const Vector innov = (path.values[k + 1] - path.values[k]) - drift_o * dr;
      const Matrix W = G[k] * b.Ao.transpose();  // d x |o|
      const Eigen::LDLT<Matrix> co(b.Co);
      J += W * co.solve(innov);
      K += W * co.solve(W.transpose()) * dr;
    }
    const Matrix& S = out.riccati.Sigma[k];
    ContinuousEstimate e;
    e.t = out.times[k];
    e.s = out.times[s_idx];
    if (k == s_idx) {
      e.mean = out.mean[k];
      e.cov = S;
    } else {
      // L = Sigma(t) Gamma(t)^{-1}, via a solve with Gamma^T.
      const Matrix L = G[k].transpose().partialPivLu().solve(S).transpose();
      e.mean = out.mean[k] + L * J;
      e.cov = clamp_psd_trace(S - L * K * L.transpose(), 1e-8, "smoother covariance");
    }
    res[k] = std::move(e);
  }
  return res;
}

ContinuousEstimate kb_smooth(const GaussianOU& model, const ObservationPartition& part, const ObservationPath& path,
                             const ContinuousFilterOutput& out, std::size_t t_idx, std::size_t s_idx) {
  if (s_idx <= t_idx) throw std::invalid_argument("kb_smooth: need s > t");
  check_smoother_inputs(part, path, out, s_idx);
  const int d = model.dim();
  const auto& o = part.observed();
  const auto& G = out.riccati.Gamma;
  Vector J = Vector::Zero(d);
  Matrix K = Matrix::Zero(d, d);
  for (std::size_t k = t_idx; k < s_idx; ++k) {
    const double r = out.times[k];
    const double dr = out.times[k + 1] - r;
    const ObsBlocks b = blocks(model, part, r);
    const Vector drift_o = take(Vector(model.a.at(r) + model.A.at(r) * out.mean[k]), o);
    const Vector innov = (path.values[k + 1] - path.values[k]) - drift_o * dr;
    const Matrix W = G[k] * b.Ao.transpose();
    const Eigen::LDLT<Matrix> co(b.Co);
    J += W * co.solve(innov);
    K += W * co.solve(W.transpose()) * dr;
  }
  const Matrix& S = out.riccati.Sigma[t_idx];
  const Matrix L = G[t_idx].transpose().partialPivLu().solve(S).transpose();
  ContinuousEstimate e;
  e.t = out.times[t_idx];
  e.s = out.times[s_idx];
  e.mean = out.mean[t_idx] + L * J;
  e.cov = clamp_psd_trace(S - L * K * L.transpose(), 1e-8, "smoother covariance");
  return e;
}

}  // namespace polyfilt
