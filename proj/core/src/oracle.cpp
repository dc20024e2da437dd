#include "polyfilt/oracle.hpp"

#include "polyfilt/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

namespace polyfilt {

MomentTable::MomentTable(LinearRecursion rec, std::vector<MomentPoint> points)
    : rec_(std::move(rec)), points_(std::move(points)) {}

MomentTable MomentTable::from_model(const PolySSM& model, int horizon) {
  if (model.order() < 2) throw std::invalid_argument("MomentTable: model order must be >= 2");
  if (horizon < 0) throw std::invalid_argument("MomentTable: negative horizon");
  const auto path = moment_path(model, horizon);
  std::vector<MomentPoint> pts;
  pts.reserve(path.size());
  for (const auto& m : path) pts.push_back(state_moments(model.coefficients().basis(), m));
  return MomentTable(extract_linear(model.coefficients(), 1), std::move(pts));
}

MomentTable MomentTable::from_gaussian(const LinearGaussianSSM& model, int horizon) {
  if (horizon < 0) throw std::invalid_argument("MomentTable: negative horizon");
  return MomentTable(model.recursion(), second_moments(model, horizon));
}

const MomentPoint& MomentTable::point(int t) const {
  if (t < 0 || t > horizon()) throw std::out_of_range("MomentTable: time " + std::to_string(t) + " out of range");
  return points_[static_cast<std::size_t>(t)];
}

Matrix MomentTable::cross(int s, int t) const {
  if (s > t) return cross(t, s).transpose();
  const MomentPoint& ps = point(s);
  point(t);
  return cross_moment(rec_, ps.second, ps.mean, s, t);
}

LinearEstimator linear_mmse(const MomentTable& table, const ObservationPartition& part, int t, int s,
                            double pinv_tol) {
  if (s < 0 || s > table.horizon() || t < 0 || t > table.horizon())
    throw std::out_of_range("linear_mmse: times out of range");
  const auto& o = part.observed();
  const Eigen::Index k = part.observed_count();
  const Eigen::Index nz = k * (s + 1);
  const int d = table.dim();

  Vector mz(nz);
  Matrix szz(nz, nz);
  Matrix sxz(d, nz);
  const Vector& mx = table.mean(t);
  for (int r = 0; r <= s; ++r) {
    mz.segment(r * k, k) = take(table.mean(r), o);
    // E X(t) X_o(r)^T
    sxz.middleCols(r * k, k) = take_cols(table.cross(r, t), o);
    for (int q = 0; q <= r; ++q) {
      const Matrix blk = take(table.cross(q, r), o, o);  // E X_o(r) X_o(q)^T
      szz.block(r * k, q * k, k, k) = blk;
      szz.block(q * k, r * k, k, k) = blk.transpose();
    }
  }
  const Matrix cov_zz = symmetrize(szz - mz * mz.transpose());
  const Matrix cov_xz = sxz - mx * mz.transpose();
  LinearEstimator e;
  e.gamma = cov_xz * pseudo_inverse(cov_zz, pinv_tol);
  e.alpha = mx - e.gamma * mz;
  e.error_cov = symmetrize(table.covariance(t) - e.gamma * cov_xz.transpose());
  return e;
}

Vector stack_observations(const ObservationPartition& part, std::span<const Vector> states, int s) {
  if (s < 0 || static_cast<std::size_t>(s) >= states.size())
    throw std::out_of_range("stack_observations: path too short");
  const Eigen::Index k = part.observed_count();
  Vector z(k * (s + 1));
  for (int r = 0; r <= s; ++r) z.segment(r * k, k) = take(states[static_cast<std::size_t>(r)], part.observed());
  return z;
}

namespace {

std::vector<Vector> evaluate_paths(const std::function<Vector(const std::vector<Vector>&)>& f,
                                   const PathSampler& sampler, std::size_t paths, unsigned threads) {
  if (paths == 0) throw std::invalid_argument("Monte Carlo: need at least one path");
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, paths));
  std::vector<Vector> out(paths);
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < paths; i += threads) out[i] = f(sampler(i));
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace

McEstimate mc_mean(const std::function<Vector(const std::vector<Vector>&)>& f, const PathSampler& sampler,
                   std::size_t paths, unsigned threads) {
  const auto vals = evaluate_paths(f, sampler, paths, threads);
  const Eigen::Index n = vals.front().size();
  Vector sum = Vector::Zero(n), sq = Vector::Zero(n);
  for (const auto& v : vals) {
    if (v.size() != n) throw std::invalid_argument("mc_mean: inconsistent output sizes");
    sum += v;
    sq += v.cwiseProduct(v);
  }
  const double np = static_cast<double>(paths);
  McEstimate e;
  e.paths = paths;
  e.mean = sum / np;
  Vector var = (sq / np - e.mean.cwiseProduct(e.mean)).cwiseMax(0.0);
  if (paths > 1) var *= np / (np - 1.0);
  e.std_error = (var / np).cwiseSqrt();
  return e;
}

McEstimate mc_moments(const PathSampler& sampler, int t, std::size_t paths, unsigned threads) {
  auto f = [t](const std::vector<Vector>& path) -> Vector {
    if (t < 0 || static_cast<std::size_t>(t) >= path.size()) throw std::out_of_range("mc_moments: time out of range");
    const Vector& x = path[static_cast<std::size_t>(t)];
    const Eigen::Index d = x.size();
    Vector out(d + d * d);
    out.head(d) = x;
    const Matrix xx = x * x.transpose();
    out.tail(d * d) = xx.reshaped();
    return out;
  };
  return mc_mean(f, sampler, paths, threads);
}

LinearEstimator mc_regression(const PathSampler& sampler, const ObservationPartition& part, int t, int s,
                              std::size_t paths, unsigned threads) {
  auto f = [&](const std::vector<Vector>& path) -> Vector {
    if (t < 0 || static_cast<std::size_t>(t) >= path.size()) throw std::out_of_range("mc_regression: time out of range");
    const Vector z = stack_observations(part, path, s);
    const Vector& x = path[static_cast<std::size_t>(t)];
    Vector out(x.size() + z.size());
    out << x, z;
    return out;
  };
  const auto rows = evaluate_paths(f, sampler, paths, threads);
  const Eigen::Index d = part.dim();
  const Eigen::Index nz = rows.front().size() - d;
  Matrix X(static_cast<Eigen::Index>(paths), d), Z(static_cast<Eigen::Index>(paths), nz + 1);
  for (std::size_t i = 0; i < paths; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    X.row(r) = rows[i].head(d).transpose();
    Z(r, 0) = 1.0;
    Z.row(r).tail(nz) = rows[i].tail(nz).transpose();
  }
  const Matrix coef = Z.completeOrthogonalDecomposition().solve(X);  // (nz+1) x d
  LinearEstimator e;
  e.alpha = coef.row(0).transpose();
  e.gamma = coef.bottomRows(nz).transpose();
  const Matrix resid = X - Z * coef;
  e.error_cov = symmetrize(resid.transpose() * resid / static_cast<double>(paths));
  return e;
}

}  // namespace polyfilt
