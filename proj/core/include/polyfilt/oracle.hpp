#pragma once

#include "polyfilt/kalman.hpp"
#include "polyfilt/linalg.hpp"
#include "polyfilt/polyssm.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace polyfilt {

// mu(t), P(t) and P(s, t) = E X(t) X(s)^T of a discrete state process.
class MomentTable {
 public:
  // Exact moments of a polynomial model of order >= 2.
  static MomentTable from_model(const PolySSM& model, int horizon);
  static MomentTable from_gaussian(const LinearGaussianSSM& model, int horizon);

  int horizon() const { return static_cast<int>(points_.size()) - 1; }
  int dim() const { return static_cast<int>(points_.front().mean.size()); }
  const Vector& mean(int t) const { return point(t).mean; }
  const Matrix& second(int t) const { return point(t).second; }
  Matrix covariance(int t) const { return point(t).covariance(); }
  // E X(t) X(s)^T for any s, t in range.
  Matrix cross(int s, int t) const;

 private:
  MomentTable(LinearRecursion rec, std::vector<MomentPoint> points);
  const MomentPoint& point(int t) const;

  LinearRecursion rec_;
  std::vector<MomentPoint> points_;
};

// X(t) ~ alpha + gamma Z with Z = (X_o(0), ..., X_o(s)) stacked.
struct LinearEstimator {
  Vector alpha;
  Matrix gamma;
  Matrix error_cov;
  Vector apply(const Vector& z) const { return alpha + gamma * z; }
};

// Best affine estimator from the moment table (pseudoinverse of Cov(Z)).
LinearEstimator linear_mmse(const MomentTable& table, const ObservationPartition& part, int t, int s,
                            double pinv_tol = 1e-10);

// Stack X_o(0..s) of a state path.
Vector stack_observations(const ObservationPartition& part, std::span<const Vector> states, int s);

struct McEstimate {
  Vector mean;
  Vector std_error;
  std::size_t paths = 0;
};

// One sample path of the state, X(0..T), from an independent engine.
using PathSampler = std::function<std::vector<Vector>(std::uint64_t path_index)>;

// Monte Carlo mean of f(path) with standard errors; paths run on `threads`
// workers and are reduced in index order, so the result depends only on the
// sampler and the path count.
McEstimate mc_mean(const std::function<Vector(const std::vector<Vector>&)>& f, const PathSampler& sampler,
                   std::size_t paths, unsigned threads = 0);

// Sample moments: mean and E X(t) X(t)^T entries flattened, at time t.
McEstimate mc_moments(const PathSampler& sampler, int t, std::size_t paths, unsigned threads = 0);

// Least-squares regression of X(t) on (1, Z) over simulated paths; an
// empirical counterpart of linear_mmse.
LinearEstimator mc_regression(const PathSampler& sampler, const ObservationPartition& part, int t, int s,
                              std::size_t paths, unsigned threads = 0);

}  // namespace polyfilt
