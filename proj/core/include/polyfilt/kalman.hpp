#pragma once

#include "polyfilt/linalg.hpp"
#include "polyfilt/polyssm.hpp"

#include <span>
#include <vector>

namespace polyfilt {

// Which state coordinates are observed (0-based, any subset).
class ObservationPartition {
 public:
  ObservationPartition() = default;
  ObservationPartition(IndexList observed, int dim, bool allow_empty = false);

  int dim() const { return dim_; }
  const IndexList& observed() const { return obs_; }
  const IndexList& unobserved() const { return unobs_; }
  int observed_count() const { return static_cast<int>(obs_.size()); }
  bool is_observed(int i) const;

 private:
  int dim_ = 0;
  IndexList obs_;
  IndexList unobs_;
};

// Estimate of X(t) from observations X_o(0..s).
struct FilterState {
  int t = 0;
  int s = 0;
  Vector mean;
  Matrix cov;
};

struct KalmanOptions {
  double pinv_tol = 1e-12;
  double psd_tol = 1e-8;  // relative to the trace
};

struct FilterRun {
  std::vector<FilterState> filtered;   // (t, t), t = 0..T
  std::vector<FilterState> predicted;  // (t, t-1), t = 0..T; entry 0 is the prior
};

// Measurement update of a prior (t, t-1) with X_o(t) = y.
FilterState kalman_update(const FilterState& prior, const ObservationPartition& part, const Vector& y,
                          const KalmanOptions& opts = {});

// One time step: (t, s) -> (t+1, s).
FilterState kalman_step(const LinearGaussianSSM& model, const FilterState& state, const KalmanOptions& opts = {});

FilterRun filter(const LinearGaussianSSM& model, const ObservationPartition& part, std::span<const Vector> observations,
                 const KalmanOptions& opts = {});

FilterState predict(const LinearGaussianSSM& model, const FilterState& state, int t, const KalmanOptions& opts = {});

// Fixed-interval RTS smoother: (t, s) for t = 0..s.
std::vector<FilterState> smooth(const LinearGaussianSSM& model, const FilterRun& run, int s,
                                const KalmanOptions& opts = {});

}  // namespace polyfilt
