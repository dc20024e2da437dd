#include "polyfilt/kalman.hpp"

#include "polyfilt/error.hpp"

#include <algorithm>
#include <string>

namespace polyfilt {

ObservationPartition::ObservationPartition(IndexList observed, int dim, bool allow_empty)
    : dim_(dim), obs_(std::move(observed)) {
  if (dim < 1) throw std::invalid_argument("ObservationPartition: dimension must be positive");
  std::sort(obs_.begin(), obs_.end());
  if (std::adjacent_find(obs_.begin(), obs_.end()) != obs_.end())
    throw std::invalid_argument("ObservationPartition: duplicate observed index");
  for (int i : obs_)
    if (i < 0 || i >= dim) throw std::out_of_range("ObservationPartition: observed index " + std::to_string(i));
  if (obs_.empty() && !allow_empty) throw std::invalid_argument("ObservationPartition: no observed coordinates");
  for (int i = 0; i < dim; ++i)
    if (!std::binary_search(obs_.begin(), obs_.end(), i)) unobs_.push_back(i);
}

bool ObservationPartition::is_observed(int i) const { return std::binary_search(obs_.begin(), obs_.end(), i); }

FilterState kalman_update(const FilterState& prior, const ObservationPartition& part, const Vector& y,
                          const KalmanOptions& opts) {
  const auto& o = part.observed();
  if (y.size() != part.observed_count())
    throw std::invalid_argument("kalman_update: observation has " + std::to_string(y.size()) + " entries, expected " +
                                std::to_string(part.observed_count()));
  if (!y.allFinite()) throw std::invalid_argument("kalman_update: non-finite observation");
  FilterState post = prior;
  post.s = prior.t;
  if (o.empty()) return post;
  const Matrix S_xo = take_cols(prior.cov, o);
  const Matrix S_oo = take(prior.cov, o, o);
  const Matrix K = S_xo * pseudo_inverse(S_oo, opts.pinv_tol);
  post.mean = prior.mean + K * (y - take(prior.mean, o));
  post.cov = clamp_psd_trace(prior.cov - K * S_xo.transpose(), opts.psd_tol, "filter error covariance");
  return post;
}

FilterState kalman_step(const LinearGaussianSSM& model, const FilterState& state, const KalmanOptions& opts) {
  const int t = state.t + 1;
  const Matrix& A = model.A.at(t);
  FilterState next;
  next.t = t;
  next.s = state.s;
  next.mean = model.a.at(t) + A * state.mean;
  next.cov = clamp_psd_trace(A * state.cov * A.transpose() + model.C.at(t), opts.psd_tol, "prediction covariance");
  return next;
}

FilterRun filter(const LinearGaussianSSM& model, const ObservationPartition& part, std::span<const Vector> observations,
                 const KalmanOptions& opts) {
  model.validate();
  if (part.dim() != model.dim()) throw std::invalid_argument("filter: partition dimension mismatch");
  if (observations.empty()) throw std::invalid_argument("filter: need at least the time-0 observation");
  FilterRun run;
  FilterState prior{0, -1, model.mu0, symmetrize(model.Sigma0)};
  for (std::size_t t = 0; t < observations.size(); ++t) {
    if (t > 0) prior = kalman_step(model, run.filtered.back(), opts);
    run.predicted.push_back(prior);
    run.filtered.push_back(kalman_update(prior, part, observations[t], opts));
  }
  return run;
}

FilterState predict(const LinearGaussianSSM& model, const FilterState& state, int t, const KalmanOptions& opts) {
  if (t <= state.t) throw std::invalid_argument("predict: target time must exceed the state time");
  FilterState cur = state;
  while (cur.t < t) cur = kalman_step(model, cur, opts);
  return cur;
}

std::vector<FilterState> smooth(const LinearGaussianSSM& model, const FilterRun& run, int s, const KalmanOptions& opts) {
  if (s < 0 || s >= static_cast<int>(run.filtered.size()))
    throw std::out_of_range("smooth: data horizon " + std::to_string(s) + " not covered by the forward pass");
  std::vector<FilterState> out(static_cast<std::size_t>(s) + 1);
  out[static_cast<std::size_t>(s)] = run.filtered[static_cast<std::size_t>(s)];
  for (int t = s - 1; t >= 0; --t) {
    const FilterState& f = run.filtered[static_cast<std::size_t>(t)];
    const FilterState& p = run.predicted[static_cast<std::size_t>(t) + 1];
    const FilterState& nxt = out[static_cast<std::size_t>(t) + 1];
    const Matrix G = f.cov * model.A.at(t + 1).transpose() * pseudo_inverse(p.cov, opts.pinv_tol);
    FilterState st;
    st.t = t;
    st.s = s;
    st.mean = f.mean + G * (nxt.mean - p.mean);
    st.cov = clamp_psd_trace(f.cov + G * (nxt.cov - p.cov) * G.transpose(), opts.psd_tol, "smoother covariance");
    out[static_cast<std::size_t>(t)] = std::move(st);
  }
  return out;
}

}  // namespace polyfilt
