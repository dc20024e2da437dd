#pragma once

#include "polyfilt/kalman.hpp"
#include "polyfilt/linalg.hpp"
#include "polyfilt/ode.hpp"
#include "polyfilt/polyproc.hpp"

#include <span>
#include <vector>

namespace polyfilt {

// Observed coordinates sampled on a strictly increasing grid.
struct ObservationPath {
  std::vector<double> times;
  std::vector<Vector> values;
  void validate(int observed_count) const;
};

struct KalmanBucyOptions {
  OdeOptions ode;
  double pinv_tol = 1e-12;
  double psd_tol = 1e-8;
  double condition_limit = 1e12;  // for C_o and Gamma
  bool with_gamma = false;        // needed by kb_smooth
};

struct RiccatiSolution {
  std::vector<double> times;
  std::vector<Matrix> Sigma;  // error covariance
  std::vector<Matrix> Psi;    // gain
  std::vector<Matrix> Gamma;  // empty unless requested
  double max_gamma_condition = 1.0;
};

struct ContinuousFilterOutput {
  std::vector<double> times;
  std::vector<Vector> mean;
  RiccatiSolution riccati;
};

struct ContinuousEstimate {
  double t = 0.0;
  double s = 0.0;
  Vector mean;
  Matrix cov;
};

// Sigma0 - Sigma_{:,o} Sigma_o^+ Sigma_{o,:}
Matrix initial_error_covariance(const Matrix& Sigma0, const ObservationPartition& part, double pinv_tol = 1e-12);
Vector initial_estimate(const Vector& mu0, const Matrix& Sigma0, const ObservationPartition& part, const Vector& x_o0,
                        double pinv_tol = 1e-12);

// Psi = (Sigma A_o^T + C_{:,o}) C_o^{-1}; throws NumericalError when C_o is
// ill-conditioned.
Matrix kalman_bucy_gain(const GaussianOU& model, const ObservationPartition& part, const Matrix& Sigma, double t,
                        double condition_limit = 1e12);

RiccatiSolution riccati_solve(const GaussianOU& model, const ObservationPartition& part, const Matrix& Sigma_hat0,
                              std::span<const double> grid, const KalmanBucyOptions& opts = {});

ContinuousFilterOutput kb_filter(const GaussianOU& model, const ObservationPartition& part, const ObservationPath& path,
                                 const KalmanBucyOptions& opts = {});

// Moments of the prediction error from (x_s, Sigma_s) at times[0] = s.
struct ContinuousPrediction {
  std::vector<double> times;
  std::vector<Vector> mean;
  std::vector<Matrix> cov;
};
ContinuousPrediction kb_predict(const GaussianOU& model, const Vector& x_s, const Matrix& Sigma_s,
                                std::span<const double> times, const KalmanBucyOptions& opts = {});

// x(t, s), Sigma(t, s) for grid indices t_idx < s_idx.
ContinuousEstimate kb_smooth(const GaussianOU& model, const ObservationPartition& part, const ObservationPath& path,
                             const ContinuousFilterOutput& out, std::size_t t_idx, std::size_t s_idx);

// All grid points 0..s_idx at once (backward accumulation, linear cost).
std::vector<ContinuousEstimate> kb_smooth_all(const GaussianOU& model, const ObservationPartition& part,
                                              const ObservationPath& path, const ContinuousFilterOutput& out,
                                              std::size_t s_idx);

}  // namespace polyfilt
