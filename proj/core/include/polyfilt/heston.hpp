#pragma once

#include "polyfilt/linalg.hpp"
#include "polyfilt/polyproc.hpp"
#include "polyfilt/polyssm.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace polyfilt {

// dv = kappa (m - v) dt + sigma sqrt(v) dW1,
// dY = mu dt + sqrt(v) dW2, d<W1,W2> = rho dt   (delta = 1/2).
// mu_v, sigma_v are mean and variance of v(0).
struct HestonParams {
  double kappa = 1.0;
  double m = 0.16;
  double sigma = 0.3;
  double rho = -0.5;
  double mu = 0.0;
  double mu_v = 0.16;
  double sigma_v = 0.0;

  void validate() const;
  // mu_v = m and sigma_v = sigma^2 m / (2 kappa).
  static HestonParams stationary(double kappa, double m, double sigma, double rho, double mu = 0.0);
};

double stationary_variance(double kappa, double m, double sigma);

struct NoiseParams {
  double tau = 0.0;
  void validate() const;
};

// E v(u), Var v(u) of the CIR factor started from (mu_v, sigma_v).
double cir_mean(const HestonParams& p, double u);
double cir_variance(const HestonParams& p, double u);

// E v(0)^k for the initial law: a point mass when sigma_v = 0, otherwise the
// Gamma law with matching mean and variance.
double initial_variance_moment(const HestonParams& p, int k);

// Closed-form Gaussian equivalent of (v, dY, dY^2) at unit spacing; rejects
// dt != 1 and mu != 0.
LinearGaussianSSM heston_gaussian_equivalent(const HestonParams& p, int horizon, double dt = 1.0);
Matrix heston_closed_form_covariance(const HestonParams& p, int t);

// Generator of (v, Y, Y^2).
GeneratorMatrix heston_generator(const HestonParams& p, int order = 2);
PolyProcess heston_process(const HestonParams& p, int order = 2);

// (v, dY, dY^2) at spacing dt through the generator and the matrix
// exponential.
PolySSM heston_returns_model(const HestonParams& p, int order = 2, double dt = 1.0);

// E eps^k for eps ~ N(0, tau^2).
double noise_moment(int k, double tau);

// State of the noisy-price model.
enum MicroCoord : int { kV = 0, kY = 1, kY2 = 2, kYt = 3, kYt2 = 4, kDYt2 = 5, kYYt = 6 };
inline constexpr int kMicroDim = 7;

// (v, Y, Y^2, Yt, Yt^2, (dYt)^2, Y*Yt) with Yt = Y + eps.
PolySSM microstructure_model(const HestonParams& p, const NoiseParams& q, int order = 2, double dt = 1.0);

struct SimulationConfig {
  double dt = 1.0;
  int n_steps = 1;
  int substeps = 20;
  std::uint64_t seed = 0;
};

struct HestonPath {
  std::vector<double> t, v, Y, dY, dY2, Ytilde, dYtilde2;
};

// Independent stream per (seed, path, stream).
std::mt19937_64 path_rng(std::uint64_t seed, std::uint64_t path_index, std::uint64_t stream = 0);

// Full-truncation Euler with `substeps` sub-intervals per output step.
HestonPath simulate_heston(const HestonParams& p, const NoiseParams& q, const SimulationConfig& cfg,
                           std::uint64_t path_index = 0);

}  // namespace polyfilt
