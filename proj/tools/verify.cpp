#include "cli.hpp"

#include <polyfilt/heston.hpp>
#include <polyfilt/kalman.hpp>
#include <polyfilt/kalmanbucy.hpp>
#include <polyfilt/oracle.hpp>

#include <cmath>
#include <stdexcept>

namespace polyfilt::cli {

namespace {

double max_diff(const FilterState& s, const LinearEstimator& e, const Vector& z) {
  return std::max((s.mean - e.apply(z)).cwiseAbs().maxCoeff(), (s.cov - e.error_cov).cwiseAbs().maxCoeff());
}

std::vector<Vector> observation_path(const ObservationPartition& part, int T, const HestonParams& p,
                                     const NoiseParams& q, bool noisy) {
  SimulationConfig cfg;
  cfg.n_steps = T;
  cfg.seed = 7;
  const HestonPath path = simulate_heston(p, q, cfg);
  std::vector<Vector> states;
  for (int t = 0; t <= T; ++t) {
    const auto i = static_cast<std::size_t>(t);
    Vector x(part.dim());
    if (noisy)
      x << path.v[i], path.Y[i], path.Y[i] * path.Y[i], path.Ytilde[i], path.Ytilde[i] * path.Ytilde[i],
          path.dYtilde2[i], path.Y[i] * path.Ytilde[i];
    else
      x << path.v[i], path.dY[i], path.dY2[i];
    states.push_back(x);
  }
  return states;
}

// Filter, predictor (t = s + 2) and smoother (s = t + 3) against the
// normal-equations oracle.
SuiteResult oracle_case(const std::string& name, const PolySSM& poly, const ObservationPartition& part,
                        const std::vector<Vector>& states, int T) {
  const LinearGaussianSSM model = gaussian_equivalent(poly, T + 2);
  const MomentTable table = MomentTable::from_model(poly, T + 2);
  std::vector<Vector> obs;
  for (int t = 0; t <= T; ++t) obs.push_back(take(states[static_cast<std::size_t>(t)], part.observed()));
  const FilterRun run = filter(model, part, obs);
  double worst = 0.0;
  for (int t = 0; t <= T; ++t) {
    const Vector z = stack_observations(part, states, t);
    worst = std::max(worst, max_diff(run.filtered[static_cast<std::size_t>(t)], linear_mmse(table, part, t, t), z));
  }
  for (int s = 0; s <= T; ++s) {
    const Vector z = stack_observations(part, states, s);
    const FilterState pr = predict(model, run.filtered[static_cast<std::size_t>(s)], s + 2);
    worst = std::max(worst, max_diff(pr, linear_mmse(table, part, s + 2, s), z));
  }
  for (int t = 0; t + 3 <= T; ++t) {
    const int s = t + 3;
    const auto sm = smooth(model, run, s);
    const Vector z = stack_observations(part, states, s);
    worst = std::max(worst, max_diff(sm[static_cast<std::size_t>(t)], linear_mmse(table, part, t, s), z));
  }
  return {name, worst <= 1e-7, worst, 1e-7};
}

std::vector<SuiteResult> kalman_oracle() {
  std::vector<SuiteResult> out;
  const HestonParams p = HestonParams::stationary(1.0, 0.16, 0.3, -0.5);
  const int T = 5;
  {
    const PolySSM poly = heston_returns_model(p, 2, 1.0);
    const ObservationPartition both({1, 2}, 3);
    const auto states = observation_path(both, T, p, {}, false);
    out.push_back(oracle_case("kalman-oracle/heston(dY,dY2)", poly, both, states, T));
    out.push_back(oracle_case("kalman-oracle/heston(dY)", poly, ObservationPartition({1}, 3), states, T));
  }
  {
    const NoiseParams q{0.01};
    const PolySSM poly = microstructure_model(p, q, 2, 1.0);
    const ObservationPartition part({kYt, kYt2, kDYt2}, kMicroDim);
    const auto states = observation_path(part, T, p, q, true);
    out.push_back(oracle_case("kalman-oracle/heston-noise", poly, part, states, T));
  }
  return out;
}

std::vector<SuiteResult> pipeline() {
  double worst = 0.0;
  for (double k : {0.5, 1.0, 2.0})
    for (double s : {0.1, 0.3})
      for (double r : {-0.5, 0.0, 0.5})
        for (double f : {1.0, 2.0}) {
          HestonParams p = HestonParams::stationary(k, 0.16, s, r);
          p.mu_v = f * p.m;
          const int T = 6;
          const auto closed = heston_gaussian_equivalent(p, T);
          const auto generic = gaussian_equivalent(heston_returns_model(p, 2, 1.0), T);
          for (int t = 1; t <= T; ++t) {
            worst = std::max(worst, (closed.C.at(t) - generic.C.at(t)).cwiseAbs().maxCoeff());
            worst = std::max(worst, (closed.A.at(t) - generic.A.at(t)).cwiseAbs().maxCoeff());
            worst = std::max(worst, (closed.a.at(t) - generic.a.at(t)).cwiseAbs().maxCoeff());
          }
        }
  return {{"pipeline/closed-form-vs-generic", worst <= 1e-8, worst, 1e-8}};
}

// Unobserved OU driving an observed integral: the error variance tends to
// the root of s^2 + 2 kappa s - sigma^2.
std::vector<SuiteResult> riccati() {
  double worst = 0.0;
  const double sigma = 0.7;
  for (double kappa : {0.5, 1.0, 2.0}) {
    GaussianOU ou;
    Matrix A(2, 2);
    A << -kappa, 0.0, 1.0, 0.0;
    Matrix C = Matrix::Zero(2, 2);
    C(0, 0) = sigma * sigma;
    C(1, 1) = 1.0;
    ou.a = TimeFunction<Vector>::constant(Vector::Zero(2));
    ou.A = TimeFunction<Matrix>::constant(A);
    ou.C = TimeFunction<Matrix>::constant(C);
    ou.mu0 = Vector::Zero(2);
    ou.Sigma0 = Matrix::Zero(2, 2);
    ou.Sigma0(0, 0) = 1.0;
    const ObservationPartition part({1}, 2);
    const std::vector<double> grid{0.0, 50.0 / kappa};
    const auto sol = riccati_solve(ou, part, initial_error_covariance(ou.Sigma0, part), grid);
    const double expect = -kappa + std::sqrt(kappa * kappa + sigma * sigma);
    worst = std::max(worst, std::abs(sol.Sigma.back()(0, 0) - expect));
  }
  return {{"riccati/stationary-root", worst <= 1e-6, worst, 1e-6}};
}

}  // namespace

std::vector<SuiteResult> run_suite(const std::string& suite) {
  if (suite == "kalman-oracle") return kalman_oracle();
  if (suite == "pipeline") return pipeline();
  if (suite == "riccati") return riccati();
  if (suite == "all") {
    auto out = kalman_oracle();
    for (auto& r : pipeline()) out.push_back(r);
    for (auto& r : riccati()) out.push_back(r);
    return out;
  }
  throw std::invalid_argument("unknown suite \"" + suite + "\" (kalman-oracle, pipeline, riccati, all)");
}

}  // namespace polyfilt::cli
