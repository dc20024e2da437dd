#include <polyfilt/expm.hpp>
#include <polyfilt/heston.hpp>
#include <polyfilt/kalman.hpp>
#include <polyfilt/kalmanbucy.hpp>

#include <benchmark/benchmark.h>

#include <random>

using namespace polyfilt;

namespace {

const HestonParams kDesk = HestonParams::stationary(1.0, 0.16, 0.3, -0.5);

std::vector<Vector> desk_observations(int T) {
  SimulationConfig cfg;
  cfg.n_steps = T;
  cfg.seed = 1;
  const HestonPath p = simulate_heston(kDesk, NoiseParams{}, cfg);
  std::vector<Vector> ys;
  for (int k = 0; k <= T; ++k) ys.push_back(Vector{{p.dY[k], p.dY2[k]}});
  return ys;
}

}  // namespace

static void BM_DiscreteFilter(benchmark::State& state) {
  const int T = static_cast<int>(state.range(0));
  const LinearGaussianSSM model = heston_gaussian_equivalent(kDesk, T);
  const ObservationPartition part({1, 2}, 3);
  const auto ys = desk_observations(T);
  for (auto _ : state) benchmark::DoNotOptimize(filter(model, part, ys));
  state.SetComplexityN(T);
}
BENCHMARK(BM_DiscreteFilter)->RangeMultiplier(4)->Range(64, 4096)->Complexity(benchmark::oN);

static void BM_DiscreteSmoother(benchmark::State& state) {
  const int T = static_cast<int>(state.range(0));
  const LinearGaussianSSM model = heston_gaussian_equivalent(kDesk, T);
  const ObservationPartition part({1, 2}, 3);
  const FilterRun run = filter(model, part, desk_observations(T));
  for (auto _ : state) benchmark::DoNotOptimize(smooth(model, run, T));
}
BENCHMARK(BM_DiscreteSmoother)->Arg(1024);

static void BM_MatrixExponential(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd(0.0, 1.0 / n);
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = nd(rng);
  for (auto _ : state) benchmark::DoNotOptimize(matrix_exponential(m));
}
BENCHMARK(BM_MatrixExponential)->Arg(10)->Arg(36)->Arg(120);

static void BM_ReturnsModel(benchmark::State& state) {
  const int order = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(heston_returns_model(kDesk, order));
}
BENCHMARK(BM_ReturnsModel)->Arg(2)->Arg(4);

static void BM_MicrostructureModel(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(microstructure_model(kDesk, NoiseParams{0.01}));
}
BENCHMARK(BM_MicrostructureModel);

static void BM_KalmanBucyFilter(benchmark::State& state) {
  const double dt = 1.0 / static_cast<double>(state.range(0));
  const std::vector<double> grid = uniform_grid(5.0, dt);
  const GaussianOU ou = gaussian_equivalent_continuous(heston_process(kDesk), grid);
  const ObservationPartition part({1}, 3);
  ObservationPath path;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  double y = 0.0;
  for (double t : grid) {
    path.times.push_back(t);
    path.values.push_back(Vector::Constant(1, y));
    y += 0.4 * std::sqrt(dt) * nd(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(kb_filter(ou, part, path));
}
BENCHMARK(BM_KalmanBucyFilter)->Arg(50)->Arg(250);

static void BM_SimulatePath(benchmark::State& state) {
  SimulationConfig cfg;
  cfg.n_steps = 250;
  std::uint64_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(simulate_heston(kDesk, NoiseParams{}, cfg, i++));
}
BENCHMARK(BM_SimulatePath);
BENCHMARK_MAIN();
