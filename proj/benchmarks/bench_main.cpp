#include "msde/estimators.hpp"
#include "msde/kernels.hpp"
#include "msde/linalg.hpp"
#include "msde/metrics.hpp"
#include "msde/simulate.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

namespace {

msde::Matrix random_symmetric(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  msde::Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) a(i, j) = a(j, i) = g(rng);
  return a;
}

const msde::Trajectory& sphere_path() {
  static const msde::Trajectory t = [] {
    msde::SimConfig cfg;
    cfg.n_steps = 100000;
    cfg.seed = 1;
    return msde::simulate(cfg);
  }();
  return t;
}

void BM_SymEig(benchmark::State& state) {
  const msde::Matrix a = random_symmetric(static_cast<int>(state.range(0)), 7);
  for (auto _ : state) benchmark::DoNotOptimize(msde::sym_eig(a));
}
BENCHMARK(BM_SymEig)->Arg(3)->Arg(4)->Arg(8);

void BM_SimulateSphere(benchmark::State& state) {
  msde::SimConfig cfg;
  cfg.n_steps = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    ++cfg.seed;
    benchmark::DoNotOptimize(msde::simulate(cfg));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateSphere)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_SimulateKlein(benchmark::State& state) {
  msde::SimConfig cfg;
  cfg.manifold = msde::ManifoldSpec::klein_bottle(2.0, 1.0);
  cfg.n_steps = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    ++cfg.seed;
    benchmark::DoNotOptimize(msde::simulate(cfg));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateKlein)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_EstimatorIndexBuild(benchmark::State& state) {
  msde::EstimatorConfig c;
  c.h = 0.066;
  for (auto _ : state) benchmark::DoNotOptimize(msde::KernelEstimator(sphere_path(), c));
}
BENCHMARK(BM_EstimatorIndexBuild)->Unit(benchmark::kMillisecond);

void BM_EstimateAtPoint(benchmark::State& state) {
  msde::EstimatorConfig c;
  c.h = static_cast<double>(state.range(0)) / 1000.0;
  const msde::KernelEstimator est(sphere_path(), c);
  msde::Rng rng = msde::make_rng(3);
  std::vector<msde::Vector> xs;
  for (int i = 0; i < 64; ++i) xs.push_back(msde::uniform_sphere_point(rng));
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(est.estimate(xs[i++ % xs.size()]));
}
BENCHMARK(BM_EstimateAtPoint)->Arg(33)->Arg(66)->Arg(132)->Unit(benchmark::kMicrosecond);

void BM_BatchEstimate(benchmark::State& state) {
  msde::EstimatorConfig c;
  c.h = 0.066;
  msde::Rng rng = msde::make_rng(4);
  std::vector<msde::Vector> xs;
  for (int i = 0; i < 200; ++i) xs.push_back(msde::uniform_sphere_point(rng));
  const auto threads = static_cast<unsigned>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(msde::batch_estimate(sphere_path(), xs, c, threads));
}
BENCHMARK(BM_BatchEstimate)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_KernelMoment(benchmark::State& state) {
  const msde::BumpKernel k;
  for (auto _ : state) benchmark::DoNotOptimize(msde::kernel_moment(k, 2, 0, 2));
}
BENCHMARK(BM_KernelMoment);

void BM_WilcoxonExact(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  const auto m = static_cast<std::size_t>(state.range(0));
  std::vector<double> a(m), b(m);
  for (std::size_t i = 0; i < m; ++i) {
    a[i] = g(rng);
    b[i] = a[i] + g(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(msde::wilcoxon_one_sided(a, b, msde::WilcoxonMethod::Exact));
}
BENCHMARK(BM_WilcoxonExact)->Arg(10)->Arg(25)->Arg(60);

}  // namespace
BENCHMARK_MAIN();
