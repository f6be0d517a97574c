#include <benchmark/benchmark.h>

#include "choq/fft.hpp"
#include "choq/functional.hpp"
#include "choq/riesz.hpp"
#include "choq/solver.hpp"

namespace {

choq::ScalarField make_input(int n) {
  auto g = choq::make_grid(3, n, 16.0);
  return choq::gaussian_field(g, {0.0, 0.0, 0.0}, 2.0);
}

void BM_riesz_convolve(benchmark::State& state) {
  auto f = make_input(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto g = choq::riesz_convolve(f, 1.0);
    benchmark::DoNotOptimize(g.values.data());
  }
}
BENCHMARK(BM_riesz_convolve)->Arg(32)->Arg(64);

void BM_energy_evaluation(benchmark::State& state) {
  auto f = make_input(static_cast<int>(state.range(0)));
  choq::ChoquardParams params{3, 1.0, 2.0, 1.0, 1.0};
  for (auto _ : state) {
    auto e = choq::energy(f, params);
    benchmark::DoNotOptimize(e);
  }
}
BENCHMARK(BM_energy_evaluation)->Arg(32)->Arg(64);

void BM_flow_iteration(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  auto g = choq::make_grid(3, n, 16.0);
  choq::ChoquardParams params{3, 1.0, 2.0, 1.0, 1.0};
  auto seed = choq::initial_guess(g, params, {0.0, 0.0, 0.0}, 2.0);
  choq::SolverConfig cfg;
  cfg.record_trace = false;
  for (auto _ : state) {
    cfg.max_iterations = 4;
    auto r = choq::solve_subcritical(seed, params, cfg);
    benchmark::DoNotOptimize(r.breakdown.energy);
  }
}
BENCHMARK(BM_flow_iteration)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
