// Solver throughput. Build in Release; the wait-value sum dominates, so
// time scales with T * (theta/gamma) * (2h/gamma).

#include <benchmark/benchmark.h>

#include "lmsrstop/solver.hpp"

namespace {

void BM_Solve(benchmark::State& state) {
  const int horizon = static_cast<int>(state.range(0));
  const double gamma = 1.0 / static_cast<double>(state.range(1));
  const auto cfg = lmsrstop::SolverConfig::with_gamma(horizon, gamma);
  for (auto _ : state) {
    auto table = lmsrstop::solve(cfg);
    benchmark::DoNotOptimize(table.capital_psi.back());
  }
}
BENCHMARK(BM_Solve)->Args({50, 50})->Args({100, 50})->Args({100, 100})->Unit(benchmark::kMillisecond);

void BM_PsiWait(benchmark::State& state) {
  const auto cfg = lmsrstop::SolverConfig::with_gamma(100, 0.01);
  const lmsrstop::PsiRow first{1, cfg.gamma, {0.0}};
  double c = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(lmsrstop::psi_wait(2, c, first, 0.0, cfg));
    c += 1e-3;
  }
}
BENCHMARK(BM_PsiWait);

}  // namespace
