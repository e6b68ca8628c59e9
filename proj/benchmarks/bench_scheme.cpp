#include <benchmark/benchmark.h>

#include "crypt_sim/experiments.hpp"
#include "crypt_sim/scheme.hpp"
#include "crypt_sim/solver.hpp"

using namespace crypt_sim;

static void BM_SolveTridiagonal(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  TridiagonalSystem sys(n);
  for (std::size_t j = 0; j < n; ++j) {
    sys.diag[j] = 3.0;
    sys.rhs[j] = 1.0 + 0.001 * static_cast<double>(j);
  }
  for (std::size_t j = 0; j + 1 < n; ++j) sys.lower[j] = sys.upper[j] = -1.0;
  for (auto _ : st) benchmark::DoNotOptimize(solve_tridiagonal(sys));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_SolveTridiagonal)->Arg(200)->Arg(1000);

static void BM_Advance(benchmark::State& st) {
  const Grid g(static_cast<std::size_t>(st.range(0)));
  const InitialData data = builtin_scenario("crypt-default").sample(g);
  const SchemeConfig cfg(g, Parameters{}, 0.01, 1e-3, 1e-3, {}, data.rho0_sup());
  const State s0 = regularize_initial(data, 0.01);
  for (auto _ : st) benchmark::DoNotOptimize(advance(s0, cfg));
}
BENCHMARK(BM_Advance)->Arg(200)->Arg(1000);

static void BM_RunToUnitTime(benchmark::State& st) {
  const Grid g(200);
  const InitialData data = builtin_scenario("crypt-default").sample(g);
  const SchemeConfig cfg(g, Parameters{}, 0.01, 1e-3, 1.0);
  for (auto _ : st) benchmark::DoNotOptimize(run(data, cfg));
}
BENCHMARK(BM_RunToUnitTime)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
