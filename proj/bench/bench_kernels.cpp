// Serial against OpenMP versions of the kernels and of one fractional solve.

#include <benchmark/benchmark.h>

#include <random>

#include "bura/kernels.hpp"
#include "bura/remez.hpp"
#include "bura/solvers.hpp"

using namespace bura;

namespace {

std::vector<double> random_vector(std::size_t n) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(gen);
  return v;
}

Exec exec_of(const benchmark::State& state) { return state.range(1) ? Exec::parallel : Exec::serial; }

void set_label(benchmark::State& state) { state.SetLabel(state.range(1) ? "parallel" : "serial"); }

void BM_spmv_2d(benchmark::State& state) {
  const auto A = assemble(OperatorKind::laplace2d5pt, 1.0 / static_cast<double>(state.range(0)));
  const auto x = random_vector(A.n);
  std::vector<double> y(A.n);
  for (auto _ : state) {
    kernels::spmv(A, -0.1, x, y, exec_of(state));
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(A.n));
  set_label(state);
}

void BM_dot(benchmark::State& state) {
  const auto x = random_vector(static_cast<std::size_t>(state.range(0)));
  const auto y = random_vector(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::dot(x, y, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * state.range(0));
  set_label(state);
}

// A 2D fractional solve with the (5,5;1) alpha = 0.5 form; the approximant is
// computed once outside the timed loop.
void BM_bura_apply_2d(benchmark::State& state) {
  static const PartialFractionForm pf = to_partial_fractions(compute_bura(0.5, 1, 5, 5));
  const auto A = assemble(OperatorKind::laplace2d5pt, 1.0 / static_cast<double>(state.range(0)));
  const auto f = random_vector(A.n);
  SolveConfig cfg;
  cfg.method = SolveMethod::pcg_ic0;
  cfg.exec = exec_of(state);
  cfg.concurrent_systems = state.range(1) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(bura_apply(pf, A, f, cfg).u_r.data());
  set_label(state);
}

}  // namespace

BENCHMARK(BM_spmv_2d)->ArgsProduct({{64, 256, 1024}, {0, 1}});
BENCHMARK(BM_dot)->ArgsProduct({{1 << 12, 1 << 16, 1 << 20}, {0, 1}});
BENCHMARK(BM_bura_apply_2d)->ArgsProduct({{64, 128}, {0, 1}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
