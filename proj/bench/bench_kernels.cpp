#include <benchmark/benchmark.h>

#include "sparselab/kernels.hpp"
#include "sparselab/random.hpp"
#include "sparselab/sparse.hpp"
#include "sparselab/weights.hpp"

using namespace sparselab;

namespace {

Exec exec_of(const benchmark::State& s) { return s.range(1) ? Exec::Parallel : Exec::Serial; }

void BM_ApConstant(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  Rng rng = trial_rng(1, 0);
  const GridFunction w = random_weight(1, L, rng);
  for (auto _ : state) benchmark::DoNotOptimize(ap_constant(w, 2.0, L, exec_of(state)).value);
}

void BM_SparseOperator(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  Rng rng = trial_rng(2, 0);
  const auto a = random_carleson(DyadicCube::root(1), L, rng);
  std::vector<GridFunction> f{random_function(1, L, rng), random_function(1, L, rng)};
  for (auto _ : state) benchmark::DoNotOptimize(eval_sparse_A(a, 2, 1.0, f, exec_of(state)).integral());
}

void BM_DyadicMaximal(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  Rng rng = trial_rng(3, 0);
  const GridFunction f = random_function(1, L, rng);
  for (auto _ : state)
    benchmark::DoNotOptimize(dyadic_maximal(f, nullptr, MaximalMode::PlainP0, 1.0, exec_of(state)).integral());
}

void BM_BilinearMultiplier(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  Rng rng = trial_rng(4, 0);
  const GridFunction f = random_function(1, L, rng), g = random_function(1, L, rng);
  const Symbol m = Symbol::named("bilinear-riesz");
  for (auto _ : state) benchmark::DoNotOptimize(apply_bilinear_multiplier(m, f, g, exec_of(state)).integral());
}

}  // namespace

// Second argument: 0 = serial reference, 1 = OpenMP.
BENCHMARK(BM_ApConstant)->ArgsProduct({{10, 12}, {0, 1}});
BENCHMARK(BM_SparseOperator)->ArgsProduct({{10, 12}, {0, 1}});
BENCHMARK(BM_DyadicMaximal)->ArgsProduct({{10, 12}, {0, 1}});
BENCHMARK(BM_BilinearMultiplier)->ArgsProduct({{6, 8}, {0, 1}});

BENCHMARK_MAIN();
