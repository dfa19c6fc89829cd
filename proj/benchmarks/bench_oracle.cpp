// Per-instance solver cost across the three solver families.
#include <benchmark/benchmark.h>

#include "pad/oracle.hpp"

using namespace pad;

namespace {

void bm_solve(benchmark::State& state, ProblemId id, int M) {
  const ProblemSpec spec = make_spec(id, M);
  const ProblemInstance inst = sample_instance(spec, 13);
  for (auto _ : state) benchmark::DoNotOptimize(solve(spec, inst));
}

void bm_sample_instance(benchmark::State& state, ProblemId id, int M) {
  const ProblemSpec spec = make_spec(id, M);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sample_instance(spec, ++seed));
}

}  // namespace

BENCHMARK_CAPTURE(bm_solve, p1_pga_m5, ProblemId::P1, 5);
BENCHMARK_CAPTURE(bm_solve, p6_pga_m5, ProblemId::P6, 5);
BENCHMARK_CAPTURE(bm_solve, p2_enum_m5, ProblemId::P2, 5);
BENCHMARK_CAPTURE(bm_solve, p8_knapsack_m6, ProblemId::P8, 6);
BENCHMARK_CAPTURE(bm_solve, p9_offload_m6, ProblemId::P9, 6);
BENCHMARK_CAPTURE(bm_solve, p10_bisection_m5, ProblemId::P10, 5);
BENCHMARK_CAPTURE(bm_sample_instance, p1_m5, ProblemId::P1, 5);

BENCHMARK_MAIN();
