// Pooling throughput on full-scale token matrices (768-wide embeddings).
#include <benchmark/benchmark.h>

#include "pad/pool.hpp"

using namespace pad;

namespace {

TokenMatrix random_tokens(int S, int d) {
  Rng rng(11);
  TokenMatrix T(S, d);
  for (Eigen::Index i = 0; i < T.size(); ++i)
    T.data()[i] = static_cast<float>(rng.uniform(-1.0, 1.0));
  return T;
}

void bm_rank_pool(benchmark::State& state) {
  const TokenMatrix T = random_tokens(static_cast<int>(state.range(0)), 768);
  for (auto _ : state) benchmark::DoNotOptimize(rank_pool(T, 20));
}

void bm_max_pool(benchmark::State& state) {
  const TokenMatrix T = random_tokens(static_cast<int>(state.range(0)), 768);
  for (auto _ : state) benchmark::DoNotOptimize(max_pool(T, 20));
}

void bm_similarity_matrix(benchmark::State& state) {
  const TokenMatrix T = random_tokens(static_cast<int>(state.range(0)), 768);
  for (auto _ : state) benchmark::DoNotOptimize(similarity_matrix(T));
}

}  // namespace

BENCHMARK(bm_rank_pool)->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(bm_max_pool)->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(bm_similarity_matrix)->Arg(64)->Arg(256);

BENCHMARK_MAIN();
