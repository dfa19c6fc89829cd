// DDIM sampling latency of an untrained full-size backbone: step count and
// candidate parallelism are the knobs that matter at inference time.
#include <benchmark/benchmark.h>

#include "pad/diffusion.hpp"

using namespace pad;

namespace {

DiffusionConfig full_config() {
  DiffusionConfig cfg;
  cfg.T = 50;
  cfg.infer_steps = 5;
  cfg.embed_dim = 768;
  cfg.hidden_dim = 128;
  cfg.enc_layers = 2;
  cfg.dec_layers = 2;
  cfg.heads = 8;
  cfg.dropout = 0.0;
  cfg.seed = 19;
  return cfg;
}

void bm_ddim_sample(benchmark::State& state) {
  Backbone net(full_config());
  net.set_trained();  // sampling cost does not depend on the weights
  Rng rng(7);
  TokenMatrix pooled(20, 768);
  for (Eigen::Index i = 0; i < pooled.size(); ++i)
    pooled.data()[i] = static_cast<float>(rng.uniform(-1.0, 1.0));
  nn::Mat<float> x_lat(13, 128);
  for (Eigen::Index i = 0; i < x_lat.size(); ++i)
    x_lat.data()[i] = static_cast<float>(rng.normal());
  const int steps = static_cast<int>(state.range(0));
  const int p_num = static_cast<int>(state.range(1));
  const int workers = static_cast<int>(state.range(2));
  for (auto _ : state)
    benchmark::DoNotOptimize(net.ddim_sample(pooled, x_lat, 5, steps, 3, p_num, workers));
}

}  // namespace

BENCHMARK(bm_ddim_sample)
    ->Args({5, 2, 1})
    ->Args({5, 8, 1})
    ->Args({5, 8, 4})
    ->Args({50, 2, 1})
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
