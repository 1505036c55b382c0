#include <benchmark/benchmark.h>

#include <random>

#include "bgmatte/brm.hpp"
#include "bgmatte/config.hpp"
#include "bgmatte/matting.hpp"
#include "bgmatte/pipeline.hpp"
#include "bgmatte/prm.hpp"
#include "bgmatte/synth.hpp"

using namespace bgmatte;

namespace {

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = unit_uniform(rng);
  return v;
}

VideoSequence walk_in_clip(int size, int frames) {
  PipelineConfig config;
  config.synth.width = size;
  config.synth.height = size;
  config.synth.clip_length = frames;
  config.synth.speed_x = 1.6 / frames;
  return build_clip(make_synth_config(config.synth));
}

void BM_BrmUpdate(benchmark::State& state) {
  const int w = static_cast<int>(state.range(0));
  const std::size_t n = static_cast<std::size_t>(w) * w;
  const RgbField bgi(w, w, noise(n * 3, 1));
  const SemanticMap s(w, w, noise(n, 2));
  BackgroundState bs = init_state(w, w);
  for (auto _ : state) {
    bs = update(bs, bgi, s).state;
    benchmark::DoNotOptimize(bs);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_BrmUpdate)->Arg(128)->Arg(512);

void BM_DetailSolve(benchmark::State& state) {
  const VideoSequence clip = walk_in_clip(512, 8);
  const Frame& frame = clip.frames()[5];
  const AlphaMatte& truth = clip.alpha_truth()[5];
  const AlphaMatte coarse = upsample(truth_semantic(truth).as_matte(), 512, 512);
  const TransitionBand band = make_band(coarse);
  const BackgroundPrior prior{clip.background_truth()[5], Mask(512, 512, 1)};
  for (auto _ : state) benchmark::DoNotOptimize(detail_solve(frame, coarse, band, prior));
}
BENCHMARK(BM_DetailSolve)->Unit(benchmark::kMillisecond);

void BM_FlawAndSelect(benchmark::State& state) {
  const int w = static_cast<int>(state.range(0));
  const AlphaMatte matte(w, w, noise(static_cast<std::size_t>(w) * w, 3));
  const PatchGrid grid = build_grid(w, w);
  for (auto _ : state) {
    const FlawMap flaws = compute_flaw_map(matte, grid);
    benchmark::DoNotOptimize(select_patches(flaws));
  }
}
BENCHMARK(BM_FlawAndSelect)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);

void BM_PipelinePush(benchmark::State& state) {
  const int threads = static_cast<int>(state.range(0));
  const VideoSequence clip = walk_in_clip(512, 16);
  PipelineConfig config;
  for (auto _ : state) {
    state.PauseTiming();
    Pipeline pipeline(config, 512, 512, threads);
    state.ResumeTiming();
    for (const Frame& f : clip.frames()) benchmark::DoNotOptimize(pipeline.push(f));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(clip.size()));
}
BENCHMARK(BM_PipelinePush)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
