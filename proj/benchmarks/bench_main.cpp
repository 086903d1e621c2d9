#include <benchmark/benchmark.h>

#include <algorithm>
#include <cstdint>
#include <vector>

#include "sfisep/core_network.hpp"
#include "sfisep/features.hpp"
#include "sfisep/filterbank.hpp"
#include "sfisep/pipeline.hpp"
#include "sfisep/resample.hpp"
#include "sfisep/rng.hpp"
#include "sfisep/synth.hpp"

namespace {

using namespace sfisep;

AudioBuffer noise(int fs, double seconds, std::uint64_t seed) {
  AudioBuffer x(fs, 1, static_cast<std::int64_t>(seconds * fs));
  Rng rng(seed);
  for (double& v : x.channels[0]) v = rng.uniform(-0.5, 0.5);
  return x;
}

CoreConfig bench_core_config() {
  CoreConfig config;
  config.num_hidden_blocks = 6;
  config.hidden_filters = 16;
  config.in_channels = 2;
  config.mask_channels = 2;
  return config;
}

// one second of mono input through the analysis bank
void BM_Analyze(benchmark::State& state) {
  const int fs = static_cast<int>(state.range(0));
  const FrameGeometry geom = frame_geometry(Rational(2048, 48000), fs);
  const FilterBank<double> bank(geom);
  const AudioBuffer x = noise(fs, 1.0, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(analyze(x, bank));
  }
}
BENCHMARK(BM_Analyze)->Arg(8000)->Arg(48000)->Unit(benchmark::kMillisecond);

void BM_Synthesize(benchmark::State& state) {
  const int fs = static_cast<int>(state.range(0));
  const FrameGeometry geom = frame_geometry(Rational(2048, 48000), fs);
  const FilterBank<double> bank(geom);
  const AudioBuffer x = noise(fs, 1.0, 2);
  const Spectrogram<double> spec = analyze(x, bank);
  for (auto _ : state) {
    benchmark::DoNotOptimize(synthesize(spec, bank));
  }
}
BENCHMARK(BM_Synthesize)->Arg(8000)->Arg(48000)->Unit(benchmark::kMillisecond);

// mask network forward over one second of frames; the frame count is rate
// independent, the bin count is not
void BM_CoreForward(benchmark::State& state) {
  const int fs = static_cast<int>(state.range(0));
  const FrameGeometry geom = frame_geometry(Rational(2048, 48000), fs);
  const CoreConfig config = bench_core_config();
  const CoreParams<float> params = init_core_params<float>(config, 3);
  const int frames = static_cast<int>(fs / geom.hop_len) + 1;
  Tensor3<float> features(config.in_channels, frames, geom.num_bins);
  Rng rng(4);
  for (auto& v : features.v) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  CoreGraph<float> graph;
  for (auto _ : state) {
    benchmark::DoNotOptimize(graph.forward(features, params));
  }
}
BENCHMARK(BM_CoreForward)->Arg(8000)->Arg(48000)->Unit(benchmark::kMillisecond);

// full training step (forward, loss, backward) on one second of audio
void BM_TrainStep(benchmark::State& state) {
  const int fs = static_cast<int>(state.range(0));
  const FrameGeometry geom = frame_geometry(Rational(2048, 48000), fs);
  const CoreConfig config = bench_core_config();
  const CoreParams<float> params = init_core_params<float>(config, 5);
  const WhiteningStats whitening = WhiteningStats::identity(fs, geom.num_bins);

  SynthSpec spec;
  spec.seed = 9;
  spec.duration_s = 1.0;
  spec.fs_hz = fs;
  const Example ex = synth_example(spec).example;
  Signal<float> mixture(1), reference(1);
  mixture[0].assign(ex.mixture.channels[0].begin(), ex.mixture.channels[0].end());
  reference[0].assign(ex.foreground.channels[0].begin(), ex.foreground.channels[0].end());

  SeparationGraph<float> graph(geom, config);
  std::vector<float> grad(params.flat.size());
  for (auto _ : state) {
    std::fill(grad.begin(), grad.end(), 0.0f);
    benchmark::DoNotOptimize(
        graph.loss_and_grad(mixture, reference, params, whitening, 1.0, grad));
  }
}
BENCHMARK(BM_TrainStep)->Arg(8000)->Arg(48000)->Unit(benchmark::kMillisecond);

void BM_Resample(benchmark::State& state) {
  const int fs_in = static_cast<int>(state.range(0));
  const int fs_out = static_cast<int>(state.range(1));
  const AudioBuffer x = noise(fs_in, 1.0, 6);
  for (auto _ : state) {
    benchmark::DoNotOptimize(resample(x, fs_out));
  }
}
BENCHMARK(BM_Resample)
    ->Args({48000, 8000})
    ->Args({8000, 48000})
    ->Args({48000, 44100})
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
