#include <cmath>
#include <vector>

#include "doctest.h"
#include "sfisep/augment.hpp"
#include "sfisep/synth.hpp"

using namespace sfisep;

namespace {

Example make_example(int channels, std::uint64_t seed) {
  SynthSpec spec;
  spec.seed = seed;
  spec.duration_s = 0.5;
  spec.fs_hz = 8000;
  spec.channels = channels;
  return synth_example(spec).example;
}

}  // namespace

TEST_CASE("offset trims at most the configured duration and keeps stems aligned") {
  const Example ex = make_example(1, 10);
  const std::int64_t len = ex.mixture.sample_count();
  AugmentConfig config;  // 10 ms cap = 80 samples at 8 kHz
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const Example out = augment(ex, config, rng);
    const std::int64_t cut = len - out.mixture.sample_count();
    CHECK(cut >= 0);
    CHECK(cut <= 80);
    CHECK(out.foreground.sample_count() == out.mixture.sample_count());
    CHECK(out.background.sample_count() == out.mixture.sample_count());
    // trimmed stems are scaled copies of the original tail; recover the scale
    // by least squares over a window and check the fit is exact
    double num = 0, den = 0;
    for (int i = 100; i < 300; ++i) {
      num += out.foreground.channels[0][i] * ex.foreground.channels[0][i + cut];
      den += ex.foreground.channels[0][i + cut] * ex.foreground.channels[0][i + cut];
    }
    REQUIRE(den > 0);
    const double g = num / den;
    for (int i = 100; i < 300; ++i) {
      CHECK(out.foreground.channels[0][i] ==
            doctest::Approx(g * ex.foreground.channels[0][i + cut]).epsilon(1e-9));
    }
  }
}

TEST_CASE("gain and mix ratio stay inside the configured ranges") {
  const Example ex = make_example(1, 11);
  AugmentConfig config;
  config.max_offset_s = 0.0;  // isolate the gains
  Rng rng(2);
  const double fg_ref = signal_energy(ex.foreground);
  const double bg_ref = signal_energy(ex.background);
  for (int trial = 0; trial < 200; ++trial) {
    const Example out = augment(ex, config, rng);
    const double g_db = 10 * std::log10(signal_energy(out.foreground) / fg_ref);
    const double bg_db = 10 * std::log10(signal_energy(out.background) / bg_ref);
    CHECK(g_db >= config.gain_db_min - 1e-6);
    CHECK(g_db <= config.gain_db_max + 1e-6);
    // background carries gain plus ratio
    CHECK(bg_db - g_db >= config.mix_ratio_db_min - 1e-6);
    CHECK(bg_db - g_db <= config.mix_ratio_db_max + 1e-6);
  }
}

TEST_CASE("mixture is rebuilt from the augmented stems exactly") {
  const Example ex = make_example(2, 12);
  AugmentConfig config;
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Example out = augment(ex, config, rng);
    for (int c = 0; c < out.mixture.channel_count(); ++c)
      for (std::size_t i = 0; i < out.mixture.channels[c].size(); ++i)
        CHECK(out.mixture.channels[c][i] ==
              out.foreground.channels[c][i] + out.background.channels[c][i]);
  }
}

TEST_CASE("stereo downmix fires at the configured probability") {
  const Example ex = make_example(2, 13);
  AugmentConfig config;
  Rng rng(4);
  int downmixed = 0;
  const int trials = 10000;
  for (int trial = 0; trial < trials; ++trial) {
    const Example out = augment(ex, config, rng);
    CHECK(out.mixture.channel_count() == 2);  // layout is preserved either way
    if (out.mixture.channels[0] == out.mixture.channels[1]) ++downmixed;
  }
  const double rate = static_cast<double>(downmixed) / trials;
  CHECK(rate > 1.0 / 3 - 0.02);
  CHECK(rate < 1.0 / 3 + 0.02);
}

TEST_CASE("downmix averages the two channels") {
  const Example ex = make_example(2, 14);
  AugmentConfig config;
  config.max_offset_s = 0.0;
  config.mono_downmix_prob = 1.0;
  config.gain_db_min = config.gain_db_max = 0.0;
  config.mix_ratio_db_min = config.mix_ratio_db_max = 0.0;
  Rng rng(5);
  const Example out = augment(ex, config, rng);
  for (std::size_t i = 0; i < out.foreground.channels[0].size(); ++i) {
    const double want = 0.5 * (ex.foreground.channels[0][i] + ex.foreground.channels[1][i]);
    CHECK(out.foreground.channels[0][i] == doctest::Approx(want).epsilon(1e-12));
    CHECK(out.foreground.channels[1][i] == out.foreground.channels[0][i]);
  }
}

TEST_CASE("draw order is offset, stereo coin, gain, ratio") {
  // reproducible training depends on this order; replay the stream by hand
  const Example mono = make_example(1, 15);
  AugmentConfig config;
  {
    Rng rng(6), replay(6);
    const Example out = augment(mono, config, rng);
    const std::int64_t k = std::llround(replay.uniform(0.0, config.max_offset_s) * 8000);
    // mono input skips the downmix coin entirely
    const double gain = std::pow(10.0, replay.uniform(-6.0, 6.0) / 20.0);
    const double ratio = std::pow(10.0, replay.uniform(-6.0, 6.0) / 20.0);
    CHECK(mono.mixture.sample_count() - out.mixture.sample_count() == k);
    for (int i = 0; i < 50; ++i) {
      // multiplication order mirrors the implementation, so equality is bitwise
      CHECK(out.foreground.channels[0][i] == mono.foreground.channels[0][i + k] * gain);
      CHECK(out.background.channels[0][i] == mono.background.channels[0][i + k] * gain * ratio);
    }
  }
  {
    const Example stereo = make_example(2, 16);
    Rng rng(7), replay(7);
    const Example out = augment(stereo, config, rng);
    const std::int64_t k = std::llround(replay.uniform(0.0, config.max_offset_s) * 8000);
    const bool mixed = replay.bernoulli(config.mono_downmix_prob);
    const double gain = std::pow(10.0, replay.uniform(-6.0, 6.0) / 20.0);
    CHECK((out.foreground.channels[0] == out.foreground.channels[1]) == mixed);
    if (!mixed)
      for (int i = 0; i < 50; ++i)
        CHECK(out.foreground.channels[0][i] == stereo.foreground.channels[0][i + k] * gain);
  }
}
