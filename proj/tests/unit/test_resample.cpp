#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "sfisep/errors.hpp"
#include "sfisep/resample.hpp"
#include "sfisep/rng.hpp"

using namespace sfisep;

TEST_CASE("rate ratios are reduced before the filter is designed") {
  const ResampleDesign d = design_resampler(44100, 48000);
  CHECK(d.up == 160);
  CHECK(d.down == 147);

  const ResampleDesign e = design_resampler(48000, 8000);
  CHECK(e.up == 1);
  CHECK(e.down == 6);

  CHECK(d.taps.size() % 2 == 1);  // linear phase needs a symmetric odd-length filter
  CHECK(d.delay * 2 + 1 == static_cast<int>(d.taps.size()));
  for (std::size_t i = 0; i < e.taps.size(); ++i)
    CHECK(e.taps[i] == doctest::Approx(e.taps[e.taps.size() - 1 - i]).epsilon(1e-12));
}

TEST_CASE("each polyphase branch passes DC exactly") {
  for (auto [fi, fo] : {std::pair{48000, 8000}, {8000, 48000}, {44100, 48000}}) {
    const ResampleDesign d = design_resampler(fi, fo);
    for (int r = 0; r < d.up; ++r) {
      double s = 0;
      for (std::size_t i = r; i < d.taps.size(); i += d.up) s += d.taps[i];
      CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("identical rates copy the input verbatim") {
  std::vector<double> x = {0.5, -1.25, 3.0, 0.0, 7.5};
  const std::vector<double> y = resample_signal(x, 16000, 16000);
  CHECK(y == x);
  const ResampleDesign d = design_resampler(22050, 22050);
  CHECK(d.up == 1);
  CHECK(d.down == 1);
}

TEST_CASE("output length is the ceiling of the exact ratio") {
  CHECK(resample_signal(std::vector<double>(48000, 0.0), 48000, 8000).size() == 8000);
  CHECK(resample_signal(std::vector<double>(100, 0.0), 48000, 44100).size() == 92);
  CHECK(resample_signal(std::vector<double>(101, 0.0), 48000, 44100).size() == 93);
  CHECK(resample_signal(std::vector<double>(1, 0.0), 8000, 48000).size() == 6);
}

TEST_CASE("a constant settles back to the same constant away from the edges") {
  const std::vector<double> x(4800, 0.75);
  for (int fo : {8000, 16000, 32000, 44100}) {
    const std::vector<double> y = resample_signal(x, 48000, fo);
    const ResampleDesign d = design_resampler(48000, fo);
    // the transient spans delay/down output samples at each end
    const std::size_t guard = static_cast<std::size_t>(d.delay / d.down) + 3;
    REQUIRE(y.size() > 3 * guard);
    for (std::size_t i = guard; i + guard < y.size(); ++i)
      CHECK(y[i] == doctest::Approx(0.75).epsilon(1e-6));
  }
}

TEST_CASE("a 1 kHz tone survives a 48k to 8k round trip") {
  const int len = 48000;
  std::vector<double> x(len);
  for (int i = 0; i < len; ++i)
    x[i] = 0.8 * std::sin(2 * std::numbers::pi * 1000.0 * i / 48000.0);

  const std::vector<double> down = resample_signal(x, 48000, 8000);
  const std::vector<double> up = resample_signal(down, 8000, 48000);
  REQUIRE(up.size() == x.size());

  const int guard = 4800;  // 100 ms keeps both transients out of the measurement
  double peak = 0, err = 0, sig = 0;
  for (int i = guard; i < len - guard; ++i) {
    peak = std::max(peak, std::abs(up[i]));
    err += (up[i] - x[i]) * (up[i] - x[i]);
    sig += x[i] * x[i];
  }
  CHECK(std::abs(peak - 0.8) / 0.8 < 0.005);
  CHECK(10 * std::log10(err / sig) < -40.0);
}

TEST_CASE("resampling is linear") {
  Rng rng(71);
  std::vector<double> a(2000), b(2000);
  for (auto* v : {&a, &b})
    for (double& x : *v) x = rng.uniform(-1.0, 1.0);
  std::vector<double> mix(2000);
  for (int i = 0; i < 2000; ++i) mix[i] = 2.0 * a[i] - 0.5 * b[i];

  const std::vector<double> ya = resample_signal(a, 48000, 32000);
  const std::vector<double> yb = resample_signal(b, 48000, 32000);
  const std::vector<double> ym = resample_signal(mix, 48000, 32000);
  for (std::size_t i = 0; i < ym.size(); ++i)
    CHECK(ym[i] == doctest::Approx(2.0 * ya[i] - 0.5 * yb[i]).epsilon(1e-10));
}

TEST_CASE("buffers resample per channel and carry the new rate") {
  AudioBuffer x;
  x.fs_hz = 48000;
  x.channels.assign(2, std::vector<double>(4800));
  Rng rng(72);
  for (auto& ch : x.channels)
    for (double& v : ch) v = rng.uniform(-1.0, 1.0);

  const AudioBuffer y = resample(x, 16000);
  CHECK(y.fs_hz == 16000);
  CHECK(y.channels.size() == 2);
  CHECK(y.channels[0].size() == 1600);
  CHECK(y.channels[0] == resample_signal(x.channels[0], 48000, 16000));
  CHECK(y.channels[1] == resample_signal(x.channels[1], 48000, 16000));

  CHECK_THROWS_AS(design_resampler(0, 8000), Error);
  CHECK_THROWS_AS(design_resampler(8000, -1), Error);
}
