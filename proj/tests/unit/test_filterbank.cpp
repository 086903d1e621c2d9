#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "sfisep/errors.hpp"
#include "sfisep/filterbank.hpp"
#include "sfisep/rng.hpp"

using namespace sfisep;

namespace {

Signal<double> random_signal(int channels, std::int64_t len, std::uint64_t seed) {
  Rng rng(seed);
  Signal<double> x(channels);
  for (auto& ch : x) {
    ch.resize(len);
    for (double& v : ch) v = rng.uniform(-1.0, 1.0);
  }
  return x;
}

double max_abs(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_CASE("frame lengths match the published geometry") {
  const Rational duration(2048, 48000);
  CHECK(frame_geometry(duration, 48000).frame_len == 2048);
  CHECK(frame_geometry(duration, 8000).frame_len == 342);
  CHECK(frame_geometry(duration, 16000).frame_len == 682);
  CHECK(frame_geometry(duration, 32000).frame_len == 1366);
  CHECK(frame_geometry(duration, 44100).frame_len == 1882);

  const FrameGeometry g48 = frame_geometry(duration, 48000);
  CHECK(g48.hop_len == 1024);
  CHECK(g48.num_bins == 1025);
  CHECK(g48.bin_spacing_hz == doctest::Approx(48000.0 / 2048.0));
  const FrameGeometry g8 = frame_geometry(duration, 8000);
  CHECK(g8.num_bins == 172);
  // the physical bin spacing is what stays constant across rates
  CHECK(g8.bin_spacing_hz == doctest::Approx(8000.0 / 342.0).epsilon(1e-12));
}

TEST_CASE("rounding goes to the nearest even length, ties upward") {
  // 3.5 samples -> 4 (tie between evens resolved upward via odd integers)
  CHECK(frame_geometry(Rational(7, 96000), 48000).frame_len == 4);
  // 3.0 samples: equidistant evens 2 and 4 -> upward to 4
  CHECK(frame_geometry(Rational(3, 48000), 48000).frame_len == 4);
  // 4.6 samples -> 4
  CHECK(frame_geometry(Rational(46, 480000), 48000).frame_len == 4);
  // 2.5 samples -> 2, below the minimum
  CHECK_THROWS_AS(frame_geometry(Rational(5, 96000), 48000), Error);
  CHECK_THROWS_WITH_AS(frame_geometry(1e-5, 8000),
                       doctest::Contains("geometry-too-small"), Error);
  CHECK_THROWS_AS(frame_geometry(Rational(2048, 48000), 0), Error);
}

TEST_CASE("double durations delegate to the exact rational path") {
  const FrameGeometry a = frame_geometry(2048.0 / 48000.0, 48000);
  CHECK(a.frame_len == 2048);
  const FrameGeometry b = frame_geometry(2048.0 / 48000.0, 8000);
  CHECK(b.frame_len == 342);
}

TEST_CASE("frame count covers every sample exactly twice") {
  const FrameGeometry g = frame_geometry(Rational(8, 8000), 8000);  // frame 8, hop 4
  CHECK(num_frames(g, 1) == 2);
  CHECK(num_frames(g, 4) == 2);
  CHECK(num_frames(g, 5) == 3);
  CHECK(num_frames(g, 8) == 3);
  CHECK(num_frames(g, 9) == 4);
}

TEST_CASE("window satisfies the constant-overlap-add condition") {
  const FrameGeometry g = frame_geometry(Rational(2048, 48000), 48000);
  FilterBank<double> bank(g);
  // w[n] = analysis_cos row 0 (cos term is 1 at k = 0)
  const double* w = bank.analysis_cos(0);
  for (int n = 0; n < g.hop_len; ++n)
    CHECK(w[n] * w[n] + w[n + g.hop_len] * w[n + g.hop_len] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sine branch is identically zero at DC and Nyquist") {
  const FrameGeometry g = frame_geometry(Rational(342, 8000), 8000);
  FilterBank<double> bank(g);
  for (int n = 0; n < g.frame_len; ++n) {
    CHECK(bank.analysis_sin(0)[n] == 0.0);
    CHECK(bank.analysis_sin(g.num_bins - 1)[n] == 0.0);
    CHECK(bank.synthesis_sin(0)[n] == 0.0);
    CHECK(bank.synthesis_sin(g.num_bins - 1)[n] == 0.0);
  }
}

TEST_CASE("analysis coefficients match a direct windowed DFT") {
  const FrameGeometry g = frame_geometry(Rational(16, 8000), 8000);
  FilterBank<double> bank(g);
  const Signal<double> x = random_signal(1, 40, 99);
  const Spectrogram<double> spec = analyze_signal(x, bank);

  const int n_len = g.frame_len;
  const std::int64_t frames = num_frames(g, 40);
  CHECK(spec.coeffs.frames == frames);
  // padded layout: frame f starts at (f - 1) * hop; samples outside are zero
  for (std::int64_t f = 0; f < frames; ++f) {
    for (int k = 0; k < g.num_bins; ++k) {
      std::complex<double> ref(0, 0);
      for (int n = 0; n < n_len; ++n) {
        const std::int64_t idx = (f - 1) * g.hop_len + n;
        const double sample = (idx >= 0 && idx < 40) ? x[0][idx] : 0.0;
        const double w = std::sin(std::numbers::pi * (n + 0.5) / n_len);
        ref += sample * w * std::polar(1.0, -2.0 * std::numbers::pi * k * n / n_len);
      }
      CHECK(spec.coeffs.at(0, f, k) == doctest::Approx(ref.real()).epsilon(1e-10));
      const double expected_imag = (k == 0 || k == g.num_bins - 1) ? 0.0 : ref.imag();
      CHECK(spec.coeffs.at(1, f, k) == doctest::Approx(expected_imag).epsilon(1e-10));
    }
  }
}

TEST_CASE("perfect reconstruction at every supported rate") {
  const Rational duration(2048, 48000);
  for (int fs : {8000, 16000, 32000, 44100, 48000}) {
    CAPTURE(fs);
    const FrameGeometry g = frame_geometry(duration, fs);
    FilterBank<double> bank(g);
    const Signal<double> x = random_signal(2, fs, 1000 + fs);  // 1 s noise
    const Spectrogram<double> spec = analyze_signal(x, bank);
    const Signal<double> y = synthesize_signal(spec, bank);
    REQUIRE(y.size() == 2);
    REQUIRE(y[0].size() == x[0].size());
    const double scale = std::max(max_abs(x[0]), max_abs(x[1]));
    double worst = 0;
    for (int c = 0; c < 2; ++c)
      for (std::size_t i = g.frame_len; i + g.frame_len < x[c].size(); ++i)
        worst = std::max(worst, std::abs(y[c][i] - x[c][i]));
    CHECK(worst / scale < 1e-9);
    // edges reconstruct as well with this framing
    double worst_edge = 0;
    for (int c = 0; c < 2; ++c)
      for (std::size_t i = 0; i < x[c].size(); ++i)
        worst_edge = std::max(worst_edge, std::abs(y[c][i] - x[c][i]));
    CHECK(worst_edge / scale < 1e-9);
  }
}

TEST_CASE("analysis commutes with hop-length shifts in the interior") {
  const FrameGeometry g = frame_geometry(Rational(342, 8000), 8000);
  FilterBank<double> bank(g);
  const std::int64_t len = 4000;
  Signal<double> x = random_signal(1, len, 5);
  Signal<double> shifted(1);
  shifted[0].assign(len, 0.0);
  for (std::int64_t i = g.hop_len; i < len; ++i) shifted[0][i] = x[0][i - g.hop_len];

  const Spectrogram<double> a = analyze_signal(x, bank);
  const Spectrogram<double> b = analyze_signal(shifted, bank);
  // keep clear of the zero-padded tail the shifted copy pushes one frame out
  for (std::int64_t f = 2; f + 3 < a.coeffs.frames; ++f)
    for (int k = 0; k < g.num_bins; ++k) {
      CHECK(b.coeffs.at(0, f + 1, k) == doctest::Approx(a.coeffs.at(0, f, k)).epsilon(1e-12));
      CHECK(b.coeffs.at(1, f + 1, k) == doctest::Approx(a.coeffs.at(1, f, k)).epsilon(1e-12));
    }
}

TEST_CASE("synthesis adjoint satisfies the inner-product identity") {
  const FrameGeometry g = frame_geometry(Rational(32, 8000), 8000);
  FilterBank<double> bank(g);
  const std::int64_t len = 150;
  Rng rng(17);

  Spectrogram<double> coeffs;
  coeffs.geom = g;
  coeffs.source_len = len;
  coeffs.audio_channels = 1;
  coeffs.coeffs.resize(2, num_frames(g, len), g.num_bins);
  for (double& v : coeffs.coeffs.v) v = rng.uniform(-1.0, 1.0);

  Signal<double> y(1);
  y[0].resize(len);
  for (double& v : y[0]) v = rng.uniform(-1.0, 1.0);

  const Signal<double> synth = synthesize_signal(coeffs, bank);
  double lhs = 0;
  for (std::int64_t i = 0; i < len; ++i) lhs += synth[0][i] * y[0][i];

  const Spectrogram<double> adj = synthesis_adjoint(y, len, bank);
  REQUIRE(adj.coeffs.v.size() == coeffs.coeffs.v.size());
  double rhs = 0;
  for (std::size_t i = 0; i < adj.coeffs.v.size(); ++i) rhs += adj.coeffs.v[i] * coeffs.coeffs.v[i];

  CHECK(rhs == doctest::Approx(lhs).epsilon(1e-11));
}

TEST_CASE("audio buffer round trip preserves rate and shape") {
  AudioBuffer x;
  x.fs_hz = 8000;
  x.channels = {std::vector<double>(2000), std::vector<double>(2000)};
  Rng rng(3);
  for (auto& ch : x.channels)
    for (double& v : ch) v = rng.uniform(-1.0, 1.0);

  FilterBank<double> bank(frame_geometry(Rational(342, 8000), 8000));
  const AudioBuffer y = synthesize(analyze(x, bank), bank);
  CHECK(y.fs_hz == 8000);
  REQUIRE(y.channel_count() == 2);
  REQUIRE(y.sample_count() == 2000);
  for (int c = 0; c < 2; ++c)
    for (int i = 0; i < 2000; ++i)
      CHECK(y.channels[c][i] == doctest::Approx(x.channels[c][i]).epsilon(1e-9));
}

TEST_CASE("mismatched shapes are rejected") {
  const FrameGeometry g = frame_geometry(Rational(342, 8000), 8000);
  FilterBank<double> bank(g);
  Signal<double> ragged(2);
  ragged[0].resize(100);
  ragged[1].resize(99);
  CHECK_THROWS_AS(analyze_signal(ragged, bank), Error);

  Spectrogram<double> wrong;
  wrong.geom = frame_geometry(Rational(342, 8000), 16000);
  wrong.source_len = 100;
  wrong.audio_channels = 1;
  wrong.coeffs.resize(2, num_frames(wrong.geom, 100), wrong.geom.num_bins);
  CHECK_THROWS_AS(synthesize_signal(wrong, bank), Error);
}
