#include "sfisep/resample.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "sfisep/errors.hpp"

namespace sfisep {

namespace {

constexpr double kKaiserBeta = 12.0;
constexpr int kTapsPerPhase = 64;

double bessel_i0(double x) {
  // power series; converges quickly for the argument range used here
  const double half = x / 2.0;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 64; ++k) {
    term *= (half / k) * (half / k);
    sum += term;
    if (term < sum * 1e-18) break;
  }
  return sum;
}

}  // namespace

ResampleDesign design_resampler(int fs_in, int fs_out) {
  require(fs_in > 0 && fs_out > 0, ErrorCode::invalid_argument,
          "sampling frequencies must be positive");
  ResampleDesign d;
  const int g = std::gcd(fs_in, fs_out);
  d.up = fs_out / g;
  d.down = fs_in / g;
  if (d.up == d.down) return d;  // identity, no filter

  // The prototype runs at fs_in * up. Tap budget per polyphase branch is
  // fixed, so total length scales with max(up, down): downsampling needs the
  // longer filter for anti-aliasing at the same per-branch cost.
  int per_phase = (kTapsPerPhase * std::max(d.up, d.down) + d.up - 1) / d.up;
  if (per_phase % 2 != 0) ++per_phase;
  const int m = per_phase * d.up;  // even; taps = m + 1, symmetric around m/2
  d.delay = m / 2;

  const double proto_rate = static_cast<double>(fs_in) * d.up;
  const double cutoff = 0.45 * std::min(fs_in, fs_out) / proto_rate;  // cycles/sample
  const double inv_i0 = 1.0 / bessel_i0(kKaiserBeta);

  d.taps.resize(m + 1);
  for (int i = 0; i <= m; ++i) {
    const double t = i - d.delay;
    const double x = 2.0 * cutoff * t;
    const double sinc =
        t == 0.0 ? 1.0 : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
    const double u = t / d.delay;
    const double window = bessel_i0(kKaiserBeta * std::sqrt(std::max(0.0, 1.0 - u * u))) * inv_i0;
    d.taps[i] = 2.0 * cutoff * sinc * window;
  }

  // unit DC gain per branch
  for (int r = 0; r < d.up; ++r) {
    double sum = 0.0;
    for (int i = r; i <= m; i += d.up) sum += d.taps[i];
    require(sum > 0.0, ErrorCode::invalid_argument, "degenerate resampler branch");
    for (int i = r; i <= m; i += d.up) d.taps[i] /= sum;
  }
  return d;
}

std::vector<double> resample_signal(const std::vector<double>& x, int fs_in, int fs_out) {
  const ResampleDesign d = design_resampler(fs_in, fs_out);
  if (d.up == d.down) return x;

  const std::int64_t len = static_cast<std::int64_t>(x.size());
  const std::int64_t out_len =
      (len * d.up + d.down - 1) / d.down;  // ceil(len * up / down)
  std::vector<double> y(out_len, 0.0);
  const std::int64_t m = static_cast<std::int64_t>(d.taps.size()) - 1;
  for (std::int64_t j = 0; j < out_len; ++j) {
    // n indexes the prototype-rate grid; delay keeps output aligned to input
    const std::int64_t n = j * d.down + d.delay;
    const std::int64_t r = n % d.up;
    const std::int64_t s = (n - r) / d.up;
    double acc = 0.0;
    // taps at i = r + l*up contribute x[s - l]
    std::int64_t l_lo = std::max<std::int64_t>(0, s - len + 1);
    std::int64_t l_hi = std::min((m - r) / d.up, s);
    for (std::int64_t l = l_lo; l <= l_hi; ++l) acc += d.taps[r + l * d.up] * x[s - l];
    y[j] = acc;
  }
  return y;
}

AudioBuffer resample(const AudioBuffer& x, int target_fs) {
  x.check_rectangular();
  AudioBuffer out;
  out.fs_hz = target_fs;
  out.channels.reserve(x.channels.size());
  for (const auto& ch : x.channels) out.channels.push_back(resample_signal(ch, x.fs_hz, target_fs));
  return out;
}

}  // namespace sfisep
