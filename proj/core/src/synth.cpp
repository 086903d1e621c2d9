#include "sfisep/synth.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "sfisep/errors.hpp"
#include "sfisep/rng.hpp"

namespace sfisep {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// All energies behind the mix scaling are measured at this rate, where every
// component is rendered, keeping the scaling independent of the output rate.
constexpr int kReferenceFs = 48000;

// Components may only occupy bands that clear the resampler transition region
// [0.39 fs, 0.51 fs] of every supported rate (cutoff 0.45 fs, Kaiser beta 12),
// so band-limited renderings agree across rates after resampling.
struct Band {
  double lo, hi;
};
constexpr Band kAllowedBands[] = {
    {30.0, 3120.0},      // below the 8 kHz transition
    {4080.0, 6240.0},    // between the 8 kHz and 16 kHz transitions
    {8160.0, 12480.0},   // between the 16 kHz and 32 kHz transitions
    {16320.0, 17199.0},  // between the 32 kHz and 44.1 kHz transitions
};

// Foreground partials stay below this, inside the lowest allowed band with
// margin for vibrato and gating sidebands.
constexpr double kForegroundMaxHz = 3000.0;

struct Partial {
  double amp = 0;
  double theta = 0;        // phase offset
  int harmonic = 1;
};

struct BgComponent {
  double freq_hz = 0;
  double amp = 0;
  double phase = 0;
  double gain_l = 1, gain_r = 0;  // equal-power pan; mono uses gain_l only
};

struct Blueprint {
  // foreground
  double f0 = 0;
  double vib_rate = 0, vib_depth = 0, vib_phase = 0;
  double fg_gain_l = 1, fg_gain_r = 0;
  std::vector<Partial> partials;
  std::vector<std::pair<double, double>> active;  // seconds
  double ramp_s = 0;
  // background, AM tones already expanded to carrier + sidebands
  std::vector<BgComponent> bg;
};

double formant_envelope(double f) {
  auto bump = [](double f, double center, double width) {
    const double u = (f - center) / width;
    return std::exp(-u * u);
  };
  const double shape =
      0.15 + bump(f, 550.0, 250.0) + 0.65 * bump(f, 1650.0, 420.0) + 0.3 * bump(f, 2500.0, 500.0);
  const double tilt = 1.0 / std::sqrt(1.0 + (f / 1500.0) * (f / 1500.0));
  return shape * tilt;
}

void draw_pan(Rng& rng, int channels, double& gl, double& gr) {
  if (channels == 1) {
    gl = 1.0;
    gr = 0.0;
    return;
  }
  const double pan = rng.uniform(0.15, 0.85);
  gl = std::cos(pan * std::numbers::pi / 2.0);
  gr = std::sin(pan * std::numbers::pi / 2.0);
}

// log-uniform draw over the union of allowed bands, below max_hz
double draw_band_frequency(Rng& rng, double max_hz) {
  double measure[std::size(kAllowedBands)];
  double total = 0;
  for (std::size_t b = 0; b < std::size(kAllowedBands); ++b) {
    const double hi = std::min(kAllowedBands[b].hi, max_hz);
    measure[b] = hi > kAllowedBands[b].lo ? std::log(hi / kAllowedBands[b].lo) : 0.0;
    total += measure[b];
  }
  double u = rng.uniform() * total;
  for (std::size_t b = 0; b < std::size(kAllowedBands); ++b) {
    if (u <= measure[b] || b + 1 == std::size(kAllowedBands))
      return kAllowedBands[b].lo * std::exp(std::min(u, measure[b]));
    u -= measure[b];
  }
  return kAllowedBands[0].lo;
}

Blueprint draw_blueprint(const SynthSpec& spec, Rng& rng) {
  Blueprint bp;

  bp.f0 = rng.uniform(spec.f0_min_hz, spec.f0_max_hz);
  bp.vib_rate = rng.uniform(4.0, 7.0);
  bp.vib_depth = rng.uniform(0.004, 0.018);
  bp.vib_phase = rng.uniform(0.0, kTwoPi);
  draw_pan(rng, spec.channels, bp.fg_gain_l, bp.fg_gain_r);

  const int h_max = std::min<int>(
      spec.max_harmonics,
      static_cast<int>(kForegroundMaxHz / (bp.f0 * (1.0 + bp.vib_depth))));
  double power = 0;
  for (int h = 1; h <= std::max(1, h_max); ++h) {
    Partial p;
    p.harmonic = h;
    p.theta = rng.uniform(0.0, kTwoPi);
    p.amp = formant_envelope(h * bp.f0) * rng.uniform(0.7, 1.0) / std::sqrt(double(h));
    power += p.amp * p.amp / 2.0;
    bp.partials.push_back(p);
  }
  const double fg_norm = 1.0 / std::sqrt(power);
  for (Partial& p : bp.partials) p.amp *= fg_norm;

  bp.ramp_s = spec.ramp_s;
  double t = 0;
  bool active = true;  // the first segment is always active
  while (t < spec.duration_s) {
    const double len = active ? rng.uniform(spec.active_min_s, spec.active_max_s)
                              : rng.uniform(spec.pause_min_s, spec.pause_max_s);
    if (active) bp.active.emplace_back(t, std::min(t + len, spec.duration_s));
    t += len;
    active = !active;
  }

  const double slope = rng.uniform(spec.slope_db_per_octave_min, spec.slope_db_per_octave_max);
  const double kappa = slope / (10.0 * std::log10(2.0));  // power-law exponent
  std::vector<double> freqs;
  double bg_power = 0;
  auto draw_separated = [&](double max_hz) {
    double f = 0;
    for (int attempt = 0; attempt < 100; ++attempt) {
      f = draw_band_frequency(rng, max_hz);
      bool clear = true;
      for (double other : freqs)
        if (std::abs(other - f) < 2.0) {
          clear = false;
          break;
        }
      if (clear) break;
    }
    freqs.push_back(f);
    return f;
  };
  for (int k = 0; k < spec.num_sinusoids; ++k) {
    BgComponent c;
    c.freq_hz = draw_separated(kAllowedBands[std::size(kAllowedBands) - 1].hi);
    c.amp = std::sqrt(std::pow(c.freq_hz / 1000.0, kappa) * rng.uniform(0.5, 1.0));
    c.phase = rng.uniform(0.0, kTwoPi);
    draw_pan(rng, spec.channels, c.gain_l, c.gain_r);
    bg_power += c.amp * c.amp / 2.0;
    bp.bg.push_back(c);
  }
  for (int k = 0; k < spec.num_am_tones; ++k) {
    const double carrier = draw_separated(12000.0);
    const double mod_rate = rng.uniform(0.5, 4.0);
    const double depth = rng.uniform(0.3, 0.9);
    const double amp = 2.0 * std::sqrt(std::pow(carrier / 1000.0, kappa) * rng.uniform(0.5, 1.0));
    const double phase = rng.uniform(0.0, kTwoPi);
    const double mod_phase = rng.uniform(0.0, kTwoPi);
    double gl, gr;
    draw_pan(rng, spec.channels, gl, gr);
    // a (1 + m sin(mu)) sin(c) = a sin(c) + (am/2) cos(c - mu) - (am/2) cos(c + mu)
    BgComponent carrier_c{carrier, amp, phase, gl, gr};
    BgComponent lower{carrier - mod_rate, amp * depth / 2.0,
                      phase - mod_phase + std::numbers::pi / 2.0, gl, gr};
    BgComponent upper{carrier + mod_rate, -amp * depth / 2.0,
                      phase + mod_phase + std::numbers::pi / 2.0, gl, gr};
    bp.bg.push_back(carrier_c);
    bp.bg.push_back(lower);
    bp.bg.push_back(upper);
    bg_power += amp * amp * (1.0 + depth * depth / 2.0) / 2.0;
  }
  if (bg_power > 0) {
    const double bg_norm = 1.0 / std::sqrt(bg_power);
    for (BgComponent& c : bp.bg) c.amp *= bg_norm;
  }
  return bp;
}

std::vector<double> render_gate(const Blueprint& bp, double duration_s, int fs) {
  const std::int64_t len = static_cast<std::int64_t>(std::llround(duration_s * fs));
  std::vector<double> gate(len, 0.0);
  for (const auto& [t0, t1] : bp.active) {
    const std::int64_t n0 = std::llround(t0 * fs);
    const std::int64_t n1 = std::min<std::int64_t>(len, std::llround(t1 * fs));
    for (std::int64_t n = std::max<std::int64_t>(0, n0); n < n1; ++n) {
      const double t = static_cast<double>(n) / fs;
      double g = 1.0;
      if (t < t0 + bp.ramp_s) g = 0.5 - 0.5 * std::cos(std::numbers::pi * (t - t0) / bp.ramp_s);
      const double tail = t1 - t;
      if (tail < bp.ramp_s)
        g = std::min(g, 0.5 - 0.5 * std::cos(std::numbers::pi * tail / bp.ramp_s));
      gate[n] = g;
    }
  }
  return gate;
}

// foreground partials share one vibrato-modulated base phase; harmonic h uses
// h times that phase plus its own offset
void render_foreground(const Blueprint& bp, double duration_s, int fs,
                       std::vector<std::vector<double>>& out) {
  const std::int64_t len = static_cast<std::int64_t>(std::llround(duration_s * fs));
  const int channels = out.size() == 2 ? 2 : 1;
  for (auto& ch : out) ch.assign(len, 0.0);
  const std::vector<double> gate = render_gate(bp, duration_s, fs);

  std::vector<Partial> used;
  for (const Partial& p : bp.partials)
    if (p.harmonic * bp.f0 * (1.0 + bp.vib_depth) < 0.45 * fs) used.push_back(p);

  const double omega0 = kTwoPi * bp.f0;
  const double omega_v = kTwoPi * bp.vib_rate;
  const double vib_scale = bp.vib_depth / omega_v * omega0;
  std::vector<std::complex<double>> rot(used.size());
  for (std::size_t i = 0; i < used.size(); ++i)
    rot[i] = std::polar(used[i].amp, used[i].theta);

  for (std::int64_t n = 0; n < len; ++n) {
    if (gate[n] == 0.0) continue;
    const double t = static_cast<double>(n) / fs;
    // phase integral of f0 (1 + depth sin(omega_v t + vib_phase))
    const double base = omega0 * t - vib_scale * std::cos(omega_v * t + bp.vib_phase);
    const std::complex<double> z = std::polar(1.0, base);
    std::complex<double> zh = z;
    double s = 0;
    for (std::size_t i = 0; i < used.size(); ++i) {
      s += (zh * rot[i]).imag();
      zh *= z;
    }
    s *= gate[n];
    out[0][n] = bp.fg_gain_l * s;
    if (channels == 2) out[1][n] = bp.fg_gain_r * s;
  }
}

void render_background(const Blueprint& bp, double duration_s, int fs,
                       std::vector<std::vector<double>>& out) {
  const std::int64_t len = static_cast<std::int64_t>(std::llround(duration_s * fs));
  const int channels = out.size() == 2 ? 2 : 1;
  for (auto& ch : out) ch.assign(len, 0.0);
  for (const BgComponent& c : bp.bg) {
    if (std::abs(c.freq_hz) >= 0.45 * fs) continue;
    std::complex<double> z = std::polar(1.0, c.phase);
    const std::complex<double> step = std::polar(1.0, kTwoPi * c.freq_hz / fs);
    const double al = c.amp * c.gain_l;
    const double ar = c.amp * c.gain_r;
    double* ch0 = out[0].data();
    double* ch1 = channels == 2 ? out[1].data() : nullptr;
    for (std::int64_t n = 0; n < len; ++n) {
      const double s = z.imag();
      ch0[n] += al * s;
      if (ch1) ch1[n] += ar * s;
      z *= step;
      if ((n & 0xfff) == 0xfff) z /= std::abs(z);  // keep the rotation on the unit circle
    }
  }
}

double active_energy(const std::vector<std::vector<double>>& channels,
                     const std::vector<std::pair<double, double>>& active, int fs) {
  const std::int64_t len = channels.empty() ? 0 : static_cast<std::int64_t>(channels[0].size());
  double energy = 0;
  for (const auto& range : active) {
    const auto [n0, n1] = active_sample_range(range, fs, len);
    for (const auto& ch : channels)
      for (std::int64_t n = n0; n < n1; ++n) energy += ch[n] * ch[n];
  }
  return energy;
}

}  // namespace

std::pair<std::int64_t, std::int64_t> active_sample_range(std::pair<double, double> range_s,
                                                          int fs_hz, std::int64_t max_len) {
  std::int64_t n0 = std::llround(range_s.first * fs_hz);
  std::int64_t n1 = std::llround(range_s.second * fs_hz);
  n0 = std::clamp<std::int64_t>(n0, 0, max_len);
  n1 = std::clamp<std::int64_t>(n1, n0, max_len);
  return {n0, n1};
}

SynthExample synth_example(const SynthSpec& spec) {
  require(spec.fs_hz > 0, ErrorCode::invalid_argument, "sampling frequency must be positive");
  require(spec.duration_s > 0, ErrorCode::invalid_argument, "duration must be positive");
  require(spec.channels == 1 || spec.channels == 2, ErrorCode::invalid_argument,
          "1 or 2 channels supported");
  require(spec.num_sinusoids + spec.num_am_tones > 0, ErrorCode::invalid_argument,
          "background needs at least one component");

  Rng rng(spec.seed);
  const Blueprint bp = draw_blueprint(spec, rng);

  // Reference rendering fixes the foreground/background scaling; reused as
  // the output when 48 kHz was requested.
  std::vector<std::vector<double>> fg_ref(spec.channels), bg_ref(spec.channels);
  render_foreground(bp, spec.duration_s, kReferenceFs, fg_ref);
  render_background(bp, spec.duration_s, kReferenceFs, bg_ref);
  const double e_fg = active_energy(fg_ref, bp.active, kReferenceFs);
  const double e_bg = active_energy(bg_ref, bp.active, kReferenceFs);
  require(e_fg > 0 && e_bg > 0, ErrorCode::invalid_argument,
          "degenerate example: a stem is silent over the active region");
  const double gamma = std::sqrt(e_fg / (e_bg * std::pow(10.0, spec.mix_snr_db / 10.0)));

  std::vector<std::vector<double>> fg(spec.channels), bg(spec.channels);
  if (spec.fs_hz == kReferenceFs) {
    fg = std::move(fg_ref);
    bg = std::move(bg_ref);
  } else {
    render_foreground(bp, spec.duration_s, spec.fs_hz, fg);
    render_background(bp, spec.duration_s, spec.fs_hz, bg);
  }

  constexpr double kHeadroom = 0.1;  // keeps typical sample magnitudes below 1
  SynthExample result;
  result.active_ranges_s = bp.active;
  Example& ex = result.example;
  ex.name = spec.name;
  ex.seed = spec.seed;
  ex.foreground.fs_hz = ex.background.fs_hz = ex.mixture.fs_hz = spec.fs_hz;
  ex.foreground.channels.resize(spec.channels);
  ex.background.channels.resize(spec.channels);
  ex.mixture.channels.resize(spec.channels);
  for (int c = 0; c < spec.channels; ++c) {
    const std::size_t len = fg[c].size();
    ex.foreground.channels[c].resize(len);
    ex.background.channels[c].resize(len);
    ex.mixture.channels[c].resize(len);
    for (std::size_t n = 0; n < len; ++n) {
      const double f = kHeadroom * fg[c][n];
      const double b = kHeadroom * gamma * bg[c][n];
      ex.foreground.channels[c][n] = f;
      ex.background.channels[c][n] = b;
      ex.mixture.channels[c][n] = f + b;
    }
  }
  return result;
}

}  // namespace sfisep
