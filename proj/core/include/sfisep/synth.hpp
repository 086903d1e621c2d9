#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sfisep/audio.hpp"

namespace sfisep {

// Synthetic (foreground, background, mixture) triple. Both stems are sums of
// closed-form continuous components evaluated at t = n / fs, so one seed
// describes the same underlying signal at every sampling frequency: rendering
// at 48 kHz and downsampling matches a native low-rate rendering.
//
// The foreground is a gated harmonic tone (fundamental, vibrato, formant-like
// spectral envelope, on/off activity segments with raised-cosine ramps) whose
// partials stay below 3 kHz. The background is a bed of random sinusoids with
// a colored spectral slope plus a few amplitude-modulated tones, spread over
// bands chosen to avoid every supported rate's resampling transition region.
struct SynthSpec {
  std::uint64_t seed = 0;
  double duration_s = 4.0;
  int fs_hz = 48000;
  int channels = 1;
  double mix_snr_db = 0.0;  // foreground/background energy ratio over active regions

  // foreground
  double f0_min_hz = 100.0;
  double f0_max_hz = 300.0;
  int max_harmonics = 12;
  double active_min_s = 0.4;
  double active_max_s = 1.2;
  double pause_min_s = 0.15;
  double pause_max_s = 0.5;
  double ramp_s = 0.020;

  // background
  int num_sinusoids = 120;
  int num_am_tones = 4;
  double slope_db_per_octave_min = -4.0;
  double slope_db_per_octave_max = -2.0;

  std::string name;
};

struct SynthExample {
  Example example;
  std::vector<std::pair<double, double>> active_ranges_s;  // foreground activity, seconds
};

// The mix scaling is derived from energies measured on a 48 kHz reference
// rendering, so it is identical no matter which fs_hz is requested.
SynthExample synth_example(const SynthSpec& spec);

// Sample index range [begin, end) covered by an activity range in seconds.
std::pair<std::int64_t, std::int64_t> active_sample_range(std::pair<double, double> range_s,
                                                          int fs_hz, std::int64_t max_len);

}  // namespace sfisep
