#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sfisep/errors.hpp"

namespace sfisep {

// Multichannel audio held as one vector per channel, 64-bit samples.
// File formats and the training fast path convert at their boundaries.
struct AudioBuffer {
  int fs_hz = 0;
  std::vector<std::vector<double>> channels;

  AudioBuffer() = default;
  AudioBuffer(int fs, int channel_count, std::int64_t samples)
      : fs_hz(fs), channels(channel_count, std::vector<double>(samples, 0.0)) {}

  int channel_count() const { return static_cast<int>(channels.size()); }

  std::int64_t sample_count() const {
    return channels.empty() ? 0 : static_cast<std::int64_t>(channels[0].size());
  }

  double duration_s() const {
    return fs_hz > 0 ? static_cast<double>(sample_count()) / fs_hz : 0.0;
  }

  void check_rectangular() const {
    for (const auto& ch : channels)
      require(static_cast<std::int64_t>(ch.size()) == sample_count(), ErrorCode::shape_error,
              "audio channels must have equal length");
  }
};

// A mixture with its ground-truth stems; mixture == foreground + background.
struct Example {
  std::string name;
  std::uint64_t seed = 0;
  AudioBuffer mixture;
  AudioBuffer foreground;
  AudioBuffer background;
};

inline double signal_energy(const AudioBuffer& buffer) {
  double total = 0.0;
  for (const auto& ch : buffer.channels)
    for (double v : ch) total += v * v;
  return total;
}

}  // namespace sfisep
