#pragma once

#include <vector>

#include "sfisep/audio.hpp"

namespace sfisep {

// Polyphase windowed-sinc rational-ratio resampler. Kaiser window (beta = 12),
// cutoff at 0.45 * min(fs_in, fs_out), linear phase with the group delay
// compensated so outputs stay time-aligned with inputs. Each polyphase branch
// is normalized to unit DC gain, so a constant input maps to the same
// constant away from the edges.
struct ResampleDesign {
  int up = 1;    // p: output samples per polyphase period
  int down = 1;  // q: input samples per polyphase period
  int delay = 0;         // group delay in prototype (fs_in * up) samples
  std::vector<double> taps;  // prototype filter, odd length, centered at delay
};

ResampleDesign design_resampler(int fs_in, int fs_out);

// Output length is ceil(len * up / down). Samples outside the input are
// treated as zero, so edge regions carry the usual filter transients.
std::vector<double> resample_signal(const std::vector<double>& x, int fs_in, int fs_out);

AudioBuffer resample(const AudioBuffer& x, int target_fs);

}  // namespace sfisep
