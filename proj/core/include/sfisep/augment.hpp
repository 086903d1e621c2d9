#pragma once

#include "sfisep/audio.hpp"
#include "sfisep/rng.hpp"

namespace sfisep {

// Drawn fresh for every example in every epoch.
struct AugmentConfig {
  double max_offset_s = 0.010;
  double mono_downmix_prob = 1.0 / 3.0;  // stereo examples only
  double gain_db_min = -6.0;
  double gain_db_max = 6.0;
  double mix_ratio_db_min = -6.0;
  double mix_ratio_db_max = 6.0;
};

// Applied in order: start-offset trim (identical on all stems), optional
// mono downmix duplicated to both channels, global gain, background scaling.
// The mixture is rebuilt as foreground + background afterwards, so stem
// additivity holds exactly.
Example augment(const Example& ex, const AugmentConfig& config, Rng& rng);

}  // namespace sfisep
