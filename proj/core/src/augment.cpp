#include "sfisep/augment.hpp"

#include <algorithm>
#include <cmath>

#include "sfisep/errors.hpp"

namespace sfisep {

namespace {

void trim_front(AudioBuffer& x, std::int64_t k) {
  for (auto& ch : x.channels) ch.erase(ch.begin(), ch.begin() + std::min<std::int64_t>(k, ch.size()));
}

void downmix(AudioBuffer& x) {
  auto& l = x.channels[0];
  auto& r = x.channels[1];
  for (std::size_t i = 0; i < l.size(); ++i) {
    l[i] = 0.5 * (l[i] + r[i]);
    r[i] = l[i];
  }
}

void apply_gain(AudioBuffer& x, double gain) {
  for (auto& ch : x.channels)
    for (double& v : ch) v *= gain;
}

}  // namespace

Example augment(const Example& ex, const AugmentConfig& config, Rng& rng) {
  require(config.max_offset_s >= 0, ErrorCode::invalid_argument, "offset must be non-negative");
  require(config.mono_downmix_prob >= 0 && config.mono_downmix_prob <= 1,
          ErrorCode::invalid_argument, "probability must lie in [0, 1]");
  ex.mixture.check_rectangular();

  Example out = ex;
  const double offset_s = rng.uniform(0.0, config.max_offset_s);
  const std::int64_t k = std::llround(offset_s * ex.mixture.fs_hz);
  trim_front(out.mixture, k);
  trim_front(out.foreground, k);
  trim_front(out.background, k);

  if (out.mixture.channel_count() == 2 && rng.bernoulli(config.mono_downmix_prob)) {
    downmix(out.mixture);
    downmix(out.foreground);
    downmix(out.background);
  }

  const double gain = std::pow(10.0, rng.uniform(config.gain_db_min, config.gain_db_max) / 20.0);
  apply_gain(out.mixture, gain);
  apply_gain(out.foreground, gain);
  apply_gain(out.background, gain);

  const double ratio =
      std::pow(10.0, rng.uniform(config.mix_ratio_db_min, config.mix_ratio_db_max) / 20.0);
  apply_gain(out.background, ratio);
  for (std::size_t c = 0; c < out.mixture.channels.size(); ++c)
    for (std::size_t i = 0; i < out.mixture.channels[c].size(); ++i)
      out.mixture.channels[c][i] = out.foreground.channels[c][i] + out.background.channels[c][i];
  return out;
}

}  // namespace sfisep
