#pragma once

#include <string>
#include <vector>

#include "sfisep/synth.hpp"

namespace sfisep {

// Corpus directory layout: manifest.json plus one float32 WAV triple per
// item. The manifest lists stem file names, seeds, and foreground activity
// ranges.
void save_corpus(const std::string& dir, const std::vector<SynthExample>& items);

std::vector<SynthExample> load_corpus(const std::string& dir);

// Items drawn from a shared spec; item i uses name "<prefix>_<i>" and a seed
// derived from (base_seed, i), so sets are stable under count changes and can
// be generated in parallel without changing the result.
std::vector<SynthExample> generate_corpus(const SynthSpec& base, int count,
                                          const std::string& prefix, int jobs = 1);

std::vector<Example> examples_of(const std::vector<SynthExample>& items);
std::vector<AudioBuffer> mixtures_of(const std::vector<SynthExample>& items);

}  // namespace sfisep
