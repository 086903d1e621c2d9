#pragma once

#include <string>

#include "sfisep/audio.hpp"

namespace sfisep {

enum class WavFormat { pcm16, float32 };

// RIFF/WAVE, little-endian, 1 or 2 channels. float32 round-trips bit-exactly;
// pcm16 quantizes with clipping at full scale and reads back as value / 32768.
void write_wav(const std::string& path, const AudioBuffer& x,
               WavFormat format = WavFormat::float32);

AudioBuffer read_wav(const std::string& path);

}  // namespace sfisep
