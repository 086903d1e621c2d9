#pragma once

#include <cstdint>
#include <string>

#include "sfisep/pipeline.hpp"

namespace sfisep {

// "SFIS" container: magic, little-endian u32 format version, u64 header
// length, a UTF-8 JSON header (exact rational frame duration, rates, core
// configuration, ordered tensor manifest), then raw little-endian tensor
// payloads in manifest order. Core parameters are stored as 32-bit floats,
// whitening statistics as 64-bit floats. Round trips are bit-exact.
inline constexpr std::uint32_t kModelFormatVersion = 1;

void save_model(const SeparationModel& model, const std::string& path);

SeparationModel load_model(const std::string& path);

}  // namespace sfisep
