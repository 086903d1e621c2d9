#include "sfisep/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "sfisep/errors.hpp"

namespace sfisep {

namespace {

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint16_t get_u16(const std::string& s, std::size_t pos) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(s[pos]) |
                                    (static_cast<unsigned char>(s[pos + 1]) << 8));
}

std::uint32_t get_u32(const std::string& s, std::size_t pos) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(s[pos + i]);
  return v;
}

float get_f32(const std::string& s, std::size_t pos) {
  std::uint32_t bits = get_u32(s, pos);
  float f;
  std::memcpy(&f, &bits, 4);
  return f;
}

}  // namespace

void write_wav(const std::string& path, const AudioBuffer& x, WavFormat format) {
  x.check_rectangular();
  const int channels = static_cast<int>(x.channel_count());
  require(channels == 1 || channels == 2, ErrorCode::unsupported_format,
          "only 1 or 2 channels supported");
  require(x.fs_hz > 0, ErrorCode::invalid_argument, "sampling frequency must be positive");

  const std::int64_t frames = x.sample_count();
  const int bytes_per_sample = format == WavFormat::pcm16 ? 2 : 4;
  const std::uint32_t data_size = static_cast<std::uint32_t>(frames * channels * bytes_per_sample);

  std::string out;
  out.reserve(44 + data_size);
  out += "RIFF";
  put_u32(out, 36 + data_size);
  out += "WAVE";
  out += "fmt ";
  put_u32(out, 16);
  put_u16(out, format == WavFormat::pcm16 ? 1 : 3);  // PCM / IEEE float
  put_u16(out, static_cast<std::uint16_t>(channels));
  put_u32(out, static_cast<std::uint32_t>(x.fs_hz));
  put_u32(out, static_cast<std::uint32_t>(x.fs_hz) * channels * bytes_per_sample);
  put_u16(out, static_cast<std::uint16_t>(channels * bytes_per_sample));
  put_u16(out, static_cast<std::uint16_t>(8 * bytes_per_sample));
  out += "data";
  put_u32(out, data_size);
  for (std::int64_t i = 0; i < frames; ++i) {
    for (int c = 0; c < channels; ++c) {
      const double v = x.channels[c][i];
      if (format == WavFormat::pcm16) {
        const long q = std::lrint(v * 32768.0);
        put_u16(out, static_cast<std::uint16_t>(
                         static_cast<std::int16_t>(std::clamp<long>(q, -32768, 32767))));
      } else {
        const float f = static_cast<float>(v);
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        put_u32(out, bits);
      }
    }
  }

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  require(file.good(), ErrorCode::io_error, "cannot open for writing: " + path);
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  require(file.good(), ErrorCode::io_error, "write failed: " + path);
}

AudioBuffer read_wav(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  require(file.good(), ErrorCode::io_error, "cannot open for reading: " + path);
  std::string data((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());

  require(data.size() >= 12, ErrorCode::parse_error, "file too short for a RIFF header");
  require(data.compare(0, 4, "RIFF") == 0, ErrorCode::parse_error,
          "not a RIFF file (big-endian RIFX and other containers unsupported)");
  require(data.compare(8, 4, "WAVE") == 0, ErrorCode::parse_error, "RIFF file is not WAVE");

  bool have_fmt = false;
  std::uint16_t audio_format = 0, channels = 0, bits = 0;
  std::uint32_t fs = 0;
  std::size_t data_pos = 0, data_size = 0;
  std::size_t pos = 12;
  while (pos + 8 <= data.size()) {
    const std::string id = data.substr(pos, 4);
    const std::uint32_t size = get_u32(data, pos + 4);
    require(pos + 8 + size <= data.size(), ErrorCode::parse_error,
            "chunk '" + id + "' extends past end of file");
    if (id == "fmt ") {
      require(size >= 16, ErrorCode::parse_error, "fmt chunk too short");
      audio_format = get_u16(data, pos + 8);
      channels = get_u16(data, pos + 10);
      fs = get_u32(data, pos + 12);
      bits = get_u16(data, pos + 22);
      have_fmt = true;
    } else if (id == "data") {
      data_pos = pos + 8;
      data_size = size;
    }
    pos += 8 + size + (size % 2);  // chunks are word-aligned
  }
  require(have_fmt, ErrorCode::parse_error, "missing fmt chunk");
  require(data_pos != 0, ErrorCode::parse_error, "missing data chunk");
  require(channels == 1 || channels == 2, ErrorCode::unsupported_format,
          "only 1 or 2 channels supported");
  require(fs > 0, ErrorCode::parse_error, "invalid sampling frequency");
  const bool pcm16 = audio_format == 1 && bits == 16;
  const bool f32 = audio_format == 3 && bits == 32;
  require(pcm16 || f32, ErrorCode::unsupported_format,
          "only PCM 16-bit and IEEE float 32-bit supported");

  const int bytes_per_sample = pcm16 ? 2 : 4;
  const std::size_t frame_bytes = static_cast<std::size_t>(channels) * bytes_per_sample;
  require(data_size % frame_bytes == 0, ErrorCode::parse_error,
          "data chunk is not a whole number of frames");
  const std::size_t frames = data_size / frame_bytes;

  AudioBuffer out;
  out.fs_hz = static_cast<int>(fs);
  out.channels.assign(channels, std::vector<double>(frames));
  for (std::size_t i = 0; i < frames; ++i) {
    for (int c = 0; c < channels; ++c) {
      const std::size_t p = data_pos + (i * channels + c) * bytes_per_sample;
      if (pcm16)
        out.channels[c][i] = static_cast<std::int16_t>(get_u16(data, p)) / 32768.0;
      else
        out.channels[c][i] = get_f32(data, p);
    }
  }
  return out;
}

}  // namespace sfisep
