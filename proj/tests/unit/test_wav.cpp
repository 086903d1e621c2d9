#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "sfisep/errors.hpp"
#include "sfisep/rng.hpp"
#include "sfisep/wav.hpp"

using namespace sfisep;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("sfisep_wav_test_" + name);
}

struct FileGuard {
  std::filesystem::path path;
  ~FileGuard() { std::filesystem::remove(path); }
};

std::vector<char> slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::vector<char>(std::istreambuf_iterator<char>(in), {});
}

void dump(const std::filesystem::path& p, const std::vector<char>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(bytes.data(), bytes.size());
}

}  // namespace

TEST_CASE("float32 files round-trip bit-exactly") {
  const auto path = temp_path("f32.wav");
  FileGuard guard{path};
  AudioBuffer x;
  x.fs_hz = 44100;
  x.channels.assign(2, std::vector<double>(333));
  Rng rng(1);
  for (auto& ch : x.channels)
    for (double& v : ch) v = static_cast<float>(rng.uniform(-1.5, 1.5));

  write_wav(path.string(), x, WavFormat::float32);
  const AudioBuffer y = read_wav(path.string());
  CHECK(y.fs_hz == 44100);
  CHECK(y.channels == x.channels);
}

TEST_CASE("pcm16 uses the full-scale convention and clips") {
  const auto path = temp_path("pcm16.wav");
  FileGuard guard{path};
  AudioBuffer x;
  x.fs_hz = 8000;
  x.channels = {{-1.0, 1.0, 0.0, 0.5, -2.0, 2.0, 1.0 / 32768.0}};
  write_wav(path.string(), x, WavFormat::pcm16);
  const AudioBuffer y = read_wav(path.string());
  CHECK(y.channels[0][0] == -1.0);                  // -32768 / 32768
  CHECK(y.channels[0][1] == 32767.0 / 32768.0);     // +1.0 saturates one code short
  CHECK(y.channels[0][2] == 0.0);
  CHECK(y.channels[0][3] == doctest::Approx(0.5).epsilon(1e-4));
  CHECK(y.channels[0][4] == -1.0);                  // clipped
  CHECK(y.channels[0][5] == 32767.0 / 32768.0);
  CHECK(y.channels[0][6] == 1.0 / 32768.0);         // one code above zero

  // quantization error bounded by half a code
  AudioBuffer z;
  z.fs_hz = 8000;
  z.channels.assign(1, std::vector<double>(1000));
  Rng rng(2);
  for (double& v : z.channels[0]) v = rng.uniform(-0.99, 0.99);
  write_wav(path.string(), z, WavFormat::pcm16);
  const AudioBuffer w = read_wav(path.string());
  for (std::size_t i = 0; i < w.channels[0].size(); ++i)
    CHECK(std::abs(w.channels[0][i] - z.channels[0][i]) <= 0.5 / 32768.0 + 1e-12);
}

TEST_CASE("stereo interleaving preserves channel order") {
  const auto path = temp_path("stereo.wav");
  FileGuard guard{path};
  AudioBuffer x;
  x.fs_hz = 16000;
  x.channels = {{0.25, 0.5, 0.75}, {-0.25, -0.5, -0.75}};
  write_wav(path.string(), x, WavFormat::float32);
  const AudioBuffer y = read_wav(path.string());
  CHECK(y.channels[0] == x.channels[0]);
  CHECK(y.channels[1] == x.channels[1]);
}

TEST_CASE("big-endian container is rejected with a parse error") {
  const auto path = temp_path("rifx.wav");
  FileGuard guard{path};
  AudioBuffer x;
  x.fs_hz = 8000;
  x.channels = {{0.0, 0.1}};
  write_wav(path.string(), x, WavFormat::pcm16);
  std::vector<char> bytes = slurp(path);
  bytes[3] = 'X';  // RIFF -> RIFX
  dump(path, bytes);
  try {
    read_wav(path.string());
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::parse_error);
  }
}

TEST_CASE("truncated and malformed files are parse errors") {
  const auto path = temp_path("broken.wav");
  FileGuard guard{path};
  AudioBuffer x;
  x.fs_hz = 8000;
  x.channels = {{0.0, 0.1, 0.2, 0.3}};
  write_wav(path.string(), x, WavFormat::float32);
  const std::vector<char> bytes = slurp(path);

  for (std::size_t keep : {std::size_t{4}, std::size_t{20}, bytes.size() - 3}) {
    dump(path, std::vector<char>(bytes.begin(), bytes.begin() + keep));
    CHECK_THROWS_AS(read_wav(path.string()), Error);
  }

  dump(path, std::vector<char>(bytes.begin(), bytes.begin() + 2));
  CHECK_THROWS_AS(read_wav(path.string()), Error);

  CHECK_THROWS_AS(read_wav((temp_path("missing_dir") / "nothing.wav").string()), Error);
}

TEST_CASE("unsupported encodings are reported as such") {
  const auto path = temp_path("alaw.wav");
  FileGuard guard{path};
  AudioBuffer x;
  x.fs_hz = 8000;
  x.channels = {{0.0, 0.1}};
  write_wav(path.string(), x, WavFormat::pcm16);
  std::vector<char> bytes = slurp(path);
  // format tag lives at offset 20 in the canonical layout written above
  bytes[20] = 6;  // a-law
  dump(path, bytes);
  try {
    read_wav(path.string());
    FAIL("expected an unsupported-format error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::unsupported_format);
  }

  CHECK_THROWS_AS([&] {
    AudioBuffer three;
    three.fs_hz = 8000;
    three.channels.assign(3, std::vector<double>(4, 0.0));
    write_wav(path.string(), three, WavFormat::pcm16);
  }(), Error);
}
