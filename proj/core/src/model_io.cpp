#include "sfisep/model_io.hpp"

#include <cstring>
#include <fstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "sfisep/errors.hpp"

namespace sfisep {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr char kMagic[4] = {'S', 'F', 'I', 'S'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_uint(const std::string& s, std::size_t pos, int bytes) {
  std::uint64_t v = 0;
  for (int i = bytes - 1; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(s[pos + i]);
  return v;
}

template <class T>
void append_raw(std::string& out, const std::vector<T>& values) {
  static_assert(sizeof(T) == 4 || sizeof(T) == 8);
  const std::size_t bytes = values.size() * sizeof(T);
  const std::size_t base = out.size();
  out.resize(base + bytes);
  std::memcpy(out.data() + base, values.data(), bytes);
}

template <class T>
std::vector<T> read_raw(const std::string& payload, std::size_t offset, std::size_t count) {
  std::vector<T> values(count);
  std::memcpy(values.data(), payload.data() + offset, count * sizeof(T));
  return values;
}

ordered_json tensor_entry(const char* name, const char* dtype, std::uint64_t count,
                          std::uint64_t offset) {
  return {{"name", name}, {"dtype", dtype}, {"shape", {count}}, {"offset", offset}};
}

}  // namespace

void save_model(const SeparationModel& model, const std::string& path) {
  const std::uint64_t p = model.params.flat.size();
  const std::uint64_t b = model.whitening.mean.size();
  require(static_cast<std::int64_t>(p) == param_count(model.core_config), ErrorCode::shape_error,
          "parameter vector does not match the core configuration");
  require(model.whitening.stddev.size() == b, ErrorCode::shape_error,
          "whitening mean/std sizes differ");

  ordered_json header;
  header["frame_duration"] = {{"num", model.frame_duration.num},
                              {"den", model.frame_duration.den}};
  header["fs_hz"] = model.fs_hz;
  header["alpha"] = model.alpha;
  header["channel_mode"] = to_string(model.channel_mode);
  header["core_config"] = {{"num_hidden_blocks", model.core_config.num_hidden_blocks},
                           {"hidden_filters", model.core_config.hidden_filters},
                           {"kernel_time", model.core_config.kernel_time},
                           {"kernel_freq", model.core_config.kernel_freq},
                           {"in_channels", model.core_config.in_channels},
                           {"mask_channels", model.core_config.mask_channels}};
  header["whitening_sample_count"] = model.whitening.sample_count;
  header["tensors"] = {tensor_entry("core_params", "f32", p, 0),
                       tensor_entry("whitening_mean", "f64", b, p * 4),
                       tensor_entry("whitening_std", "f64", b, p * 4 + b * 8)};
  const std::string header_text = header.dump();

  std::string out;
  out.append(kMagic, 4);
  put_u32(out, kModelFormatVersion);
  put_u64(out, header_text.size());
  out += header_text;
  append_raw(out, model.params.flat);
  append_raw(out, model.whitening.mean);
  append_raw(out, model.whitening.stddev);

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  require(file.good(), ErrorCode::io_error, "cannot open for writing: " + path);
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  require(file.good(), ErrorCode::io_error, "write failed: " + path);
}

SeparationModel load_model(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  require(file.good(), ErrorCode::io_error, "cannot open for reading: " + path);
  std::string data((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());

  require(data.size() >= 16, ErrorCode::truncated_model, "file shorter than the fixed header");
  require(data.compare(0, 4, kMagic, 4) == 0, ErrorCode::bad_magic, "magic is not 'SFIS'");
  const std::uint32_t version = static_cast<std::uint32_t>(get_uint(data, 4, 4));
  require(version == kModelFormatVersion, ErrorCode::unsupported_version,
          "format version " + std::to_string(version) + " not supported");
  const std::uint64_t header_len = get_uint(data, 8, 8);
  require(16 + header_len <= data.size(), ErrorCode::truncated_model,
          "declared header extends past end of file");

  ordered_json header;
  try {
    header = ordered_json::parse(data.substr(16, header_len));
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::parse_error, std::string("model header: ") + e.what());
  }

  SeparationModel model;
  std::uint64_t p = 0, b = 0;
  std::uint64_t off_params = 0, off_mean = 0, off_std = 0;
  try {
    model.frame_duration = Rational(header.at("frame_duration").at("num").get<std::int64_t>(),
                                    header.at("frame_duration").at("den").get<std::int64_t>());
    model.fs_hz = header.at("fs_hz").get<int>();
    model.alpha = header.at("alpha").get<double>();
    model.channel_mode = channel_mode_from_string(header.at("channel_mode").get<std::string>());
    const auto& cc = header.at("core_config");
    model.core_config.num_hidden_blocks = cc.at("num_hidden_blocks").get<int>();
    model.core_config.hidden_filters = cc.at("hidden_filters").get<int>();
    model.core_config.kernel_time = cc.at("kernel_time").get<int>();
    model.core_config.kernel_freq = cc.at("kernel_freq").get<int>();
    model.core_config.in_channels = cc.at("in_channels").get<int>();
    model.core_config.mask_channels = cc.at("mask_channels").get<int>();
    model.whitening.sample_count = header.at("whitening_sample_count").get<std::uint64_t>();
    for (const auto& tensor : header.at("tensors")) {
      const std::string name = tensor.at("name").get<std::string>();
      const std::string dtype = tensor.at("dtype").get<std::string>();
      const std::uint64_t count = tensor.at("shape").at(0).get<std::uint64_t>();
      const std::uint64_t offset = tensor.at("offset").get<std::uint64_t>();
      if (name == "core_params") {
        require(dtype == "f32", ErrorCode::parse_error, "core_params must be f32");
        p = count;
        off_params = offset;
      } else if (name == "whitening_mean") {
        require(dtype == "f64", ErrorCode::parse_error, "whitening_mean must be f64");
        b = count;
        off_mean = offset;
      } else if (name == "whitening_std") {
        require(dtype == "f64", ErrorCode::parse_error, "whitening_std must be f64");
        require(count == b, ErrorCode::parse_error, "whitening tensor sizes differ");
        off_std = offset;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::parse_error, std::string("model header: ") + e.what());
  }

  require(static_cast<std::int64_t>(p) == param_count(model.core_config), ErrorCode::parse_error,
          "tensor manifest does not match the core configuration");

  const std::string payload = data.substr(16 + header_len);
  auto check_span = [&](std::uint64_t offset, std::uint64_t bytes, const char* what) {
    require(offset + bytes <= payload.size(), ErrorCode::truncated_model,
            std::string("payload ends inside ") + what);
  };
  check_span(off_params, p * 4, "core_params");
  check_span(off_mean, b * 8, "whitening_mean");
  check_span(off_std, b * 8, "whitening_std");

  model.params.config = model.core_config;
  model.params.flat = read_raw<float>(payload, off_params, p);
  model.whitening.fs_hz = model.fs_hz;
  model.whitening.num_bins = static_cast<int>(b);
  model.whitening.mean = read_raw<double>(payload, off_mean, b);
  model.whitening.stddev = read_raw<double>(payload, off_std, b);

  const FrameGeometry geom = model.geometry();
  require(geom.num_bins == static_cast<int>(b), ErrorCode::parse_error,
          "whitening size does not match the model geometry");
  return model;
}

}  // namespace sfisep
