#include "sfisep/corpus.hpp"

#include <filesystem>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "sfisep/errors.hpp"
#include "sfisep/rng.hpp"
#include "sfisep/wav.hpp"

namespace sfisep {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

void save_corpus(const std::string& dir, const std::vector<SynthExample>& items) {
  require(!items.empty(), ErrorCode::invalid_argument, "empty corpus");
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec, ErrorCode::io_error, "cannot create directory: " + dir);

  ordered_json manifest;
  manifest["fs_hz"] = items[0].example.mixture.fs_hz;
  manifest["channels"] = items[0].example.mixture.channel_count();
  manifest["items"] = ordered_json::array();
  for (const SynthExample& item : items) {
    const Example& ex = item.example;
    const std::string base = ex.name.empty() ? "item" : ex.name;
    ordered_json entry;
    entry["name"] = base;
    entry["seed"] = ex.seed;
    entry["mixture"] = base + "_mixture.wav";
    entry["foreground"] = base + "_foreground.wav";
    entry["background"] = base + "_background.wav";
    entry["active"] = ordered_json::array();
    for (const auto& [a, b] : item.active_ranges_s) entry["active"].push_back({a, b});
    manifest["items"].push_back(entry);
    write_wav((fs::path(dir) / (base + "_mixture.wav")).string(), ex.mixture);
    write_wav((fs::path(dir) / (base + "_foreground.wav")).string(), ex.foreground);
    write_wav((fs::path(dir) / (base + "_background.wav")).string(), ex.background);
  }
  std::ofstream out(fs::path(dir) / "manifest.json");
  require(out.good(), ErrorCode::io_error, "cannot write manifest in " + dir);
  out << manifest.dump(2) << "\n";
  require(out.good(), ErrorCode::io_error, "manifest write failed in " + dir);
}

std::vector<SynthExample> load_corpus(const std::string& dir) {
  std::ifstream in(fs::path(dir) / "manifest.json");
  require(in.good(), ErrorCode::io_error, "cannot read manifest in " + dir);
  ordered_json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::parse_error, std::string("manifest: ") + e.what());
  }
  std::vector<SynthExample> items;
  try {
    for (const auto& entry : manifest.at("items")) {
      SynthExample item;
      item.example.name = entry.at("name").get<std::string>();
      item.example.seed = entry.at("seed").get<std::uint64_t>();
      item.example.mixture =
          read_wav((fs::path(dir) / entry.at("mixture").get<std::string>()).string());
      item.example.foreground =
          read_wav((fs::path(dir) / entry.at("foreground").get<std::string>()).string());
      item.example.background =
          read_wav((fs::path(dir) / entry.at("background").get<std::string>()).string());
      if (entry.contains("active"))
        for (const auto& range : entry.at("active"))
          item.active_ranges_s.emplace_back(range.at(0).get<double>(),
                                            range.at(1).get<double>());
      items.push_back(std::move(item));
    }
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::parse_error, std::string("manifest: ") + e.what());
  }
  require(!items.empty(), ErrorCode::invalid_argument, "manifest lists no items");
  return items;
}

std::vector<SynthExample> generate_corpus(const SynthSpec& base, int count,
                                          const std::string& prefix, int jobs) {
  require(count > 0, ErrorCode::invalid_argument, "item count must be positive");
  require(jobs >= 1, ErrorCode::invalid_argument, "jobs must be positive");
  std::vector<SynthExample> items(count);
  auto worker = [&](int begin, int step) {
    for (int i = begin; i < count; i += step) {
      SynthSpec spec = base;
      spec.seed = derive_seed(base.seed, 0x73796e7468ULL, static_cast<std::uint64_t>(i));
      spec.name = prefix + "_" + std::to_string(i);
      items[i] = synth_example(spec);
    }
  };
  if (jobs == 1) {
    worker(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker, j, jobs);
    for (auto& t : pool) t.join();
  }
  return items;
}

std::vector<Example> examples_of(const std::vector<SynthExample>& items) {
  std::vector<Example> out;
  out.reserve(items.size());
  for (const SynthExample& item : items) out.push_back(item.example);
  return out;
}

std::vector<AudioBuffer> mixtures_of(const std::vector<SynthExample>& items) {
  std::vector<AudioBuffer> out;
  out.reserve(items.size());
  for (const SynthExample& item : items) out.push_back(item.example.mixture);
  return out;
}

}  // namespace sfisep
