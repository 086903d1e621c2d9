#include "experiment.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sfisep/corpus.hpp"
#include "sfisep/errors.hpp"
#include "sfisep/model_io.hpp"
#include "sfisep/resample.hpp"

namespace sfisep {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& object, std::initializer_list<const char*> known,
                         const std::string& where) {
  for (const auto& [key, value] : object.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    require(ok, ErrorCode::parse_error, "unknown key \"" + key + "\" in " + where);
  }
}

template <class T>
void read_field(const json& object, const char* key, T& out) {
  if (!object.contains(key)) return;
  try {
    out = object.at(key).get<T>();
  } catch (const json::exception& e) {
    raise(ErrorCode::parse_error, std::string("field \"") + key + "\": " + e.what());
  }
}

// "8000 -> 8", "44100 -> 44_1"; used to compose variant names
std::string rate_tag(int fs) {
  if (fs % 1000 == 0) return std::to_string(fs / 1000);
  std::string tag = std::to_string(fs / 1000) + "_";
  int rem = fs % 1000;
  while (rem % 10 == 0) rem /= 10;
  return tag + std::to_string(rem);
}

// Applies fn(i) over [0, n) on up to `jobs` threads; results land in index
// order, so the output does not depend on scheduling.
template <class Fn>
void parallel_for(int n, int jobs, Fn fn) {
  if (jobs <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
  };
  std::vector<std::future<void>> pool;
  const int workers = std::min(jobs, n);
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.push_back(std::async(std::launch::async, worker));
  for (auto& f : pool) f.get();
}

SynthSpec corpus_spec(const ExperimentConfig& config, int fs, std::uint64_t role_offset) {
  SynthSpec spec;
  spec.seed = config.seed + role_offset;
  spec.duration_s = config.duration_s;
  spec.fs_hz = fs;
  spec.channels = channel_count(config.channel_mode);
  spec.mix_snr_db = config.mix_snr_db;
  return spec;
}

// role offsets keep train/val/test item streams disjoint
constexpr std::uint64_t kTrainRole = 0;
constexpr std::uint64_t kValRole = 1;
constexpr std::uint64_t kTestRole = 2;

MetricReport evaluate_model(const SeparationModel& model,
                            const std::vector<SynthExample>& test, int jobs) {
  std::vector<EvalItem> items(test.size());
  parallel_for(static_cast<int>(test.size()), jobs, [&](int i) {
    const Example& ex = test[i].example;
    EvalItem item;
    item.name = ex.name;
    item.estimate = separate(model, ex.mixture).first;
    item.foreground = ex.foreground;
    item.background = ex.background;
    item.mixture = ex.mixture;
    items[i] = std::move(item);
  });
  return evaluate_items(items);
}

TrainTiming timing_of(const TrainReport& report) {
  TrainTiming t;
  t.epoch_ms = report.epoch_wall_ms;
  t.epochs = static_cast<int>(report.epoch_wall_ms.size());
  if (t.epochs > 0)
    t.mean_epoch_ms =
        std::accumulate(t.epoch_ms.begin(), t.epoch_ms.end(), 0.0) / t.epochs;
  return t;
}

json config_json(const ExperimentConfig& c) {
  return json{
      {"seed", c.seed},
      {"corpus",
       {{"train_items", c.train_items},
        {"val_items", c.val_items},
        {"test_items", c.test_items},
        {"duration_s", c.duration_s},
        {"mix_snr_db", c.mix_snr_db}}},
      {"model",
       {{"hidden_blocks", c.hidden_blocks},
        {"hidden_filters", c.hidden_filters},
        {"channel_mode", to_string(c.channel_mode)},
        {"alpha", c.alpha},
        {"frame_duration", {c.frame_duration.num, c.frame_duration.den}}}},
      {"train", {{"patience", c.patience}, {"max_epochs", c.max_epochs}}},
      {"rates",
       {{"train_fs", c.train_fs},
        {"transfer_fs", c.transfer_fs},
        {"alt_transfer_fs", c.alt_transfer_fs}}}};
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCode::io_error, "cannot write " + path.string());
  out << text;
  require(out.good(), ErrorCode::io_error, "short write to " + path.string());
}

std::string comparison_table(const std::vector<VariantResult>& variants) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-12s %7s  %-16s %-16s %-16s %-16s\n", "variant", "fs",
                "dSI-SDR", "dSI-SIR", "SI-SAR", "input SI-SDR");
  out << line;
  for (const VariantResult& v : variants) {
    auto cell = [](const ColumnStats& s) {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%6.2f +- %5.2f", s.mean, s.stddev);
      return std::string(buf);
    };
    std::snprintf(line, sizeof line, "%-12s %7d  %-16s %-16s %-16s %-16s\n", v.name.c_str(),
                  v.fs_hz, cell(v.report.delta_sdr).c_str(), cell(v.report.delta_sir).c_str(),
                  cell(v.report.processed_sar).c_str(),
                  cell(v.report.unprocessed_sdr).c_str());
    out << line;
  }
  return out.str();
}

}  // namespace

void ExperimentConfig::validate() const {
  require(train_items > 0 && val_items > 0 && test_items > 0, ErrorCode::invalid_argument,
          "corpus item counts must be positive");
  require(duration_s > 0, ErrorCode::invalid_argument, "duration_s must be positive");
  require(hidden_blocks > 0 && hidden_filters > 0, ErrorCode::invalid_argument,
          "model size must be positive");
  require(alpha > 0, ErrorCode::invalid_argument, "alpha must be positive");
  require(patience >= 0 && max_epochs > 0, ErrorCode::invalid_argument,
          "training settings must be non-negative (max_epochs positive)");
  require(train_fs > 0 && transfer_fs > 0 && alt_transfer_fs > 0, ErrorCode::invalid_argument,
          "sampling frequencies must be positive");
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::io_error, "cannot open config " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    raise(ErrorCode::parse_error, std::string("config: ") + e.what());
  }
  require(doc.is_object(), ErrorCode::parse_error, "config root must be an object");
  reject_unknown_keys(doc, {"seed", "corpus", "model", "train", "rates"}, "config");

  ExperimentConfig config;
  read_field(doc, "seed", config.seed);
  if (doc.contains("corpus")) {
    const json& c = doc.at("corpus");
    reject_unknown_keys(c, {"train_items", "val_items", "test_items", "duration_s", "mix_snr_db"},
                        "corpus");
    read_field(c, "train_items", config.train_items);
    read_field(c, "val_items", config.val_items);
    read_field(c, "test_items", config.test_items);
    read_field(c, "duration_s", config.duration_s);
    read_field(c, "mix_snr_db", config.mix_snr_db);
  }
  if (doc.contains("model")) {
    const json& m = doc.at("model");
    reject_unknown_keys(
        m, {"hidden_blocks", "hidden_filters", "channel_mode", "alpha", "frame_duration"},
        "model");
    read_field(m, "hidden_blocks", config.hidden_blocks);
    read_field(m, "hidden_filters", config.hidden_filters);
    if (m.contains("channel_mode"))
      config.channel_mode = channel_mode_from_string(m.at("channel_mode").get<std::string>());
    read_field(m, "alpha", config.alpha);
    if (m.contains("frame_duration")) {
      const json& f = m.at("frame_duration");
      require(f.is_array() && f.size() == 2, ErrorCode::parse_error,
              "frame_duration must be [numerator, denominator]");
      config.frame_duration = Rational(f.at(0).get<std::int64_t>(), f.at(1).get<std::int64_t>());
    }
  }
  if (doc.contains("train")) {
    const json& t = doc.at("train");
    reject_unknown_keys(t, {"patience", "max_epochs"}, "train");
    read_field(t, "patience", config.patience);
    read_field(t, "max_epochs", config.max_epochs);
  }
  if (doc.contains("rates")) {
    const json& r = doc.at("rates");
    reject_unknown_keys(r, {"train_fs", "transfer_fs", "alt_transfer_fs"}, "rates");
    read_field(r, "train_fs", config.train_fs);
    read_field(r, "transfer_fs", config.transfer_fs);
    read_field(r, "alt_transfer_fs", config.alt_transfer_fs);
  }
  config.validate();
  return config;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const std::string& out_dir,
                                int jobs) {
  config.validate();
  require(jobs >= 1, ErrorCode::invalid_argument, "jobs must be at least 1");
  const auto t0 = std::chrono::steady_clock::now();

  namespace fs = std::filesystem;
  const fs::path out(out_dir);
  std::error_code ec;
  fs::create_directories(out / "models", ec);
  require(!ec, ErrorCode::io_error, "cannot create " + (out / "models").string());

  CoreConfig core;
  core.num_hidden_blocks = config.hidden_blocks;
  core.hidden_filters = config.hidden_filters;
  core.in_channels = 2 * channel_count(config.channel_mode);
  core.mask_channels = 2 * channel_count(config.channel_mode);

  TrainOptions train_options;
  train_options.patience = config.patience;
  train_options.max_epochs = config.max_epochs;
  train_options.seed = config.seed;

  ExperimentResult result;
  const std::string low_tag = rate_tag(config.train_fs);
  const std::string high_tag = rate_tag(config.transfer_fs);
  const std::string alt_tag = rate_tag(config.alt_transfer_fs);

  auto add_variant = [&](const std::string& name, const SeparationModel& model,
                         const std::vector<SynthExample>& test) {
    VariantResult v;
    v.name = name;
    v.fs_hz = model.fs_hz;
    v.model_path = (out / "models" / (name + ".sfis")).string();
    save_model(model, v.model_path);
    v.report = evaluate_model(model, test, jobs);
    result.variants.push_back(std::move(v));
  };

  // source model at the low rate
  SeparationModel model_low;
  {
    const auto train8 =
        generate_corpus(corpus_spec(config, config.train_fs, kTrainRole), config.train_items,
                        "train", jobs);
    const auto val8 = generate_corpus(corpus_spec(config, config.train_fs, kValRole),
                                      config.val_items, "val", jobs);
    const SeparationModel init = build_model(config.frame_duration, config.train_fs,
                                             config.channel_mode, core, config.seed, config.alpha);
    auto [trained, report] =
        train(init, examples_of(train8), examples_of(val8), train_options);
    model_low = std::move(trained);
    result.low_rate_timing = timing_of(report);
    const auto test8 = generate_corpus(corpus_spec(config, config.train_fs, kTestRole),
                                       config.test_items, "test", jobs);
    add_variant("cnn_" + low_tag + "k", model_low, test8);
  }

  // transferred twins; whitening comes from the training mixtures rendered at
  // the target rate
  const auto test_high = generate_corpus(corpus_spec(config, config.transfer_fs, kTestRole),
                                         config.test_items, "test", jobs);
  {
    const auto stats = mixtures_of(generate_corpus(
        corpus_spec(config, config.transfer_fs, kTrainRole), config.train_items, "train", jobs));
    add_variant("cnn_" + low_tag + "to" + high_tag, transfer(model_low, config.transfer_fs, stats),
                test_high);
  }
  {
    const auto stats = mixtures_of(
        generate_corpus(corpus_spec(config, config.alt_transfer_fs, kTrainRole),
                        config.train_items, "train", jobs));
    const auto test_alt = generate_corpus(corpus_spec(config, config.alt_transfer_fs, kTestRole),
                                          config.test_items, "test", jobs);
    add_variant("cnn_" + low_tag + "to" + alt_tag,
                transfer(model_low, config.alt_transfer_fs, stats), test_alt);
  }

  // native twin at the high rate, same initialization seed
  {
    const auto train_hi =
        generate_corpus(corpus_spec(config, config.transfer_fs, kTrainRole), config.train_items,
                        "train", jobs);
    const auto val_hi = generate_corpus(corpus_spec(config, config.transfer_fs, kValRole),
                                        config.val_items, "val", jobs);
    const SeparationModel init = build_model(config.frame_duration, config.transfer_fs,
                                             config.channel_mode, core, config.seed, config.alpha);
    auto [trained, report] =
        train(init, examples_of(train_hi), examples_of(val_hi), train_options);
    result.high_rate_timing = timing_of(report);
    add_variant("cnn_" + high_tag + "k", trained, test_high);
  }

  result.total_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  // deterministic report
  json report_doc;
  report_doc["config"] = config_json(config);
  for (const VariantResult& v : result.variants) {
    report_doc["variants"][v.name] = {
        {"fs_hz", v.fs_hz},
        {"model_file", fs::path(v.model_path).lexically_relative(out).generic_string()},
        {"report", json::parse(report_json(v.report))}};
  }
  write_text_file(out / "report.json", report_doc.dump(2) + "\n");
  write_text_file(out / "report.txt", comparison_table(result.variants));

  // wall times vary run to run, so they stay out of report.json
  json timing_doc;
  auto timing_json = [](const TrainTiming& t) {
    return json{{"epochs", t.epochs},
                {"mean_epoch_ms", t.mean_epoch_ms},
                {"epoch_ms", t.epoch_ms}};
  };
  timing_doc["train_" + low_tag + "k"] = timing_json(result.low_rate_timing);
  timing_doc["train_" + high_tag + "k"] = timing_json(result.high_rate_timing);
  if (result.low_rate_timing.mean_epoch_ms > 0)
    timing_doc["epoch_speedup_low_over_high"] =
        result.high_rate_timing.mean_epoch_ms / result.low_rate_timing.mean_epoch_ms;
  timing_doc["total_s"] = result.total_s;
  write_text_file(out / "timing.json", timing_doc.dump(2) + "\n");

  return result;
}

}  // namespace sfisep
