#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include "experiment.hpp"
#include "sfisep/corpus.hpp"
#include "sfisep/errors.hpp"
#include "sfisep/metrics.hpp"
#include "sfisep/model_io.hpp"
#include "sfisep/pipeline.hpp"
#include "sfisep/resample.hpp"
#include "sfisep/wav.hpp"

namespace {

using namespace sfisep;
using nlohmann::json;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::training_diverged:
    case ErrorCode::undefined_metric:
      return 4;  // numerical failure
    default:
      return 3;  // data/format failure
  }
}

std::string strip_code_prefix(const Error& e) {
  const std::string what = e.what();
  const std::string prefix = std::string(code_word(e.code())) + ": ";
  return what.rfind(prefix, 0) == 0 ? what.substr(prefix.size()) : what;
}

std::string with_thousands(std::int64_t value) {
  std::string digits = std::to_string(value);
  std::string out;
  int count = 0;
  for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
    if (count > 0 && count % 3 == 0) out.push_back(',');
    out.push_back(*it);
    ++count;
  }
  return {out.rbegin(), out.rend()};
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCode::io_error, "cannot write " + path);
  out << text;
  require(out.good(), ErrorCode::io_error, "short write to " + path);
}

ChannelMode mode_for(const std::string& flag, int corpus_channels) {
  if (flag == "auto")
    return corpus_channels == 2 ? ChannelMode::stereo : ChannelMode::mono;
  return channel_mode_from_string(flag);
}

struct SynthDataArgs {
  std::string out;
  int count = 16;
  int fs = 48000;
  std::uint64_t seed = 0;
  double duration_s = 4.0;
  int channels = 1;
  double snr_db = 0.0;
  int jobs = 1;
};

void run_synth_data(const SynthDataArgs& a) {
  SynthSpec spec;
  spec.seed = a.seed;
  spec.duration_s = a.duration_s;
  spec.fs_hz = a.fs;
  spec.channels = a.channels;
  spec.mix_snr_db = a.snr_db;
  const auto items = generate_corpus(spec, a.count, "item", a.jobs);
  save_corpus(a.out, items);
  std::cerr << "wrote " << items.size() << " items at " << a.fs << " Hz to " << a.out << "\n";
}

struct TrainArgs {
  std::string corpus_dir;
  std::string val_dir;
  std::string out;
  std::string report_path;
  std::string channel_mode = "auto";
  int blocks = 6;
  int filters = 16;
  double alpha = 1.0;
  std::int64_t frame_num = 2048;
  std::int64_t frame_den = 48000;
  int patience = 10;
  int max_epochs = 60;
  std::uint64_t seed = 0;
};

void run_train(const TrainArgs& a) {
  const auto train_set = examples_of(load_corpus(a.corpus_dir));
  const auto val_set = examples_of(load_corpus(a.val_dir));
  require(!train_set.empty(), ErrorCode::invalid_argument, "training corpus is empty");
  const int fs = train_set.front().mixture.fs_hz;
  const ChannelMode mode = mode_for(a.channel_mode, train_set.front().mixture.channel_count());

  CoreConfig core;
  core.num_hidden_blocks = a.blocks;
  core.hidden_filters = a.filters;
  core.in_channels = 2 * channel_count(mode);
  core.mask_channels = 2 * channel_count(mode);

  const SeparationModel init =
      build_model(Rational(a.frame_num, a.frame_den), fs, mode, core, a.seed, a.alpha);
  TrainOptions options;
  options.patience = a.patience;
  options.max_epochs = a.max_epochs;
  options.seed = a.seed;

  std::cerr << "training at " << fs << " Hz on " << train_set.size() << " items ("
            << param_count(core) << " parameters)\n";
  const auto [model, report] = train(init, train_set, val_set, options);
  save_model(model, a.out);
  std::cerr << "stopped after " << report.val_loss.size() << " epochs (" << report.stop_reason
            << "), best epoch " << report.best_epoch << ", wrote " << a.out << "\n";

  if (!a.report_path.empty()) {
    const json doc{{"train_loss", report.train_loss},
                   {"val_loss", report.val_loss},
                   {"best_epoch", report.best_epoch},
                   {"stop_reason", report.stop_reason}};
    write_text_file(a.report_path, doc.dump(2) + "\n");
  }
}

struct TransferArgs {
  std::string model_path;
  std::string stats_dir;
  std::string out;
  int fs = 0;
};

void run_transfer(const TransferArgs& a) {
  const SeparationModel model = load_model(a.model_path);
  const auto stats = mixtures_of(load_corpus(a.stats_dir));
  const SeparationModel moved = transfer(model, a.fs, stats);
  save_model(moved, a.out);
  std::cerr << "transferred " << model.fs_hz << " -> " << a.fs << " Hz (frame "
            << moved.geometry().frame_len << "), wrote " << a.out << "\n";
}

struct SeparateArgs {
  std::string model_path;
  std::string input;
  std::string out_dir = ".";
};

void run_separate(const SeparateArgs& a) {
  const SeparationModel model = load_model(a.model_path);
  const AudioBuffer mixture = read_wav(a.input);
  const auto [fg, bg] = separate(model, mixture);
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(a.out_dir, ec);
  require(!ec, ErrorCode::io_error, "cannot create " + a.out_dir);
  const std::string stem = fs::path(a.input).stem().string();
  const auto fg_path = (fs::path(a.out_dir) / (stem + "_foreground.wav")).string();
  const auto bg_path = (fs::path(a.out_dir) / (stem + "_background.wav")).string();
  write_wav(fg_path, fg);
  write_wav(bg_path, bg);
  std::cerr << "wrote " << fg_path << " and " << bg_path << "\n";
}

struct ResampleArgs {
  std::string input;
  std::string output;
  int fs = 0;
};

void run_resample(const ResampleArgs& a) {
  const AudioBuffer x = read_wav(a.input);
  write_wav(a.output, resample(x, a.fs));
  std::cerr << "resampled " << x.fs_hz << " -> " << a.fs << " Hz, wrote " << a.output << "\n";
}

struct EvaluateArgs {
  std::string model_path;
  std::string corpus_dir;
  std::string out_dir;
  int jobs = 1;
};

void run_evaluate(const EvaluateArgs& a) {
  const SeparationModel model = load_model(a.model_path);
  const auto corpus = load_corpus(a.corpus_dir);
  std::vector<EvalItem> items;
  items.reserve(corpus.size());
  for (const SynthExample& synth : corpus) {
    const Example& ex = synth.example;
    EvalItem item;
    item.name = ex.name;
    item.estimate = separate(model, ex.mixture).first;
    item.foreground = ex.foreground;
    item.background = ex.background;
    item.mixture = ex.mixture;
    items.push_back(std::move(item));
  }
  const MetricReport report = evaluate_items(items);
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(a.out_dir, ec);
  require(!ec, ErrorCode::io_error, "cannot create " + a.out_dir);
  write_text_file((fs::path(a.out_dir) / "report.txt").string(), report_text(report));
  write_text_file((fs::path(a.out_dir) / "report.json").string(), report_json(report));
  std::cerr << "evaluated " << report.items.size() << " items (" << report.skipped.size()
            << " skipped); delta SI-SDR " << report.delta_sdr.mean << " +- "
            << report.delta_sdr.stddev << " dB; reports in " << a.out_dir << "\n";
}

void run_inspect(const std::string& path) {
  const SeparationModel model = load_model(path);
  const FrameGeometry geom = model.geometry();
  std::cout << "frame duration: " << model.frame_duration.str() << " s\n"
            << "sampling frequency: " << model.fs_hz << " Hz\n"
            << "frame/hop/bins: " << geom.frame_len << "/" << geom.hop_len << "/" << geom.num_bins
            << "\n"
            << "bin spacing: " << geom.bin_spacing_hz << " Hz\n"
            << "channel mode: " << to_string(model.channel_mode) << "\n"
            << "compression alpha: " << model.alpha << "\n"
            << "hidden blocks x filters: " << model.core_config.num_hidden_blocks << " x "
            << model.core_config.hidden_filters << "\n"
            << "parameters: " << with_thousands(param_count(model.core_config)) << "\n"
            << "whitening sample count: " << model.whitening.sample_count << "\n";
}

struct ExperimentArgs {
  std::string config_path;
  std::string out_dir;
  int jobs = 1;
};

void run_experiment_cmd(const ExperimentArgs& a) {
  const ExperimentConfig config = load_experiment_config(a.config_path);
  std::cerr << "running experiment (seed " << config.seed << ", " << config.train_items
            << " train items, " << config.train_fs << " -> " << config.transfer_fs << "/"
            << config.alt_transfer_fs << " Hz)\n";
  const ExperimentResult result = run_experiment(config, a.out_dir, a.jobs);
  std::cerr << "finished in " << result.total_s << " s; artifacts in " << a.out_dir << "\n";
  std::ifstream table(std::filesystem::path(a.out_dir) / "report.txt");
  std::cerr << table.rdbuf();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sampling-frequency-independent dialogue separation toolkit"};
  app.require_subcommand(1);

  SynthDataArgs synth_args;
  auto* synth = app.add_subcommand("synth-data", "generate a synthetic corpus directory");
  synth->add_option("--out", synth_args.out, "output corpus directory")->required();
  synth->add_option("--count", synth_args.count, "number of items");
  synth->add_option("--fs", synth_args.fs, "sampling frequency in Hz");
  synth->add_option("--seed", synth_args.seed, "base seed");
  synth->add_option("--duration", synth_args.duration_s, "item duration in seconds");
  synth->add_option("--channels", synth_args.channels, "1 (mono) or 2 (stereo)");
  synth->add_option("--snr", synth_args.snr_db, "foreground/background SNR in dB");
  synth->add_option("--jobs", synth_args.jobs, "parallel item generation");

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "train a separation model on a corpus");
  train_cmd->add_option("--corpus", train_args.corpus_dir, "training corpus directory")
      ->required();
  train_cmd->add_option("--val", train_args.val_dir, "validation corpus directory")->required();
  train_cmd->add_option("--out", train_args.out, "output model path")->required();
  train_cmd->add_option("--report", train_args.report_path, "optional loss report JSON path");
  train_cmd->add_option("--channel-mode", train_args.channel_mode, "mono, stereo, or auto");
  train_cmd->add_option("--blocks", train_args.blocks, "hidden conv blocks");
  train_cmd->add_option("--filters", train_args.filters, "filters per hidden block");
  train_cmd->add_option("--alpha", train_args.alpha, "feature compression constant");
  train_cmd->add_option("--frame-num", train_args.frame_num, "frame duration numerator");
  train_cmd->add_option("--frame-den", train_args.frame_den, "frame duration denominator");
  train_cmd->add_option("--patience", train_args.patience, "early stopping patience");
  train_cmd->add_option("--max-epochs", train_args.max_epochs, "epoch cap");
  train_cmd->add_option("--seed", train_args.seed, "initialization and shuffle seed");

  TransferArgs transfer_args;
  auto* transfer_cmd =
      app.add_subcommand("transfer", "re-instantiate a model at a new sampling frequency");
  transfer_cmd->add_option("--model", transfer_args.model_path, "source model path")->required();
  transfer_cmd->add_option("--fs", transfer_args.fs, "target sampling frequency in Hz")
      ->required();
  transfer_cmd
      ->add_option("--stats", transfer_args.stats_dir,
                   "corpus directory whose mixtures provide whitening statistics")
      ->required();
  transfer_cmd->add_option("--out", transfer_args.out, "output model path")->required();

  SeparateArgs separate_args;
  auto* separate_cmd =
      app.add_subcommand("separate", "split a mixture WAV into foreground and background");
  separate_cmd->add_option("--model", separate_args.model_path, "model path")->required();
  separate_cmd->add_option("input", separate_args.input, "mixture WAV at the model rate")
      ->required();
  separate_cmd->add_option("--out", separate_args.out_dir, "output directory");

  ResampleArgs resample_args;
  auto* resample_cmd = app.add_subcommand("resample", "convert a WAV between sampling rates");
  resample_cmd->add_option("input", resample_args.input, "input WAV")->required();
  resample_cmd->add_option("output", resample_args.output, "output WAV")->required();
  resample_cmd->add_option("--fs", resample_args.fs, "target sampling frequency in Hz")
      ->required();

  EvaluateArgs evaluate_args;
  auto* evaluate_cmd =
      app.add_subcommand("evaluate", "score a model's separation quality on a corpus");
  evaluate_cmd->add_option("--model", evaluate_args.model_path, "model path")->required();
  evaluate_cmd->add_option("--corpus", evaluate_args.corpus_dir, "test corpus directory")
      ->required();
  evaluate_cmd->add_option("--out", evaluate_args.out_dir, "report output directory")
      ->required();
  evaluate_cmd->add_option("--jobs", evaluate_args.jobs, "parallel item evaluation");

  std::string inspect_path;
  auto* inspect_cmd = app.add_subcommand("inspect", "print a model file's header and geometry");
  inspect_cmd->add_option("model", inspect_path, "model path")->required();

  ExperimentArgs experiment_args;
  auto* experiment_cmd = app.add_subcommand(
      "experiment", "train, transfer, and evaluate the full rate-comparison matrix");
  experiment_cmd->add_option("--config", experiment_args.config_path, "experiment config JSON")
      ->required();
  experiment_cmd->add_option("--out", experiment_args.out_dir, "artifact output directory")
      ->required();
  experiment_cmd->add_option("--jobs", experiment_args.jobs, "parallel corpus/evaluation work");

  try {
    app.parse(argc, argv);
    if (*synth) run_synth_data(synth_args);
    if (*train_cmd) run_train(train_args);
    if (*transfer_cmd) run_transfer(transfer_args);
    if (*separate_cmd) run_separate(separate_args);
    if (*resample_cmd) run_resample(resample_args);
    if (*evaluate_cmd) run_evaluate(evaluate_args);
    if (*inspect_cmd) run_inspect(inspect_path);
    if (*experiment_cmd) run_experiment_cmd(experiment_args);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "error[usage]: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error[" << code_word(e.code()) << "]: " << strip_code_prefix(e) << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error[internal]: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
