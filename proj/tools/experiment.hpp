#pragma once

#include <string>
#include <vector>

#include "sfisep/metrics.hpp"
#include "sfisep/pipeline.hpp"
#include "sfisep/synth.hpp"

namespace sfisep {

// One JSON document drives a full train / transfer / evaluate comparison:
// a model is trained at a low rate, its parameters are transferred to two
// higher rates, a twin is trained natively at the main high rate from the
// same initialization seed, and all four variants are scored on matched test
// sets. Two runs from the same config produce byte-identical reports; wall
// times go to a separate file.
struct ExperimentConfig {
  std::uint64_t seed = 7;

  // corpus (item seeds derive from `seed`, so every rate renders the same
  // underlying signals)
  int train_items = 64;
  int val_items = 8;
  int test_items = 16;
  double duration_s = 4.0;
  double mix_snr_db = 0.0;  // corpus channel count follows channel_mode

  // model
  int hidden_blocks = 6;
  int hidden_filters = 16;
  ChannelMode channel_mode = ChannelMode::mono;
  double alpha = 1.0;
  Rational frame_duration{2048, 48000};

  // training
  int patience = 10;
  int max_epochs = 60;

  // rates
  int train_fs = 8000;
  int transfer_fs = 48000;
  int alt_transfer_fs = 44100;

  void validate() const;
};

ExperimentConfig load_experiment_config(const std::string& path);

struct VariantResult {
  std::string name;   // "cnn_8k", "cnn_8to48", "cnn_8to44_1", "cnn_48k"
  int fs_hz = 0;
  std::string model_path;
  MetricReport report;
};

struct TrainTiming {
  int epochs = 0;
  double mean_epoch_ms = 0;
  std::vector<double> epoch_ms;
};

struct ExperimentResult {
  std::vector<VariantResult> variants;
  TrainTiming low_rate_timing;   // training at train_fs
  TrainTiming high_rate_timing;  // native twin at transfer_fs
  double total_s = 0;
};

// Runs the full comparison and writes into out_dir:
//   models/<variant>.sfis    one model file per variant
//   report.json              config echo + per-variant metric reports
//   report.txt               aligned comparison table
//   timing.json              per-epoch wall times and the rate speed ratio
ExperimentResult run_experiment(const ExperimentConfig& config, const std::string& out_dir,
                                int jobs = 1);

}  // namespace sfisep
