#pragma once

#include <string>
#include <utility>
#include <vector>

#include "sfisep/audio.hpp"
#include "sfisep/augment.hpp"
#include "sfisep/core_network.hpp"
#include "sfisep/features.hpp"
#include "sfisep/filterbank.hpp"
#include "sfisep/rational.hpp"

namespace sfisep {

enum class ChannelMode { mono, stereo };

int channel_count(ChannelMode mode);
std::string to_string(ChannelMode mode);
ChannelMode channel_mode_from_string(const std::string& name);

// A trained (or trainable) separator. The frame duration is kept in physical
// units as an exact rational so the model can be re-instantiated at any
// sampling frequency; the core parameters are what transfers.
struct SeparationModel {
  Rational frame_duration;  // seconds
  int fs_hz = 48000;
  double alpha = 1.0;       // feature compression constant
  ChannelMode channel_mode = ChannelMode::mono;
  CoreConfig core_config;
  CoreParams<float> params;
  WhiteningStats whitening;  // identity until estimated

  FrameGeometry geometry() const;
};

// Parameters are seeded; whitening starts as the identity and is estimated
// separately (train does it when still unset; transfer re-estimates).
SeparationModel build_model(const Rational& frame_duration, int fs_hz, ChannelMode mode,
                            const CoreConfig& core_config, std::uint64_t seed, double alpha = 1.0);

// Returns (foreground estimate, background = mixture - foreground). The input
// must already be at the model rate; there is no implicit resampling.
std::pair<AudioBuffer, AudioBuffer> separate(const SeparationModel& model,
                                             const AudioBuffer& mixture);

// New geometry and whitening at target_fs, core parameters copied bit-exact.
SeparationModel transfer(const SeparationModel& model, int target_fs,
                         const std::vector<AudioBuffer>& stats_corpus);

// Stop once the validation loss has not strictly improved for `patience`
// consecutive epochs. Epochs are counted from 1.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience);

  // Feed one epoch's validation loss; true means stop after this epoch.
  bool observe(double val_loss);

  int best_epoch() const { return best_epoch_; }
  double best_loss() const { return best_loss_; }

 private:
  int patience_;
  int epoch_ = 0;
  int best_epoch_ = 0;
  double best_loss_ = 0;
};

struct TrainOptions {
  AugmentConfig augment;
  int patience = 10;
  int max_epochs = 200;  // safety cap; patience is expected to fire first
  std::uint64_t seed = 0;
};

struct TrainReport {
  std::vector<double> train_loss;     // per epoch, mean per-item MAE
  std::vector<double> val_loss;       // per epoch, unaugmented
  std::vector<double> epoch_wall_ms;  // training pass only; keep out of deterministic artifacts
  int best_epoch = 0;                 // 1-based
  std::string stop_reason;            // "patience" or "max-epochs"
};

// One optimizer step per example, full length, order reshuffled and
// augmentation redrawn every epoch. Returns the model with the
// best-validation parameters restored.
std::pair<SeparationModel, TrainReport> train(const SeparationModel& init,
                                              const std::vector<Example>& train_corpus,
                                              const std::vector<Example>& val_corpus,
                                              const TrainOptions& options);

// Encoder -> features -> core -> mask -> decoder for one geometry, with the
// reverse path. A workspace instance serves one training stream.
template <class T>
class SeparationGraph {
 public:
  SeparationGraph(const FrameGeometry& geom, const CoreConfig& config);

  // Foreground estimate with the mixture's length.
  Signal<T> estimate(const Signal<T>& mixture, const CoreParams<T>& params,
                     const WhiteningStats& whitening, double alpha);

  // MAE between the foreground estimate and the reference; accumulates the
  // parameter gradient into grad (sized param_count).
  double loss_and_grad(const Signal<T>& mixture, const Signal<T>& reference,
                       const CoreParams<T>& params, const WhiteningStats& whitening, double alpha,
                       std::vector<T>& grad);

  const FrameGeometry& geometry() const { return geom_; }

 private:
  Signal<T> forward(const Signal<T>& mixture, const CoreParams<T>& params,
                    const WhiteningStats& whitening, double alpha);

  FrameGeometry geom_;
  FilterBank<T> bank_;
  CoreGraph<T> core_;
  Spectrogram<T> spec_;  // saved by forward for the mask adjoint
};

}  // namespace sfisep
