#include "sfisep/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "sfisep/errors.hpp"
#include "sfisep/rng.hpp"

namespace sfisep {

namespace {

template <class T>
Signal<T> to_signal(const AudioBuffer& x) {
  Signal<T> out(x.channels.size());
  for (std::size_t c = 0; c < x.channels.size(); ++c)
    out[c].assign(x.channels[c].begin(), x.channels[c].end());
  return out;
}

void check_example(const Example& ex, const SeparationModel& model, const char* role) {
  require(ex.mixture.fs_hz == model.fs_hz, ErrorCode::invalid_argument,
          std::string(role) + " example '" + ex.name + "' is not at the model rate");
  require(static_cast<int>(ex.mixture.channel_count()) == channel_count(model.channel_mode),
          ErrorCode::invalid_argument,
          std::string(role) + " example '" + ex.name + "' channel count mismatch");
  require(ex.foreground.channel_count() == ex.mixture.channel_count() &&
              ex.foreground.sample_count() == ex.mixture.sample_count(),
          ErrorCode::invalid_argument,
          std::string(role) + " example '" + ex.name + "' stems are inconsistent");
}

}  // namespace

int channel_count(ChannelMode mode) { return mode == ChannelMode::stereo ? 2 : 1; }

std::string to_string(ChannelMode mode) {
  return mode == ChannelMode::stereo ? "stereo" : "mono";
}

ChannelMode channel_mode_from_string(const std::string& name) {
  if (name == "mono") return ChannelMode::mono;
  if (name == "stereo") return ChannelMode::stereo;
  raise(ErrorCode::parse_error, "unknown channel mode: " + name);
}

FrameGeometry SeparationModel::geometry() const { return frame_geometry(frame_duration, fs_hz); }

SeparationModel build_model(const Rational& frame_duration, int fs_hz, ChannelMode mode,
                            const CoreConfig& core_config, std::uint64_t seed, double alpha) {
  validate(core_config);
  const int expected = 2 * channel_count(mode);
  require(core_config.in_channels == expected && core_config.mask_channels == expected,
          ErrorCode::invalid_argument,
          "core input and mask channels must both be twice the audio channel count");
  require(alpha > 0, ErrorCode::invalid_argument, "compression alpha must be positive");

  SeparationModel model;
  model.frame_duration = frame_duration;
  model.fs_hz = fs_hz;
  model.alpha = alpha;
  model.channel_mode = mode;
  model.core_config = core_config;
  const FrameGeometry geom = model.geometry();  // validates the geometry
  model.params = init_core_params<float>(core_config, seed);
  model.whitening = WhiteningStats::identity(fs_hz, geom.num_bins);
  return model;
}

std::pair<AudioBuffer, AudioBuffer> separate(const SeparationModel& model,
                                             const AudioBuffer& mixture) {
  mixture.check_rectangular();
  require(mixture.fs_hz == model.fs_hz, ErrorCode::invalid_argument,
          "mixture rate differs from the model rate (no implicit resampling)");
  require(static_cast<int>(mixture.channel_count()) == channel_count(model.channel_mode),
          ErrorCode::invalid_argument, "mixture channel count does not match the model");

  SeparationGraph<float> graph(model.geometry(), model.core_config);
  const Signal<float> est =
      graph.estimate(to_signal<float>(mixture), model.params, model.whitening, model.alpha);

  AudioBuffer fg, bg;
  fg.fs_hz = bg.fs_hz = model.fs_hz;
  fg.channels.resize(est.size());
  bg.channels.resize(est.size());
  for (std::size_t c = 0; c < est.size(); ++c) {
    const std::size_t len = est[c].size();
    fg.channels[c].resize(len);
    bg.channels[c].resize(len);
    for (std::size_t i = 0; i < len; ++i) {
      fg.channels[c][i] = est[c][i];
      bg.channels[c][i] = mixture.channels[c][i] - fg.channels[c][i];
    }
  }
  return {std::move(fg), std::move(bg)};
}

SeparationModel transfer(const SeparationModel& model, int target_fs,
                         const std::vector<AudioBuffer>& stats_corpus) {
  require(!stats_corpus.empty(), ErrorCode::invalid_argument,
          "transfer needs mixtures at the target rate for whitening");
  for (const AudioBuffer& x : stats_corpus) {
    require(x.fs_hz == target_fs, ErrorCode::invalid_argument,
            "whitening mixture is not at the target rate");
    require(static_cast<int>(x.channel_count()) == channel_count(model.channel_mode),
            ErrorCode::invalid_argument, "whitening mixture channel count mismatch");
  }
  SeparationModel out = model;
  out.fs_hz = target_fs;
  const FrameGeometry geom = out.geometry();  // may raise geometry-too-small
  out.whitening = estimate_whitening(std::span<const AudioBuffer>(stats_corpus), geom, out.alpha);
  return out;
}

EarlyStopping::EarlyStopping(int patience) : patience_(patience) {
  require(patience >= 1, ErrorCode::invalid_argument, "patience must be at least 1");
}

bool EarlyStopping::observe(double val_loss) {
  ++epoch_;
  if (epoch_ == 1 || val_loss < best_loss_) {
    best_loss_ = val_loss;
    best_epoch_ = epoch_;
  }
  return epoch_ - best_epoch_ >= patience_;
}

std::pair<SeparationModel, TrainReport> train(const SeparationModel& init,
                                              const std::vector<Example>& train_corpus,
                                              const std::vector<Example>& val_corpus,
                                              const TrainOptions& options) {
  require(!train_corpus.empty() && !val_corpus.empty(), ErrorCode::invalid_argument,
          "training and validation corpora must be non-empty");
  require(options.max_epochs >= 1, ErrorCode::invalid_argument, "max_epochs must be positive");
  for (const Example& ex : train_corpus) check_example(ex, init, "training");
  for (const Example& ex : val_corpus) check_example(ex, init, "validation");

  SeparationModel model = init;
  const FrameGeometry geom = model.geometry();
  if (model.whitening.sample_count == 0) {
    std::vector<AudioBuffer> mixtures;
    mixtures.reserve(train_corpus.size());
    for (const Example& ex : train_corpus) mixtures.push_back(ex.mixture);
    model.whitening =
        estimate_whitening(std::span<const AudioBuffer>(mixtures), geom, model.alpha);
  }

  SeparationGraph<float> graph(geom, model.core_config);
  AdadeltaState<float> opt(model.params.flat.size());
  std::vector<float> grad(model.params.flat.size());
  Rng rng(options.seed);
  EarlyStopping stopper(options.patience);
  std::vector<float> best_params = model.params.flat;

  std::vector<Signal<float>> val_mix(val_corpus.size()), val_ref(val_corpus.size());
  for (std::size_t i = 0; i < val_corpus.size(); ++i) {
    val_mix[i] = to_signal<float>(val_corpus[i].mixture);
    val_ref[i] = to_signal<float>(val_corpus[i].foreground);
  }

  TrainReport report;
  std::vector<std::size_t> order(train_corpus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 1; epoch <= options.max_epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    rng.shuffle(order);
    double train_sum = 0;
    for (std::size_t idx : order) {
      const Example item = augment(train_corpus[idx], options.augment, rng);
      std::fill(grad.begin(), grad.end(), 0.0f);
      const double loss =
          graph.loss_and_grad(to_signal<float>(item.mixture), to_signal<float>(item.foreground),
                              model.params, model.whitening, model.alpha, grad);
      require(std::isfinite(loss), ErrorCode::training_diverged,
              "non-finite loss at epoch " + std::to_string(epoch) + ", item '" +
                  train_corpus[idx].name + "'");
      adadelta_step(model.params.flat, grad, opt);
      train_sum += loss;
    }
    const auto t1 = std::chrono::steady_clock::now();

    double val_sum = 0;
    for (std::size_t i = 0; i < val_corpus.size(); ++i) {
      const double loss = mae_loss(
          graph.estimate(val_mix[i], model.params, model.whitening, model.alpha), val_ref[i]);
      require(std::isfinite(loss), ErrorCode::training_diverged,
              "non-finite validation loss at epoch " + std::to_string(epoch) + ", item '" +
                  val_corpus[i].name + "'");
      val_sum += loss;
    }
    const double val_loss = val_sum / static_cast<double>(val_corpus.size());

    report.train_loss.push_back(train_sum / static_cast<double>(train_corpus.size()));
    report.val_loss.push_back(val_loss);
    report.epoch_wall_ms.push_back(
        std::chrono::duration<double, std::milli>(t1 - t0).count());

    const bool stop = stopper.observe(val_loss);
    if (stopper.best_epoch() == epoch) best_params = model.params.flat;
    if (stop) {
      report.stop_reason = "patience";
      break;
    }
    if (epoch == options.max_epochs) report.stop_reason = "max-epochs";
  }

  report.best_epoch = stopper.best_epoch();
  model.params.flat = best_params;
  return {std::move(model), std::move(report)};
}

template <class T>
SeparationGraph<T>::SeparationGraph(const FrameGeometry& geom, const CoreConfig& config)
    : geom_(geom), bank_(geom) {
  validate(config);
}

template <class T>
Signal<T> SeparationGraph<T>::forward(const Signal<T>& mixture, const CoreParams<T>& params,
                                      const WhiteningStats& whitening, double alpha) {
  spec_ = analyze_signal(mixture, bank_);
  Tensor3<T> feats = stack_channels(compress(spec_, alpha));
  apply_whitening_inplace(feats, whitening);
  const Tensor3<T>& masks = core_.forward(feats, params);
  return synthesize_signal(apply_mask(spec_, masks), bank_);
}

template <class T>
Signal<T> SeparationGraph<T>::estimate(const Signal<T>& mixture, const CoreParams<T>& params,
                                       const WhiteningStats& whitening, double alpha) {
  return forward(mixture, params, whitening, alpha);
}

template <class T>
double SeparationGraph<T>::loss_and_grad(const Signal<T>& mixture, const Signal<T>& reference,
                                         const CoreParams<T>& params,
                                         const WhiteningStats& whitening, double alpha,
                                         std::vector<T>& grad) {
  const Signal<T> est = forward(mixture, params, whitening, alpha);
  const double loss = mae_loss(est, reference);
  if (!std::isfinite(loss)) return loss;  // caller decides how to report divergence
  const Signal<T> grad_sig = mae_gradient(est, reference);
  const Spectrogram<T> grad_spec = synthesis_adjoint(grad_sig, spec_.source_len, bank_);
  const Tensor3<T> grad_mask = mask_gradient(spec_, grad_spec);
  core_.backward(grad_mask, params, grad);
  return loss;
}

template class SeparationGraph<float>;
template class SeparationGraph<double>;

}  // namespace sfisep
