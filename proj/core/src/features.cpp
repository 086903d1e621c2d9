#include "sfisep/features.hpp"

#include <cmath>

namespace sfisep {

namespace {

// ln(alpha + m) / m with the continuous-limit value 1 at m == 0.
// log1p keeps precision for alpha == 1 where the quotient approaches 1.
template <class T>
T compression_quotient(T magnitude, double alpha) {
  if (magnitude == T{0}) return T{1};
  if (alpha == 1.0) return std::log1p(magnitude) / magnitude;
  return static_cast<T>(std::log(alpha + static_cast<double>(magnitude))) / magnitude;
}

}  // namespace

template <class T>
void compress_inplace(Spectrogram<T>& spec, double alpha) {
  require(alpha > 0, ErrorCode::invalid_argument, "compression alpha must be positive");
  const std::size_t plane = spec.coeffs.plane_size();
  for (int a = 0; a < spec.audio_channels; ++a) {
    T* re = spec.coeffs.plane(2 * a);
    T* im = spec.coeffs.plane(2 * a + 1);
    for (std::size_t i = 0; i < plane; ++i) {
      const T m = std::sqrt(re[i] * re[i] + im[i] * im[i]);
      const T q = compression_quotient(m, alpha);
      re[i] *= q;
      im[i] *= q;
    }
  }
}

template <class T>
Spectrogram<T> compress(const Spectrogram<T>& spec, double alpha) {
  Spectrogram<T> out = spec;
  compress_inplace(out, alpha);
  return out;
}

template <class T>
Tensor3<T> stack_channels(const Spectrogram<T>& spec) {
  require(spec.coeffs.channels == 2 * spec.audio_channels, ErrorCode::shape_error,
          "spectrogram channel planes inconsistent");
  return spec.coeffs;
}

template <class T>
Spectrogram<T> unstack_channels(const Tensor3<T>& features, const FrameGeometry& geom,
                                std::int64_t source_len) {
  require(features.channels > 0 && features.channels % 2 == 0, ErrorCode::shape_error,
          "feature channel count must be an even, positive number");
  require(features.bins == geom.num_bins, ErrorCode::shape_error,
          "feature bins do not match geometry");
  Spectrogram<T> spec;
  spec.geom = geom;
  spec.source_len = source_len;
  spec.audio_channels = features.channels / 2;
  spec.coeffs = features;
  return spec;
}

WhiteningStats WhiteningStats::identity(int fs_hz, int num_bins) {
  WhiteningStats stats;
  stats.fs_hz = fs_hz;
  stats.num_bins = num_bins;
  stats.sample_count = 0;
  stats.mean.assign(num_bins, 0.0);
  stats.stddev.assign(num_bins, 1.0);
  return stats;
}

WhiteningStats estimate_whitening(std::span<const AudioBuffer> mixtures,
                                  const FrameGeometry& geom, double alpha) {
  require(!mixtures.empty(), ErrorCode::invalid_argument,
          "whitening estimation needs at least one mixture");
  const int K = geom.num_bins;
  std::vector<double> mean(K, 0.0), m2(K, 0.0);
  std::vector<std::uint64_t> count(K, 0);

  const FilterBank<double> bank(geom);
  for (const AudioBuffer& mixture : mixtures) {
    require(mixture.fs_hz == geom.fs_hz, ErrorCode::invalid_argument,
            "mixture rate does not match geometry");
    Spectrogram<double> spec = analyze(mixture, bank);
    compress_inplace(spec, alpha);
    // Welford update per bin, pooled over frames and feature channels.
    for (int c = 0; c < spec.coeffs.channels; ++c) {
      for (int t = 0; t < spec.coeffs.frames; ++t) {
        const double* row = spec.coeffs.row(c, t);
        for (int f = 0; f < K; ++f) {
          const double x = row[f];
          const std::uint64_t n = ++count[f];
          const double delta = x - mean[f];
          mean[f] += delta / static_cast<double>(n);
          m2[f] += delta * (x - mean[f]);
        }
      }
    }
  }

  WhiteningStats stats;
  stats.fs_hz = geom.fs_hz;
  stats.num_bins = K;
  stats.sample_count = count[0];
  stats.mean = std::move(mean);
  stats.stddev.resize(K);
  constexpr double kStdFloor = 1e-8;
  for (int f = 0; f < K; ++f) {
    const double variance = count[f] > 0 ? m2[f] / static_cast<double>(count[f]) : 0.0;
    stats.stddev[f] = std::max(std::sqrt(variance), kStdFloor);
  }
  return stats;
}

template <class T>
void apply_whitening_inplace(Tensor3<T>& features, const WhiteningStats& stats) {
  require(features.bins == stats.num_bins, ErrorCode::shape_error,
          "whitening stats sized for a different bin count");
  std::vector<T> mean(stats.num_bins), inv_std(stats.num_bins);
  for (int f = 0; f < stats.num_bins; ++f) {
    mean[f] = static_cast<T>(stats.mean[f]);
    inv_std[f] = static_cast<T>(1.0 / stats.stddev[f]);
  }
  for (int c = 0; c < features.channels; ++c) {
    for (int t = 0; t < features.frames; ++t) {
      T* row = features.row(c, t);
      for (int f = 0; f < features.bins; ++f) row[f] = (row[f] - mean[f]) * inv_std[f];
    }
  }
}

template <class T>
Tensor3<T> apply_whitening(const Tensor3<T>& features, const WhiteningStats& stats) {
  Tensor3<T> out = features;
  apply_whitening_inplace(out, stats);
  return out;
}

template <class T>
Spectrogram<T> apply_mask(const Spectrogram<T>& spec, const Tensor3<T>& mask) {
  require(mask.channels == spec.coeffs.channels && mask.frames == spec.coeffs.frames &&
              mask.bins == spec.coeffs.bins,
          ErrorCode::shape_error, "mask shape does not match spectrogram");
  Spectrogram<T> out = spec;
  const std::size_t plane = spec.coeffs.plane_size();
  for (int a = 0; a < spec.audio_channels; ++a) {
    const T* sre = spec.coeffs.plane(2 * a);
    const T* sim = spec.coeffs.plane(2 * a + 1);
    const T* mre = mask.plane(2 * a);
    const T* mim = mask.plane(2 * a + 1);
    T* ore = out.coeffs.plane(2 * a);
    T* oim = out.coeffs.plane(2 * a + 1);
    for (std::size_t i = 0; i < plane; ++i) {
      const T re = mre[i] * sre[i] - mim[i] * sim[i];
      const T im = mre[i] * sim[i] + mim[i] * sre[i];
      ore[i] = re;
      oim[i] = im;
    }
  }
  return out;
}

template <class T>
Tensor3<T> mask_gradient(const Spectrogram<T>& spec, const Spectrogram<T>& grad_masked) {
  require(grad_masked.coeffs.same_shape(spec.coeffs), ErrorCode::shape_error,
          "masked gradient shape does not match spectrogram");
  Tensor3<T> grad(spec.coeffs.channels, spec.coeffs.frames, spec.coeffs.bins);
  const std::size_t plane = spec.coeffs.plane_size();
  for (int a = 0; a < spec.audio_channels; ++a) {
    const T* sre = spec.coeffs.plane(2 * a);
    const T* sim = spec.coeffs.plane(2 * a + 1);
    const T* gre = grad_masked.coeffs.plane(2 * a);
    const T* gim = grad_masked.coeffs.plane(2 * a + 1);
    T* mre = grad.plane(2 * a);
    T* mim = grad.plane(2 * a + 1);
    for (std::size_t i = 0; i < plane; ++i) {
      mre[i] = gre[i] * sre[i] + gim[i] * sim[i];
      mim[i] = gim[i] * sre[i] - gre[i] * sim[i];
    }
  }
  return grad;
}

template void compress_inplace(Spectrogram<float>&, double);
template void compress_inplace(Spectrogram<double>&, double);
template Spectrogram<float> compress(const Spectrogram<float>&, double);
template Spectrogram<double> compress(const Spectrogram<double>&, double);
template Tensor3<float> stack_channels(const Spectrogram<float>&);
template Tensor3<double> stack_channels(const Spectrogram<double>&);
template Spectrogram<float> unstack_channels(const Tensor3<float>&, const FrameGeometry&,
                                             std::int64_t);
template Spectrogram<double> unstack_channels(const Tensor3<double>&, const FrameGeometry&,
                                              std::int64_t);
template void apply_whitening_inplace(Tensor3<float>&, const WhiteningStats&);
template void apply_whitening_inplace(Tensor3<double>&, const WhiteningStats&);
template Tensor3<float> apply_whitening(const Tensor3<float>&, const WhiteningStats&);
template Tensor3<double> apply_whitening(const Tensor3<double>&, const WhiteningStats&);
template Spectrogram<float> apply_mask(const Spectrogram<float>&, const Tensor3<float>&);
template Spectrogram<double> apply_mask(const Spectrogram<double>&, const Tensor3<double>&);
template Tensor3<float> mask_gradient(const Spectrogram<float>&, const Spectrogram<float>&);
template Tensor3<double> mask_gradient(const Spectrogram<double>&, const Spectrogram<double>&);

}  // namespace sfisep
