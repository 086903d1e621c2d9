#include "sfisep/filterbank.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace sfisep {

namespace {

constexpr int kMinFrameLen = 4;

// Frames processed per pass over the filter tables; keeps table traffic low
// while the frame windows stay cache-resident.
constexpr int kFrameChunk = 16;

template <class T>
constexpr int kLanes = sizeof(T) == 4 ? 16 : 8;

// Fixed-order dot product with lane-partial sums; vectorizes without
// reassociating the source-level accumulation order.
template <class T>
T dot_n(const T* a, const T* b, int n) {
  constexpr int L = kLanes<T>;
  T acc[L] = {};
  int i = 0;
  for (; i + L <= n; i += L)
    for (int j = 0; j < L; ++j) acc[j] += a[i + j] * b[i + j];
  T sum = 0;
  for (int j = 0; j < L; ++j) sum += acc[j];
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

template <class T>
void axpy_n(T* out, const T* x, T a, int n) {
  for (int i = 0; i < n; ++i) out[i] += a * x[i];
}

}  // namespace

FrameGeometry frame_geometry(const Rational& frame_duration, int fs_hz) {
  require(fs_hz > 0, ErrorCode::invalid_argument, "sampling rate must be positive");
  require(frame_duration.num > 0, ErrorCode::invalid_argument, "frame duration must be positive");
  // round(num*fs/den to nearest even, ties up) == 2 * floor(num*fs/(2*den) + 1/2)
  const std::int64_t numerator = frame_duration.num * fs_hz + frame_duration.den;
  const std::int64_t frame_len = 2 * (numerator / (2 * frame_duration.den));
  FrameGeometry geom;
  geom.frame_duration = frame_duration;
  geom.fs_hz = fs_hz;
  geom.frame_len = static_cast<int>(frame_len);
  require(geom.frame_len >= kMinFrameLen, ErrorCode::geometry_too_small,
          "frame length " + std::to_string(frame_len) + " below minimum " +
              std::to_string(kMinFrameLen));
  geom.hop_len = geom.frame_len / 2;
  geom.num_bins = geom.frame_len / 2 + 1;
  geom.bin_spacing_hz = static_cast<double>(fs_hz) / geom.frame_len;
  return geom;
}

FrameGeometry frame_geometry(double frame_duration_s, int fs_hz) {
  require(fs_hz > 0, ErrorCode::invalid_argument, "sampling rate must be positive");
  require(frame_duration_s > 0, ErrorCode::invalid_argument, "frame duration must be positive");
  const double half = frame_duration_s * fs_hz / 2.0;
  const std::int64_t frame_len = 2 * static_cast<std::int64_t>(std::floor(half + 0.5));
  require(frame_len >= kMinFrameLen, ErrorCode::geometry_too_small,
          "frame length " + std::to_string(frame_len) + " below minimum " +
              std::to_string(kMinFrameLen));
  // The realized duration frame_len/fs is stored as the exact rational so a
  // geometry built from a plain double still transfers without drift.
  return frame_geometry(Rational(frame_len, fs_hz), fs_hz);
}

std::int64_t num_frames(const FrameGeometry& geom, std::int64_t sample_count) {
  require(sample_count > 0, ErrorCode::invalid_argument, "signal must not be empty");
  const std::int64_t hop = geom.hop_len;
  return (sample_count + hop - 1) / hop + 1;
}

template <class T>
FilterBank<T>::FilterBank(const FrameGeometry& geom) : geom_(geom) {
  const int N = geom.frame_len;
  const int K = geom.num_bins;
  require(N >= kMinFrameLen && K == N / 2 + 1 && geom.hop_len == N / 2,
          ErrorCode::invalid_argument, "inconsistent frame geometry");
  const std::size_t table = static_cast<std::size_t>(K) * N;
  ana_cos_.resize(table);
  ana_sin_.resize(table);
  syn_cos_.resize(table);
  syn_sin_.resize(table);

  constexpr double pi = std::numbers::pi;
  std::vector<double> window(N);
  for (int n = 0; n < N; ++n) window[n] = std::sin(pi * (n + 0.5) / N);

  for (int k = 0; k < K; ++k) {
    const double weight = (k == 0 || k == K - 1) ? 1.0 / N : 2.0 / N;
    const bool zero_sin = (k == 0 || k == K - 1);
    T* ac = ana_cos_.data() + row(k);
    T* as = ana_sin_.data() + row(k);
    T* sc = syn_cos_.data() + row(k);
    T* ss = syn_sin_.data() + row(k);
    for (int n = 0; n < N; ++n) {
      // (k*n) mod N keeps the phase argument small and exact.
      const std::size_t idx = static_cast<std::size_t>(k) * n % N;
      const double angle = 2.0 * pi * static_cast<double>(idx) / N;
      const double c = window[n] * std::cos(angle);
      const double s = zero_sin ? 0.0 : -window[n] * std::sin(angle);
      ac[n] = static_cast<T>(c);
      as[n] = static_cast<T>(s);
      sc[n] = static_cast<T>(weight * c);
      ss[n] = static_cast<T>(weight * s);
    }
  }
}

namespace {

// Correlates hop-padded frames against a filter table pair; shared by
// analysis (analysis filters) and the synthesis adjoint (synthesis filters).
template <class T>
void correlate_frames(const std::vector<T>& padded, std::int64_t frames, const FrameGeometry& geom,
                      const T* cos_table, const T* sin_table, T* re_plane, T* im_plane) {
  const int N = geom.frame_len;
  const int K = geom.num_bins;
  const int H = geom.hop_len;
  for (std::int64_t t0 = 0; t0 < frames; t0 += kFrameChunk) {
    const std::int64_t t1 = std::min<std::int64_t>(frames, t0 + kFrameChunk);
    for (int k = 0; k < K; ++k) {
      const T* ck = cos_table + static_cast<std::size_t>(k) * N;
      const T* sk = sin_table + static_cast<std::size_t>(k) * N;
      for (std::int64_t t = t0; t < t1; ++t) {
        const T* frame = padded.data() + t * H;
        re_plane[t * K + k] = dot_n(frame, ck, N);
        im_plane[t * K + k] = dot_n(frame, sk, N);
      }
    }
  }
}

template <class T>
std::vector<T> hop_padded(const std::vector<T>& x, const FrameGeometry& geom, std::int64_t frames) {
  const int H = geom.hop_len;
  std::vector<T> padded(static_cast<std::size_t>((frames + 1) * H), T{0});
  std::copy(x.begin(), x.end(), padded.begin() + H);
  return padded;
}

}  // namespace

template <class T>
Spectrogram<T> analyze_signal(const Signal<T>& channels, const FilterBank<T>& bank) {
  require(!channels.empty(), ErrorCode::invalid_argument, "signal must have at least one channel");
  const FrameGeometry& geom = bank.geometry();
  const std::int64_t len = static_cast<std::int64_t>(channels[0].size());
  for (const auto& ch : channels)
    require(static_cast<std::int64_t>(ch.size()) == len, ErrorCode::shape_error,
            "audio channels must have equal length");
  const std::int64_t frames = num_frames(geom, len);

  Spectrogram<T> spec;
  spec.geom = geom;
  spec.source_len = len;
  spec.audio_channels = static_cast<int>(channels.size());
  spec.coeffs.resize(2 * spec.audio_channels, static_cast<int>(frames), geom.num_bins);
  for (int a = 0; a < spec.audio_channels; ++a) {
    const std::vector<T> padded = hop_padded(channels[a], geom, frames);
    correlate_frames(padded, frames, geom, bank.analysis_cos(0), bank.analysis_sin(0),
                     spec.coeffs.plane(2 * a), spec.coeffs.plane(2 * a + 1));
  }
  return spec;
}

template <class T>
Signal<T> synthesize_signal(const Spectrogram<T>& spec, const FilterBank<T>& bank) {
  const FrameGeometry& geom = bank.geometry();
  require(spec.geom == geom, ErrorCode::invalid_argument, "spectrogram geometry mismatch");
  require(spec.audio_channels > 0 && spec.coeffs.channels == 2 * spec.audio_channels &&
              spec.coeffs.bins == geom.num_bins,
          ErrorCode::shape_error, "spectrogram shape inconsistent with geometry");
  require(spec.source_len > 0, ErrorCode::invalid_argument, "spectrogram has no source length");
  const std::int64_t frames = spec.coeffs.frames;
  require(frames == num_frames(geom, spec.source_len), ErrorCode::shape_error,
          "frame count inconsistent with source length");

  const int N = geom.frame_len;
  const int K = geom.num_bins;
  const int H = geom.hop_len;
  Signal<T> out(spec.audio_channels);
  std::vector<T> padded;
  for (int a = 0; a < spec.audio_channels; ++a) {
    padded.assign(static_cast<std::size_t>((frames + 1) * H), T{0});
    const T* re_plane = spec.coeffs.plane(2 * a);
    const T* im_plane = spec.coeffs.plane(2 * a + 1);
    for (std::int64_t t0 = 0; t0 < frames; t0 += kFrameChunk) {
      const std::int64_t t1 = std::min<std::int64_t>(frames, t0 + kFrameChunk);
      for (int k = 0; k < K; ++k) {
        const T* ck = bank.synthesis_cos(k);
        const T* sk = bank.synthesis_sin(k);
        for (std::int64_t t = t0; t < t1; ++t) {
          T* frame = padded.data() + t * H;
          axpy_n(frame, ck, re_plane[t * K + k], N);
          axpy_n(frame, sk, im_plane[t * K + k], N);
        }
      }
    }
    out[a].assign(padded.begin() + H, padded.begin() + H + spec.source_len);
  }
  return out;
}

template <class T>
Spectrogram<T> synthesis_adjoint(const Signal<T>& grad_output, std::int64_t source_len,
                                 const FilterBank<T>& bank) {
  require(!grad_output.empty(), ErrorCode::invalid_argument, "gradient must have channels");
  const FrameGeometry& geom = bank.geometry();
  for (const auto& ch : grad_output)
    require(static_cast<std::int64_t>(ch.size()) == source_len, ErrorCode::shape_error,
            "gradient length mismatch");
  const std::int64_t frames = num_frames(geom, source_len);

  Spectrogram<T> grad;
  grad.geom = geom;
  grad.source_len = source_len;
  grad.audio_channels = static_cast<int>(grad_output.size());
  grad.coeffs.resize(2 * grad.audio_channels, static_cast<int>(frames), geom.num_bins);
  for (int a = 0; a < grad.audio_channels; ++a) {
    const std::vector<T> padded = hop_padded(grad_output[a], geom, frames);
    correlate_frames(padded, frames, geom, bank.synthesis_cos(0), bank.synthesis_sin(0),
                     grad.coeffs.plane(2 * a), grad.coeffs.plane(2 * a + 1));
  }
  return grad;
}

template <class T>
Spectrogram<T> analyze(const AudioBuffer& audio, const FilterBank<T>& bank) {
  require(audio.fs_hz == bank.geometry().fs_hz, ErrorCode::invalid_argument,
          "audio rate does not match filter bank rate");
  audio.check_rectangular();
  Signal<T> channels(audio.channel_count());
  for (int a = 0; a < audio.channel_count(); ++a)
    channels[a].assign(audio.channels[a].begin(), audio.channels[a].end());
  return analyze_signal(channels, bank);
}

template <class T>
AudioBuffer synthesize(const Spectrogram<T>& spec, const FilterBank<T>& bank) {
  const Signal<T> out = synthesize_signal(spec, bank);
  AudioBuffer audio;
  audio.fs_hz = bank.geometry().fs_hz;
  audio.channels.resize(out.size());
  for (std::size_t a = 0; a < out.size(); ++a)
    audio.channels[a].assign(out[a].begin(), out[a].end());
  return audio;
}

template class FilterBank<float>;
template class FilterBank<double>;

template Spectrogram<float> analyze_signal(const Signal<float>&, const FilterBank<float>&);
template Spectrogram<double> analyze_signal(const Signal<double>&, const FilterBank<double>&);
template Signal<float> synthesize_signal(const Spectrogram<float>&, const FilterBank<float>&);
template Signal<double> synthesize_signal(const Spectrogram<double>&, const FilterBank<double>&);
template Spectrogram<float> synthesis_adjoint(const Signal<float>&, std::int64_t,
                                              const FilterBank<float>&);
template Spectrogram<double> synthesis_adjoint(const Signal<double>&, std::int64_t,
                                               const FilterBank<double>&);
template Spectrogram<float> analyze(const AudioBuffer&, const FilterBank<float>&);
template Spectrogram<double> analyze(const AudioBuffer&, const FilterBank<double>&);
template AudioBuffer synthesize(const Spectrogram<float>&, const FilterBank<float>&);
template AudioBuffer synthesize(const Spectrogram<double>&, const FilterBank<double>&);

}  // namespace sfisep
