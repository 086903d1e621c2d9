#pragma once

#include <cstdint>
#include <vector>

#include "sfisep/audio.hpp"
#include "sfisep/rational.hpp"
#include "sfisep/tensor.hpp"

namespace sfisep {

// Frame geometry derived from a physical frame duration and a sampling rate.
// frame_len is the nearest even sample count for the requested duration, so
// the time-frequency grid keeps a constant physical resolution across rates.
struct FrameGeometry {
  Rational frame_duration{2048, 48000};
  int fs_hz = 0;
  int frame_len = 0;
  int hop_len = 0;
  int num_bins = 0;
  double bin_spacing_hz = 0.0;

  bool operator==(const FrameGeometry& other) const = default;
};

// Rounds frame_duration * fs to the nearest even integer, ties upward.
FrameGeometry frame_geometry(const Rational& frame_duration, int fs_hz);
FrameGeometry frame_geometry(double frame_duration_s, int fs_hz);

// Frames tile the hop-padded signal so every input sample is covered by
// exactly two frames (50% overlap).
std::int64_t num_frames(const FrameGeometry& geom, std::int64_t sample_count);

// Modulated sine-window filter pairs for one geometry. Analysis filters are
// unnormalized; synthesis filters carry the inverse-transform scaling
// (1/frame_len at the DC and Nyquist bins, 2/frame_len elsewhere) so that
// analyze -> synthesize reconstructs the input. The sine branches at DC and
// Nyquist are identically zero; the imaginary part of those bins never
// reaches the output.
template <class T>
class FilterBank {
 public:
  explicit FilterBank(const FrameGeometry& geom);

  const FrameGeometry& geometry() const { return geom_; }

  const T* analysis_cos(int k) const { return ana_cos_.data() + row(k); }
  const T* analysis_sin(int k) const { return ana_sin_.data() + row(k); }
  const T* synthesis_cos(int k) const { return syn_cos_.data() + row(k); }
  const T* synthesis_sin(int k) const { return syn_sin_.data() + row(k); }

 private:
  std::size_t row(int k) const { return static_cast<std::size_t>(k) * geom_.frame_len; }

  FrameGeometry geom_;
  std::vector<T> ana_cos_, ana_sin_, syn_cos_, syn_sin_;
};

// Complex spectrogram; coeffs holds two planes per audio channel in the order
// (ch0 real, ch0 imag, ch1 real, ch1 imag). source_len is the untrimmed input
// length used to restore the exact sample count at synthesis.
template <class T>
struct Spectrogram {
  FrameGeometry geom;
  std::int64_t source_len = 0;
  int audio_channels = 0;
  Tensor3<T> coeffs;
};

template <class T>
using Signal = std::vector<std::vector<T>>;

template <class T>
Spectrogram<T> analyze_signal(const Signal<T>& channels, const FilterBank<T>& bank);

template <class T>
Signal<T> synthesize_signal(const Spectrogram<T>& spec, const FilterBank<T>& bank);

// Adjoint of synthesize_signal: maps a gradient with respect to the
// synthesized samples back to a gradient with respect to the coefficients.
template <class T>
Spectrogram<T> synthesis_adjoint(const Signal<T>& grad_output, std::int64_t source_len,
                                 const FilterBank<T>& bank);

template <class T>
Spectrogram<T> analyze(const AudioBuffer& audio, const FilterBank<T>& bank);

template <class T>
AudioBuffer synthesize(const Spectrogram<T>& spec, const FilterBank<T>& bank);

}  // namespace sfisep
