#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sfisep/audio.hpp"
#include "sfisep/filterbank.hpp"
#include "sfisep/tensor.hpp"

namespace sfisep {

// Magnitude-compressing map c -> c * ln(alpha + |c|) / |c|, with the value 1
// substituted for the quotient at |c| == 0. Phase is preserved; for alpha == 1
// the map is continuous at the origin and shrinks magnitudes monotonically.
template <class T>
void compress_inplace(Spectrogram<T>& spec, double alpha);

template <class T>
Spectrogram<T> compress(const Spectrogram<T>& spec, double alpha);

// Real/imaginary planes of each audio channel in the fixed order
// (ch0 re, ch0 im, ch1 re, ch1 im). The spectrogram already stores its
// coefficients in this order, so stacking is a copy and exactly invertible.
template <class T>
Tensor3<T> stack_channels(const Spectrogram<T>& spec);

template <class T>
Spectrogram<T> unstack_channels(const Tensor3<T>& features, const FrameGeometry& geom,
                                std::int64_t source_len);

// Per-bin standardization statistics, pooled over frames, items and feature
// channels. Estimated in double precision regardless of the processing type.
struct WhiteningStats {
  int fs_hz = 0;
  int num_bins = 0;
  std::uint64_t sample_count = 0;
  std::vector<double> mean;
  std::vector<double> stddev;

  static WhiteningStats identity(int fs_hz, int num_bins);

  bool operator==(const WhiteningStats& other) const = default;
};

// One streaming pass over the compressed features of the given mixtures.
// Population standard deviation, floored at 1e-8.
WhiteningStats estimate_whitening(std::span<const AudioBuffer> mixtures,
                                  const FrameGeometry& geom, double alpha);

template <class T>
void apply_whitening_inplace(Tensor3<T>& features, const WhiteningStats& stats);

template <class T>
Tensor3<T> apply_whitening(const Tensor3<T>& features, const WhiteningStats& stats);

// Complex per-bin mask multiply: out = (m_re + i m_im) * c, one (re, im) mask
// plane pair per audio channel. Applied to the uncompressed spectrogram.
template <class T>
Spectrogram<T> apply_mask(const Spectrogram<T>& spec, const Tensor3<T>& mask);

// Adjoint of apply_mask with respect to the mask, holding the spectrogram
// fixed; used by the training backward pass.
template <class T>
Tensor3<T> mask_gradient(const Spectrogram<T>& spec, const Spectrogram<T>& grad_masked);

}  // namespace sfisep
