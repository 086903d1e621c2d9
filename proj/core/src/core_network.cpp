#include "sfisep/core_network.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace sfisep {

namespace {

template <class T>
constexpr int kLanes = sizeof(T) == 4 ? 16 : 8;

constexpr int kMaxTaps = 25;

template <class T>
T sum_n(const T* a, int n) {
  constexpr int L = kLanes<T>;
  T acc[L] = {};
  int i = 0;
  for (; i + L <= n; i += L)
    for (int j = 0; j < L; ++j) acc[j] += a[i + j];
  T sum = 0;
  for (int j = 0; j < L; ++j) sum += acc[j];
  for (; i < n; ++i) sum += a[i];
  return sum;
}

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

// Zero padding on the time axis, mirror-without-edge reflection on the
// frequency axis. Needs bins > pad_f source bins to reflect.
template <class T>
void pad_block_input(const Tensor3<T>& x, int pt, int pf, std::vector<T>& padded) {
  const int C = x.channels, Tn = x.frames, F = x.bins;
  const int Tp = Tn + 2 * pt, Fp = F + 2 * pf;
  padded.assign(static_cast<std::size_t>(C) * Tp * Fp, T{0});
  for (int c = 0; c < C; ++c) {
    for (int t = 0; t < Tn; ++t) {
      const T* src = x.row(c, t);
      T* dst = padded.data() + (static_cast<std::size_t>(c) * Tp + (t + pt)) * Fp;
      std::copy(src, src + F, dst + pf);
      for (int j = 1; j <= pf; ++j) {
        dst[pf - j] = src[j];
        dst[pf + F - 1 + j] = src[F - 1 - j];
      }
    }
  }
}

template <class T>
void conv_forward(const std::vector<T>& padded, int C_in, int Tn, int F, int pt, int pf,
                  const T* W, const T* bias, int C_out, int kt, int kf, Tensor3<T>& out) {
  const int Tp = Tn + 2 * pt, Fp = F + 2 * pf;
  out.resize(C_out, Tn, F);
  for (int oc = 0; oc < C_out; ++oc) {
    T* oplane = out.plane(oc);
    std::fill(oplane, oplane + out.plane_size(), bias[oc]);
    for (int ic = 0; ic < C_in; ++ic) {
      const T* iplane = padded.data() + static_cast<std::size_t>(ic) * Tp * Fp;
      const T* w = W + (static_cast<std::size_t>(oc) * C_in + ic) * kt * kf;
      for (int t = 0; t < Tn; ++t) {
        T* orow = oplane + static_cast<std::size_t>(t) * F;
        for (int dt = 0; dt < kt; ++dt) {
          const T* irow = iplane + static_cast<std::size_t>(t + dt) * Fp;
          for (int df = 0; df < kf; ++df) {
            const T wv = w[dt * kf + df];
            const T* src = irow + df;
            for (int f = 0; f < F; ++f) orow[f] += wv * src[f];
          }
        }
      }
    }
  }
}

// acc[dt*kf + df] += sum_f grad_row[f] * padded rows; all taps in one pass so
// the rows are read once per (output channel, input channel) pair.
template <class T>
void correlate_taps(const T* grad_row, const T* irow0, int Fp, int kt, int kf, int F, T* acc) {
  constexpr int L = kLanes<T>;
  T lanes[kMaxTaps][L] = {};
  const int taps = kt * kf;
  int f = 0;
  for (; f + L <= F; f += L) {
    for (int dt = 0; dt < kt; ++dt) {
      const T* irow = irow0 + static_cast<std::size_t>(dt) * Fp + f;
      for (int df = 0; df < kf; ++df) {
        T* lane = lanes[dt * kf + df];
        for (int j = 0; j < L; ++j) lane[j] += grad_row[f + j] * irow[df + j];
      }
    }
  }
  for (; f < F; ++f) {
    for (int dt = 0; dt < kt; ++dt) {
      const T* irow = irow0 + static_cast<std::size_t>(dt) * Fp;
      for (int df = 0; df < kf; ++df) lanes[dt * kf + df][0] += grad_row[f] * irow[f + df];
    }
  }
  for (int tap = 0; tap < taps; ++tap) {
    T sum = 0;
    for (int j = 0; j < L; ++j) sum += lanes[tap][j];
    acc[tap] += sum;
  }
}

template <class T>
void conv_backward(const std::vector<T>& padded, int C_in, int Tn, int F, int pt, int pf,
                   const T* W, int C_out, int kt, int kf, const Tensor3<T>& grad_out,
                   T* grad_W, T* grad_bias, Tensor3<T>* grad_in, std::vector<T>& grad_padded) {
  const int Tp = Tn + 2 * pt, Fp = F + 2 * pf;
  const int taps = kt * kf;

  // Weight gradient, frame-major so the active rows stay cache-resident.
  std::vector<T> local(static_cast<std::size_t>(C_out) * C_in * taps, T{0});
  for (int t = 0; t < Tn; ++t) {
    for (int oc = 0; oc < C_out; ++oc) {
      const T* grow = grad_out.row(oc, t);
      for (int ic = 0; ic < C_in; ++ic) {
        const T* irow0 = padded.data() + (static_cast<std::size_t>(ic) * Tp + t) * Fp;
        correlate_taps(grow, irow0, Fp, kt, kf, F,
                       local.data() + (static_cast<std::size_t>(oc) * C_in + ic) * taps);
      }
    }
  }
  for (std::size_t i = 0; i < local.size(); ++i) grad_W[i] += local[i];

  for (int oc = 0; oc < C_out; ++oc)
    grad_bias[oc] += sum_n(grad_out.plane(oc), static_cast<int>(grad_out.plane_size()));

  if (grad_in == nullptr) return;

  // Input gradient: transposed convolution into the padded layout, then the
  // padding is folded back (zero time rows dropped, reflected bins added to
  // their sources).
  grad_padded.assign(static_cast<std::size_t>(C_in) * Tp * Fp, T{0});
  for (int oc = 0; oc < C_out; ++oc) {
    const T* gplane = grad_out.plane(oc);
    for (int ic = 0; ic < C_in; ++ic) {
      T* iplane = grad_padded.data() + static_cast<std::size_t>(ic) * Tp * Fp;
      const T* w = W + (static_cast<std::size_t>(oc) * C_in + ic) * kt * kf;
      for (int t = 0; t < Tn; ++t) {
        const T* grow = gplane + static_cast<std::size_t>(t) * F;
        for (int dt = 0; dt < kt; ++dt) {
          T* irow = iplane + static_cast<std::size_t>(t + dt) * Fp;
          for (int df = 0; df < kf; ++df) {
            const T wv = w[dt * kf + df];
            T* dst = irow + df;
            for (int f = 0; f < F; ++f) dst[f] += wv * grow[f];
          }
        }
      }
    }
  }

  grad_in->resize(C_in, Tn, F);
  for (int c = 0; c < C_in; ++c) {
    for (int t = 0; t < Tn; ++t) {
      const T* src = grad_padded.data() + (static_cast<std::size_t>(c) * Tp + (t + pt)) * Fp;
      T* dst = grad_in->row(c, t);
      for (int f = 0; f < F; ++f) dst[f] = src[pf + f];
      for (int j = 1; j <= pf; ++j) {
        dst[j] += src[pf - j];
        dst[F - 1 - j] += src[pf + F - 1 + j];
      }
    }
  }
}

template <class T>
void relu_inplace(Tensor3<T>& x) {
  for (T& v : x.v) v = v > T{0} ? v : T{0};
}

template <class T>
void tanh_inplace(Tensor3<T>& x) {
  for (T& v : x.v) v = std::tanh(v);
}

// Layer norm with statistics over the time axis at each (channel, bin) and a
// learned per-channel affine. Population variance, floored. Pooling over time
// only keeps the normalization independent of the sampling rate: a bin covers
// the same physical band at every rate, whereas the bin count does not.
// Accumulation runs in double in a fixed order, so results are reproducible
// and float kernels stay accurate on long items.
template <class T>
void layer_norm_forward(const Tensor3<T>& x, const T* gain, const T* beta, Tensor3<T>& out) {
  const int C = x.channels, Tn = x.frames, F = x.bins;
  out.resize(C, Tn, F);
  const double inv_t = 1.0 / static_cast<double>(Tn);
  std::vector<double> s1(F), s2(F);
  std::vector<T> mean(F), inv_sigma(F);
  for (int c = 0; c < C; ++c) {
    std::fill(s1.begin(), s1.end(), 0.0);
    std::fill(s2.begin(), s2.end(), 0.0);
    for (int t = 0; t < Tn; ++t) {
      const T* row = x.row(c, t);
      for (int f = 0; f < F; ++f) {
        const double v = row[f];
        s1[f] += v;
        s2[f] += v * v;
      }
    }
    for (int f = 0; f < F; ++f) {
      const double mu = s1[f] * inv_t;
      const double var = s2[f] * inv_t - mu * mu;
      mean[f] = static_cast<T>(mu);
      inv_sigma[f] = static_cast<T>(1.0 / std::sqrt(std::max(var, kLayerNormVarianceFloor)));
    }
    const T g = gain[c], b = beta[c];
    for (int t = 0; t < Tn; ++t) {
      const T* row = x.row(c, t);
      T* orow = out.row(c, t);
      for (int f = 0; f < F; ++f) orow[f] = g * (row[f] - mean[f]) * inv_sigma[f] + b;
    }
  }
}

template <class T>
void layer_norm_backward(const Tensor3<T>& x, const T* gain, const Tensor3<T>& grad_out,
                         T* grad_gain, T* grad_beta, Tensor3<T>& grad_in) {
  const int C = x.channels, Tn = x.frames, F = x.bins;
  grad_in.resize(C, Tn, F);
  const double inv_t = 1.0 / static_cast<double>(Tn);
  std::vector<double> s1(F), s2(F), sum_go(F), sum_gox(F);
  std::vector<T> mean(F), inv_sigma(F), mean_go(F), mean_gox(F);
  for (int c = 0; c < C; ++c) {
    std::fill(s1.begin(), s1.end(), 0.0);
    std::fill(s2.begin(), s2.end(), 0.0);
    for (int t = 0; t < Tn; ++t) {
      const T* row = x.row(c, t);
      for (int f = 0; f < F; ++f) {
        const double v = row[f];
        s1[f] += v;
        s2[f] += v * v;
      }
    }
    std::vector<char> floored(F);
    for (int f = 0; f < F; ++f) {
      const double mu = s1[f] * inv_t;
      const double var = s2[f] * inv_t - mu * mu;
      mean[f] = static_cast<T>(mu);
      inv_sigma[f] = static_cast<T>(1.0 / std::sqrt(std::max(var, kLayerNormVarianceFloor)));
      floored[f] = var > kLayerNormVarianceFloor ? 0 : 1;
    }
    std::fill(sum_go.begin(), sum_go.end(), 0.0);
    std::fill(sum_gox.begin(), sum_gox.end(), 0.0);
    for (int t = 0; t < Tn; ++t) {
      const T* row = x.row(c, t);
      const T* grow = grad_out.row(c, t);
      for (int f = 0; f < F; ++f) {
        const double xhat = static_cast<double>((row[f] - mean[f]) * inv_sigma[f]);
        sum_go[f] += grow[f];
        sum_gox[f] += grow[f] * xhat;
      }
    }
    double acc_gain = 0, acc_beta = 0;
    for (int f = 0; f < F; ++f) {
      acc_gain += sum_gox[f];
      acc_beta += sum_go[f];
      mean_go[f] = static_cast<T>(sum_go[f] * inv_t);
      // When the variance sits at the floor sigma is a constant, so the
      // projection term of the gradient vanishes; the mean term stays.
      mean_gox[f] = static_cast<T>(floored[f] ? 0.0 : sum_gox[f] * inv_t);
    }
    const T g = gain[c];
    for (int t = 0; t < Tn; ++t) {
      const T* row = x.row(c, t);
      const T* grow = grad_out.row(c, t);
      T* irow = grad_in.row(c, t);
      for (int f = 0; f < F; ++f) {
        const T xhat = (row[f] - mean[f]) * inv_sigma[f];
        irow[f] = inv_sigma[f] * g * (grow[f] - mean_go[f] - xhat * mean_gox[f]);
      }
    }
    grad_gain[c] += static_cast<T>(acc_gain);
    grad_beta[c] += static_cast<T>(acc_beta);
  }
}

}  // namespace

void validate(const CoreConfig& config) {
  require(config.num_hidden_blocks >= 1, ErrorCode::invalid_argument,
          "need at least one hidden block");
  require(config.hidden_filters >= 1 && config.in_channels >= 1 && config.mask_channels >= 1,
          ErrorCode::invalid_argument, "channel counts must be positive");
  require(config.kernel_time >= 1 && config.kernel_time % 2 == 1, ErrorCode::invalid_argument,
          "time kernel must be odd and positive");
  require(config.kernel_freq >= 1 && config.kernel_freq % 2 == 1, ErrorCode::invalid_argument,
          "frequency kernel must be odd and positive");
  require(config.kernel_time * config.kernel_freq <= kMaxTaps, ErrorCode::invalid_argument,
          "kernel too large");
  require(config.in_channels % 2 == 0 && config.mask_channels % 2 == 0,
          ErrorCode::invalid_argument, "feature and mask channels come in (re, im) pairs");
}

std::vector<BlockLayout> block_layout(const CoreConfig& config) {
  validate(config);
  std::vector<BlockLayout> blocks(config.num_hidden_blocks + 1);
  std::int64_t offset = 0;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    BlockLayout& blk = blocks[b];
    blk.in_ch = b == 0 ? config.in_channels : config.hidden_filters;
    blk.out_ch = b + 1 == blocks.size() ? config.mask_channels : config.hidden_filters;
    blk.w = offset;
    offset += static_cast<std::int64_t>(config.kernel_time) * config.kernel_freq * blk.in_ch *
              blk.out_ch;
    blk.bias = offset;
    offset += blk.out_ch;
    blk.gain = offset;
    offset += blk.out_ch;
    blk.beta = offset;
    offset += blk.out_ch;
  }
  return blocks;
}

std::int64_t param_count(const CoreConfig& config) {
  const std::vector<BlockLayout> blocks = block_layout(config);
  const BlockLayout& last = blocks.back();
  return last.beta + last.out_ch + 2;  // + mask scale and offset
}

template <class T>
CoreParams<T> init_core_params(const CoreConfig& config, std::uint64_t seed) {
  const std::vector<BlockLayout> blocks = block_layout(config);
  CoreParams<T> params;
  params.config = config;
  params.flat.assign(param_count(config), T{0});
  Rng rng(seed);
  for (const BlockLayout& blk : blocks) {
    const std::int64_t w_count =
        static_cast<std::int64_t>(config.kernel_time) * config.kernel_freq * blk.in_ch * blk.out_ch;
    const double fan_in = static_cast<double>(config.kernel_time) * config.kernel_freq * blk.in_ch;
    const double bound = std::sqrt(6.0 / fan_in);
    for (std::int64_t i = 0; i < w_count; ++i)
      params.flat[blk.w + i] = static_cast<T>(rng.uniform(-bound, bound));
    for (int c = 0; c < blk.out_ch; ++c) params.flat[blk.gain + c] = T{1};
  }
  params.flat[params.flat.size() - 2] = T{1};  // mask scale
  params.flat[params.flat.size() - 1] = T{0};  // mask offset
  return params;
}

template <class T>
Tensor3<T> conv_block_forward(const Tensor3<T>& x, const CoreParams<T>& params, int block_index) {
  const std::vector<BlockLayout> blocks = block_layout(params.config);
  require(block_index >= 0 && block_index < static_cast<int>(blocks.size()),
          ErrorCode::invalid_argument, "block index out of range");
  require(static_cast<std::int64_t>(params.flat.size()) == param_count(params.config),
          ErrorCode::shape_error, "parameter vector size mismatch");
  const BlockLayout& blk = blocks[block_index];
  require(x.channels == blk.in_ch, ErrorCode::shape_error,
          "input channels do not match block input");
  const int pt = params.config.kernel_time / 2;
  const int pf = params.config.kernel_freq / 2;
  require(x.bins > pf, ErrorCode::invalid_argument,
          "too few bins for reflection padding (need more than " + std::to_string(pf) + ")");
  require(x.frames >= 1, ErrorCode::invalid_argument, "input must have at least one frame");

  std::vector<T> padded;
  pad_block_input(x, pt, pf, padded);
  Tensor3<T> convolved;
  conv_forward(padded, blk.in_ch, x.frames, x.bins, pt, pf, params.flat.data() + blk.w,
               params.flat.data() + blk.bias, blk.out_ch, params.config.kernel_time,
               params.config.kernel_freq, convolved);
  const bool is_output = block_index + 1 == static_cast<int>(blocks.size());
  if (is_output)
    tanh_inplace(convolved);
  else
    relu_inplace(convolved);
  Tensor3<T> out;
  layer_norm_forward(convolved, params.flat.data() + blk.gain, params.flat.data() + blk.beta, out);
  return out;
}

template <class T>
const Tensor3<T>& CoreGraph<T>::forward(const Tensor3<T>& features, const CoreParams<T>& params) {
  const std::vector<BlockLayout> blocks = block_layout(params.config);
  require(static_cast<std::int64_t>(params.flat.size()) == param_count(params.config),
          ErrorCode::shape_error, "parameter vector size mismatch");
  require(features.channels == params.config.in_channels, ErrorCode::shape_error,
          "feature channels do not match network input");
  const int pt = params.config.kernel_time / 2;
  const int pf = params.config.kernel_freq / 2;
  require(features.bins > pf, ErrorCode::invalid_argument,
          "too few bins for reflection padding (need more than " + std::to_string(pf) + ")");
  require(features.frames >= 1, ErrorCode::invalid_argument, "input must have at least one frame");

  const std::size_t n_blocks = blocks.size();
  inputs_.resize(n_blocks + 1);
  acts_.resize(n_blocks);
  inputs_[0] = features;
  for (std::size_t b = 0; b < n_blocks; ++b) {
    const BlockLayout& blk = blocks[b];
    pad_block_input(inputs_[b], pt, pf, padded_);
    conv_forward(padded_, blk.in_ch, features.frames, features.bins, pt, pf,
                 params.flat.data() + blk.w, params.flat.data() + blk.bias, blk.out_ch,
                 params.config.kernel_time, params.config.kernel_freq, acts_[b]);
    if (b + 1 == n_blocks)
      tanh_inplace(acts_[b]);
    else
      relu_inplace(acts_[b]);
    layer_norm_forward(acts_[b], params.flat.data() + blk.gain, params.flat.data() + blk.beta,
                       inputs_[b + 1]);
  }

  const T scale = params.scale();
  const T offset = params.offset();
  const Tensor3<T>& stack_out = inputs_[n_blocks];
  masks_.resize(stack_out.channels, stack_out.frames, stack_out.bins);
  for (std::size_t i = 0; i < masks_.v.size(); ++i)
    masks_.v[i] = offset + scale * stack_out.v[i];
  has_forward_ = true;
  return masks_;
}

template <class T>
void CoreGraph<T>::backward(const Tensor3<T>& mask_grad, const CoreParams<T>& params,
                            std::vector<T>& grad) {
  require(has_forward_, ErrorCode::state_error, "backward requires a preceding forward pass");
  require(static_cast<std::int64_t>(grad.size()) == param_count(params.config),
          ErrorCode::shape_error, "gradient vector size mismatch");
  const std::vector<BlockLayout> blocks = block_layout(params.config);
  const std::size_t n_blocks = blocks.size();
  const Tensor3<T>& stack_out = inputs_[n_blocks];
  require(mask_grad.same_shape(stack_out), ErrorCode::shape_error,
          "mask gradient shape mismatch");
  const int pt = params.config.kernel_time / 2;
  const int pf = params.config.kernel_freq / 2;

  // Mask scaling: masks = offset + scale * stack_out.
  T d_scale = 0, d_offset = 0;
  {
    const std::size_t n = mask_grad.v.size();
    // fixed-order partial sums keep the reduction deterministic
    double acc_scale = 0, acc_offset = 0;
    for (std::size_t i = 0; i < n; ++i) {
      acc_scale += static_cast<double>(mask_grad.v[i]) * stack_out.v[i];
      acc_offset += static_cast<double>(mask_grad.v[i]);
    }
    d_scale = static_cast<T>(acc_scale);
    d_offset = static_cast<T>(acc_offset);
  }
  grad[grad.size() - 2] += d_scale;
  grad[grad.size() - 1] += d_offset;

  const T scale = params.scale();
  grad_a_.resize(mask_grad.channels, mask_grad.frames, mask_grad.bins);
  for (std::size_t i = 0; i < grad_a_.v.size(); ++i) grad_a_.v[i] = scale * mask_grad.v[i];

  for (int b = static_cast<int>(n_blocks) - 1; b >= 0; --b) {
    const BlockLayout& blk = blocks[b];
    // layer norm
    layer_norm_backward(acts_[b], params.flat.data() + blk.gain, grad_a_,
                        grad.data() + blk.gain, grad.data() + blk.beta, grad_b_);
    // activation: post-activation values determine both derivatives
    if (b + 1 == static_cast<int>(n_blocks)) {
      for (std::size_t i = 0; i < grad_b_.v.size(); ++i) {
        const T a = acts_[b].v[i];
        grad_b_.v[i] *= T{1} - a * a;
      }
    } else {
      for (std::size_t i = 0; i < grad_b_.v.size(); ++i)
        grad_b_.v[i] = acts_[b].v[i] > T{0} ? grad_b_.v[i] : T{0};
    }
    // convolution
    pad_block_input(inputs_[b], pt, pf, padded_);
    conv_backward(padded_, blk.in_ch, grad_b_.frames, grad_b_.bins, pt, pf,
                  params.flat.data() + blk.w, blk.out_ch, params.config.kernel_time,
                  params.config.kernel_freq, grad_b_, grad.data() + blk.w,
                  grad.data() + blk.bias, b > 0 ? &grad_a_ : nullptr, grad_padded_);
  }
}

template <class T>
Tensor3<T> core_forward(const Tensor3<T>& features, const CoreParams<T>& params) {
  CoreGraph<T> graph;
  return graph.forward(features, params);
}

template <class T>
double mae_loss(const std::vector<std::vector<T>>& estimate,
                const std::vector<std::vector<T>>& reference) {
  require(estimate.size() == reference.size() && !estimate.empty(), ErrorCode::shape_error,
          "estimate and reference channel counts differ");
  double total = 0;
  std::size_t count = 0;
  for (std::size_t c = 0; c < estimate.size(); ++c) {
    require(estimate[c].size() == reference[c].size(), ErrorCode::shape_error,
            "estimate and reference lengths differ");
    for (std::size_t i = 0; i < estimate[c].size(); ++i)
      total += std::abs(static_cast<double>(estimate[c][i]) - static_cast<double>(reference[c][i]));
    count += estimate[c].size();
  }
  require(count > 0, ErrorCode::invalid_argument, "empty signals");
  return total / static_cast<double>(count);
}

template <class T>
std::vector<std::vector<T>> mae_gradient(const std::vector<std::vector<T>>& estimate,
                                         const std::vector<std::vector<T>>& reference) {
  require(estimate.size() == reference.size() && !estimate.empty(), ErrorCode::shape_error,
          "estimate and reference channel counts differ");
  std::size_t count = 0;
  for (const auto& ch : estimate) count += ch.size();
  require(count > 0, ErrorCode::invalid_argument, "empty signals");
  const T inv = T{1} / static_cast<T>(count);
  std::vector<std::vector<T>> grad(estimate.size());
  for (std::size_t c = 0; c < estimate.size(); ++c) {
    require(estimate[c].size() == reference[c].size(), ErrorCode::shape_error,
            "estimate and reference lengths differ");
    grad[c].resize(estimate[c].size());
    for (std::size_t i = 0; i < estimate[c].size(); ++i) {
      const T e = estimate[c][i] - reference[c][i];
      grad[c][i] = e > T{0} ? inv : (e < T{0} ? -inv : T{0});
    }
  }
  return grad;
}

template <class T>
void adadelta_step(std::vector<T>& params, const std::vector<T>& grad, AdadeltaState<T>& state) {
  require(params.size() == grad.size() && params.size() == state.acc_grad.size() &&
              params.size() == state.acc_update.size(),
          ErrorCode::shape_error, "optimizer state size mismatch");
  const T rho = state.rho, eps = state.epsilon;
  T* acc_g = state.acc_grad.data();
  T* acc_u = state.acc_update.data();
  T* p = params.data();
  const T* g = grad.data();
  const std::size_t n = params.size();
  for (std::size_t i = 0; i < n; ++i) {
    acc_g[i] = rho * acc_g[i] + (T{1} - rho) * g[i] * g[i];
    const T update = -std::sqrt((acc_u[i] + eps) / (acc_g[i] + eps)) * g[i];
    acc_u[i] = rho * acc_u[i] + (T{1} - rho) * update * update;
    p[i] += update;
  }
}

template CoreParams<float> init_core_params(const CoreConfig&, std::uint64_t);
template CoreParams<double> init_core_params(const CoreConfig&, std::uint64_t);
template Tensor3<float> conv_block_forward(const Tensor3<float>&, const CoreParams<float>&, int);
template Tensor3<double> conv_block_forward(const Tensor3<double>&, const CoreParams<double>&, int);
template class CoreGraph<float>;
template class CoreGraph<double>;
template Tensor3<float> core_forward(const Tensor3<float>&, const CoreParams<float>&);
template Tensor3<double> core_forward(const Tensor3<double>&, const CoreParams<double>&);
template double mae_loss(const std::vector<std::vector<float>>&,
                         const std::vector<std::vector<float>>&);
template double mae_loss(const std::vector<std::vector<double>>&,
                         const std::vector<std::vector<double>>&);
template std::vector<std::vector<float>> mae_gradient(const std::vector<std::vector<float>>&,
                                                      const std::vector<std::vector<float>>&);
template std::vector<std::vector<double>> mae_gradient(const std::vector<std::vector<double>>&,
                                                       const std::vector<std::vector<double>>&);
template void adadelta_step(std::vector<float>&, const std::vector<float>&, AdadeltaState<float>&);
template void adadelta_step(std::vector<double>&, const std::vector<double>&,
                            AdadeltaState<double>&);

}  // namespace sfisep
