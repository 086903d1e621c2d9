#pragma once

#include <cstdint>
#include <vector>

#include "sfisep/rng.hpp"
#include "sfisep/tensor.hpp"

namespace sfisep {

// Structure of the mask-estimation network: a stack of hidden convolution
// blocks (3x5 kernel, ReLU, per-channel layer norm) followed by one tanh
// output block, plus a global mask scale and offset. The structure never
// depends on the sampling rate or the number of frequency bins.
struct CoreConfig {
  int num_hidden_blocks = 24;
  int hidden_filters = 32;
  int kernel_time = 3;
  int kernel_freq = 5;
  int in_channels = 4;
  int mask_channels = 4;

  bool operator==(const CoreConfig& other) const = default;
};

void validate(const CoreConfig& config);

// Offsets of one block's parameters inside the flat parameter vector.
struct BlockLayout {
  int in_ch = 0;
  int out_ch = 0;
  std::int64_t w = 0;     // [out][in][kernel_time][kernel_freq]
  std::int64_t bias = 0;  // [out]
  std::int64_t gain = 0;  // layer norm gain, [out]
  std::int64_t beta = 0;  // layer norm bias, [out]
};

// Hidden blocks in order, then the output block last.
std::vector<BlockLayout> block_layout(const CoreConfig& config);

std::int64_t param_count(const CoreConfig& config);

// All learnable parameters in one flat vector whose layout matches
// block_layout(); the final two entries are the mask scale and offset.
template <class T>
struct CoreParams {
  CoreConfig config;
  std::vector<T> flat;

  T scale() const { return flat[flat.size() - 2]; }
  T offset() const { return flat[flat.size() - 1]; }
};

// Uniform fan-in-scaled conv weights, zero conv and layer norm biases, unit
// layer norm gain, mask scale 1 and offset 0. Equal seeds give bit-identical
// vectors.
template <class T>
CoreParams<T> init_core_params(const CoreConfig& config, std::uint64_t seed);

// Variance inside the layer norm is floored at this value.
inline constexpr double kLayerNormVarianceFloor = 1e-8;

// Single block applied standalone: reflection padding (2 bins, mirror without
// the edge), zero time padding (1 frame), valid convolution, activation (ReLU
// for hidden blocks, tanh for the output block), then layer norm with
// statistics over the time axis at each (channel, bin) and a per-channel
// learned affine. Time-only pooling keeps the block independent of the
// sampling rate.
template <class T>
Tensor3<T> conv_block_forward(const Tensor3<T>& x, const CoreParams<T>& params, int block_index);

// Forward pass through all blocks plus mask scaling, retaining what the
// backward pass needs. One workspace per concurrent training stream.
template <class T>
class CoreGraph {
 public:
  // Returns masks = offset + scale * block stack output.
  const Tensor3<T>& forward(const Tensor3<T>& features, const CoreParams<T>& params);

  // Accumulates d(loss)/d(params) into grad (sized param_count) given
  // d(loss)/d(masks). Requires a preceding forward on the same instance.
  void backward(const Tensor3<T>& mask_grad, const CoreParams<T>& params, std::vector<T>& grad);

 private:
  bool has_forward_ = false;
  std::vector<Tensor3<T>> inputs_;  // inputs_[b] enters block b; back() is the stack output
  std::vector<Tensor3<T>> acts_;    // post-activation, pre-norm values per block
  Tensor3<T> masks_;
  std::vector<T> padded_;           // padding scratch
  Tensor3<T> grad_a_, grad_b_;      // backward scratch
  std::vector<T> grad_padded_;
};

template <class T>
Tensor3<T> core_forward(const Tensor3<T>& features, const CoreParams<T>& params);

// Mean absolute error across all channels and samples, and its subgradient
// (sign convention sign(0) = 0). The loss is accumulated in double so that
// reported values are comparable across kernel precisions.
template <class T>
double mae_loss(const std::vector<std::vector<T>>& estimate,
                const std::vector<std::vector<T>>& reference);

template <class T>
std::vector<std::vector<T>> mae_gradient(const std::vector<std::vector<T>>& estimate,
                                         const std::vector<std::vector<T>>& reference);

// ADADELTA accumulator state; rho = 0.95, epsilon = 1e-6 by default. No
// learning-rate hyperparameter: step sizes derive from the running RMS of
// past gradients and updates.
template <class T>
struct AdadeltaState {
  T rho = T(0.95);
  T epsilon = T(1e-6);
  std::vector<T> acc_grad;
  std::vector<T> acc_update;

  explicit AdadeltaState(std::size_t size = 0)
      : acc_grad(size, T{0}), acc_update(size, T{0}) {}
};

template <class T>
void adadelta_step(std::vector<T>& params, const std::vector<T>& grad, AdadeltaState<T>& state);

}  // namespace sfisep
