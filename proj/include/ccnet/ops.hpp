#pragma once

#include <cstdint>
#include <vector>

#include "ccnet/rng.hpp"
#include "ccnet/tensor.hpp"

namespace ccnet {

enum class Padding { same, valid };
enum class Mode { train, eval };

// Activations are [h, w, c]; kernel banks are [out_channels, kh, kw, in_channels].
template <typename T>
struct ConvParams {
  Tensor<T> kernels;
  Tensor<T> bias;
  Padding padding = Padding::valid;
};

template <typename T>
struct ConvGrads {
  Tensor<T> input;
  Tensor<T> kernels;
  Tensor<T> bias;
};

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& input, const ConvParams<T>& p);

template <typename T>
ConvGrads<T> conv2d_backward(const Tensor<T>& input, const ConvParams<T>& p,
                             const Tensor<T>& upstream);

// 2x2 window, stride 2; odd trailing row/column is dropped. argmax holds the
// flat input index each output element came from; ties break to the first
// element in row-major window order.
template <typename T>
struct PoolResult {
  Tensor<T> output;
  std::vector<std::uint32_t> argmax;
};

template <typename T>
PoolResult<T> maxpool2x2_forward(const Tensor<T>& input);

template <typename T>
Tensor<T> maxpool2x2_backward(const std::vector<std::uint32_t>& argmax,
                              const std::vector<int>& input_shape, const Tensor<T>& upstream);

template <typename T>
Tensor<T> relu(const Tensor<T>& input);

template <typename T>
Tensor<T> relu_backward(const Tensor<T>& input, const Tensor<T>& upstream);

// Inverted dropout: each element is zeroed with probability p, survivors are
// scaled by 1/(1-p). The mask stores that per-element factor (0 or 1/(1-p)),
// so backward is an elementwise product with it. One uniform draw per element
// in flat order, drop iff draw < p; eval mode draws nothing.
template <typename T>
struct DropoutResult {
  Tensor<T> output;
  Tensor<T> mask;
};

template <typename T>
DropoutResult<T> dropout(const Tensor<T>& input, double p, Mode mode, Rng& rng);

template <typename T>
Tensor<T> dropout_backward(const Tensor<T>& mask, const Tensor<T>& upstream);

// weights are [out, in]; input and bias rank 1.
template <typename T>
struct DenseParams {
  Tensor<T> weights;
  Tensor<T> bias;
};

template <typename T>
struct DenseGrads {
  Tensor<T> input;
  Tensor<T> weights;
  Tensor<T> bias;
};

template <typename T>
Tensor<T> dense_forward(const Tensor<T>& input, const DenseParams<T>& p);

template <typename T>
DenseGrads<T> dense_backward(const Tensor<T>& input, const DenseParams<T>& p,
                             const Tensor<T>& upstream);

template <typename T>
Tensor<T> softmax(const Tensor<T>& logits);

// Loss is -log softmax(logits)[true_class], computed with max subtraction.
template <typename T>
struct SoftmaxXentResult {
  T loss;
  Tensor<T> grad_logits;
  Tensor<T> probabilities;
};

template <typename T>
SoftmaxXentResult<T> softmax_cross_entropy(const Tensor<T>& logits, int true_class);

}  // namespace ccnet
