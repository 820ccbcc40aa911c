#include "ccnet/ops.hpp"

#include <cmath>
#include <cstddef>
#include <string>

#include "ccnet/error.hpp"
#include "ccnet/kernels.hpp"

namespace ccnet {
namespace {

template <typename T>
void check_conv_args(const Tensor<T>& input, const ConvParams<T>& p) {
  if (input.rank() != 3) throw InputError("conv2d input must be [h,w,c], got " + shape_string(input.shape()));
  if (p.kernels.rank() != 4)
    throw InputError("conv2d kernels must be [oc,kh,kw,ic], got " + shape_string(p.kernels.shape()));
  if (p.bias.rank() != 1 || p.bias.extent(0) != p.kernels.extent(0))
    throw InputError("conv2d bias must be [oc] matching kernels");
  if (p.kernels.extent(3) != input.extent(2))
    throw InputError("conv2d channel mismatch: input has " + std::to_string(input.extent(2)) +
                     ", kernels expect " + std::to_string(p.kernels.extent(3)));
  if (p.padding == Padding::same && (p.kernels.extent(1) % 2 == 0 || p.kernels.extent(2) % 2 == 0))
    throw InputError("conv2d same padding requires odd kernel extents");
  if (p.padding == Padding::valid &&
      (input.extent(0) < p.kernels.extent(1) || input.extent(1) < p.kernels.extent(2)))
    throw InputError("conv2d valid output would be empty for input " + shape_string(input.shape()));
}

// Zero-padded copy; pad 0 gives a plain copy so both padding modes share one
// convolution path (identical tap order either way).
template <typename T>
Tensor<T> pad_input(const Tensor<T>& input, int pad_h, int pad_w) {
  const int h = input.extent(0), w = input.extent(1), c = input.extent(2);
  Tensor<T> out({h + 2 * pad_h, w + 2 * pad_w, c});
  for (int y = 0; y < h; ++y) {
    const T* src = input.data() + static_cast<std::size_t>(y) * w * c;
    T* dst = out.data() + ((static_cast<std::size_t>(y + pad_h) * (w + 2 * pad_w)) + pad_w) * c;
    for (int i = 0; i < w * c; ++i) dst[i] = src[i];
  }
  return out;
}

// [oc,kh,kw,ic] -> [kh,kw,ic,oc] so the output-channel axis is contiguous.
template <typename T>
Tensor<T> transpose_kernels(const Tensor<T>& k) {
  const int oc = k.extent(0), kh = k.extent(1), kw = k.extent(2), ic = k.extent(3);
  Tensor<T> kt({kh, kw, ic, oc});
  for (int o = 0; o < oc; ++o)
    for (int y = 0; y < kh; ++y)
      for (int x = 0; x < kw; ++x)
        for (int c = 0; c < ic; ++c) kt(y, x, c, o) = k(o, y, x, c);
  return kt;
}

template <typename T>
Tensor<T> transpose_kernels_back(const Tensor<T>& kt) {
  const int kh = kt.extent(0), kw = kt.extent(1), ic = kt.extent(2), oc = kt.extent(3);
  Tensor<T> k({oc, kh, kw, ic});
  for (int y = 0; y < kh; ++y)
    for (int x = 0; x < kw; ++x)
      for (int c = 0; c < ic; ++c)
        for (int o = 0; o < oc; ++o) k(o, y, x, c) = kt(y, x, c, o);
  return k;
}

}  // namespace

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& input, const ConvParams<T>& p) {
  check_conv_args(input, p);
  const int kh = p.kernels.extent(1), kw = p.kernels.extent(2);
  const int pad_h = p.padding == Padding::same ? (kh - 1) / 2 : 0;
  const int pad_w = p.padding == Padding::same ? (kw - 1) / 2 : 0;
  const Tensor<T> xpad = pad_input(input, pad_h, pad_w);
  const Tensor<T> kt = transpose_kernels(p.kernels);
  const int hp = xpad.extent(0), wp = xpad.extent(1);
  const int ho = hp - kh + 1, wo = wp - kw + 1;
  Tensor<T> out({ho, wo, p.kernels.extent(0)});
  kernels::active_table<T>().conv_forward(xpad.data(), hp, wp, input.extent(2), kt.data(), kh, kw,
                                          p.kernels.extent(0), p.bias.data(), out.data(), ho, wo);
  return out;
}

template <typename T>
ConvGrads<T> conv2d_backward(const Tensor<T>& input, const ConvParams<T>& p,
                             const Tensor<T>& upstream) {
  check_conv_args(input, p);
  const int oc = p.kernels.extent(0), kh = p.kernels.extent(1), kw = p.kernels.extent(2);
  const int cin = input.extent(2);
  const int pad_h = p.padding == Padding::same ? (kh - 1) / 2 : 0;
  const int pad_w = p.padding == Padding::same ? (kw - 1) / 2 : 0;
  const Tensor<T> xpad = pad_input(input, pad_h, pad_w);
  const int hp = xpad.extent(0), wp = xpad.extent(1);
  const int ho = hp - kh + 1, wo = wp - kw + 1;
  if (upstream.shape() != std::vector<int>{ho, wo, oc})
    throw InputError("conv2d upstream shape " + shape_string(upstream.shape()) + " does not match output " +
                     shape_string({ho, wo, oc}));

  const auto& table = kernels::active_table<T>();
  ConvGrads<T> g;

  g.bias = Tensor<T>({oc});
  table.conv_grad_bias(upstream.data(), ho, wo, oc, g.bias.data());

  Tensor<T> gkt({kh, kw, cin, oc});
  table.conv_grad_kernels(xpad.data(), hp, wp, cin, upstream.data(), ho, wo, oc, gkt.data(), kh, kw);
  g.kernels = transpose_kernels_back(gkt);

  Tensor<T> gxpad({hp, wp, cin});
  table.conv_grad_input(upstream.data(), ho, wo, oc, p.kernels.data(), kh, kw, cin, gxpad.data(),
                        hp, wp);
  const int h = input.extent(0), w = input.extent(1);
  g.input = Tensor<T>({h, w, cin});
  for (int y = 0; y < h; ++y) {
    const T* src = gxpad.data() + ((static_cast<std::size_t>(y + pad_h) * wp) + pad_w) * cin;
    T* dst = g.input.data() + static_cast<std::size_t>(y) * w * cin;
    for (int i = 0; i < w * cin; ++i) dst[i] = src[i];
  }
  return g;
}

template <typename T>
PoolResult<T> maxpool2x2_forward(const Tensor<T>& input) {
  if (input.rank() != 3) throw InputError("maxpool input must be [h,w,c]");
  const int h = input.extent(0), w = input.extent(1), c = input.extent(2);
  if (h < 2 || w < 2) throw InputError("maxpool needs h,w >= 2, got " + shape_string(input.shape()));
  const int ho = h / 2, wo = w / 2;
  PoolResult<T> r{Tensor<T>({ho, wo, c}), {}};
  r.argmax.resize(r.output.size());
  for (int y = 0; y < ho; ++y) {
    for (int x = 0; x < wo; ++x) {
      for (int ch = 0; ch < c; ++ch) {
        std::size_t best = (static_cast<std::size_t>(2 * y) * w + 2 * x) * c + ch;
        T bestv = input[best];
        for (int dy = 0; dy < 2; ++dy) {
          for (int dx = 0; dx < 2; ++dx) {
            const std::size_t idx =
                (static_cast<std::size_t>(2 * y + dy) * w + (2 * x + dx)) * c + ch;
            if (input[idx] > bestv) {
              bestv = input[idx];
              best = idx;
            }
          }
        }
        const std::size_t o = (static_cast<std::size_t>(y) * wo + x) * c + ch;
        r.output[o] = bestv;
        r.argmax[o] = static_cast<std::uint32_t>(best);
      }
    }
  }
  return r;
}

template <typename T>
Tensor<T> maxpool2x2_backward(const std::vector<std::uint32_t>& argmax,
                              const std::vector<int>& input_shape, const Tensor<T>& upstream) {
  Tensor<T> g(input_shape);
  if (upstream.size() != argmax.size())
    throw InputError("maxpool upstream has " + std::to_string(upstream.size()) +
                     " elements, argmax has " + std::to_string(argmax.size()));
  for (std::size_t i = 0; i < argmax.size(); ++i) {
    if (argmax[i] >= g.size())
      throw InputError("maxpool argmax index " + std::to_string(argmax[i]) +
                       " out of range for input " + shape_string(input_shape));
    g[argmax[i]] += upstream[i];
  }
  return g;
}

template <typename T>
Tensor<T> relu(const Tensor<T>& input) {
  Tensor<T> out(input.shape());
  kernels::active_table<T>().relu_forward(input.data(), out.data(), input.size());
  return out;
}

template <typename T>
Tensor<T> relu_backward(const Tensor<T>& input, const Tensor<T>& upstream) {
  if (!input.same_shape(upstream)) throw InputError("relu upstream shape mismatch");
  Tensor<T> g(input.shape());
  kernels::active_table<T>().relu_backward(input.data(), upstream.data(), g.data(), input.size());
  return g;
}

template <typename T>
DropoutResult<T> dropout(const Tensor<T>& input, double p, Mode mode, Rng& rng) {
  if (!(p >= 0.0 && p < 1.0))
    throw InputError("dropout probability must be in [0,1), got " + std::to_string(p));
  DropoutResult<T> r{Tensor<T>(input.shape()), Tensor<T>(input.shape())};
  if (mode == Mode::eval) {
    r.output = input;
    r.mask = Tensor<T>::full(input.shape(), T(1));
    return r;
  }
  const T keep_scale = static_cast<T>(1.0 / (1.0 - p));
  for (std::size_t i = 0; i < input.size(); ++i) {
    const bool drop = rng.uniform() < p;
    r.mask[i] = drop ? T(0) : keep_scale;
    r.output[i] = input[i] * r.mask[i];
  }
  return r;
}

template <typename T>
Tensor<T> dropout_backward(const Tensor<T>& mask, const Tensor<T>& upstream) {
  if (!mask.same_shape(upstream)) throw InputError("dropout upstream shape mismatch");
  Tensor<T> g(mask.shape());
  for (std::size_t i = 0; i < mask.size(); ++i) g[i] = upstream[i] * mask[i];
  return g;
}

namespace {
template <typename T>
void check_dense_args(const Tensor<T>& input, const DenseParams<T>& p) {
  if (input.rank() != 1) throw InputError("dense input must be rank 1");
  if (p.weights.rank() != 2) throw InputError("dense weights must be [out,in]");
  if (p.weights.extent(1) != input.extent(0))
    throw InputError("dense expects " + std::to_string(p.weights.extent(1)) + " inputs, got " +
                     std::to_string(input.extent(0)));
  if (p.bias.rank() != 1 || p.bias.extent(0) != p.weights.extent(0))
    throw InputError("dense bias must be [out] matching weights");
}
}  // namespace

template <typename T>
Tensor<T> dense_forward(const Tensor<T>& input, const DenseParams<T>& p) {
  check_dense_args(input, p);
  Tensor<T> out({p.weights.extent(0)});
  kernels::active_table<T>().dense_forward(p.weights.data(), input.data(), p.bias.data(),
                                           out.data(), input.extent(0), p.weights.extent(0));
  return out;
}

template <typename T>
DenseGrads<T> dense_backward(const Tensor<T>& input, const DenseParams<T>& p,
                             const Tensor<T>& upstream) {
  check_dense_args(input, p);
  if (upstream.rank() != 1 || upstream.extent(0) != p.weights.extent(0))
    throw InputError("dense upstream must be [out]");
  const auto& table = kernels::active_table<T>();
  DenseGrads<T> g{Tensor<T>(input.shape()), Tensor<T>(p.weights.shape()), upstream};
  table.dense_grad_input(p.weights.data(), upstream.data(), g.input.data(), input.extent(0),
                         p.weights.extent(0));
  table.dense_grad_weights(input.data(), upstream.data(), g.weights.data(), input.extent(0),
                           p.weights.extent(0));
  return g;
}

template <typename T>
Tensor<T> softmax(const Tensor<T>& logits) {
  if (logits.rank() != 1) throw InputError("softmax input must be rank 1");
  const int n = logits.extent(0);
  double m = static_cast<double>(logits[0]);
  for (int i = 1; i < n; ++i) m = std::max(m, static_cast<double>(logits[i]));
  Tensor<T> p(logits.shape());
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += std::exp(static_cast<double>(logits[i]) - m);
  for (int i = 0; i < n; ++i)
    p[static_cast<std::size_t>(i)] =
        static_cast<T>(std::exp(static_cast<double>(logits[i]) - m) / sum);
  return p;
}

template <typename T>
SoftmaxXentResult<T> softmax_cross_entropy(const Tensor<T>& logits, int true_class) {
  if (logits.rank() != 1) throw InputError("softmax_cross_entropy logits must be rank 1");
  const int n = logits.extent(0);
  if (true_class < 0 || true_class >= n)
    throw InputError("true_class " + std::to_string(true_class) + " out of range for " +
                     std::to_string(n) + " classes");
  double m = static_cast<double>(logits[0]);
  for (int i = 1; i < n; ++i) m = std::max(m, static_cast<double>(logits[i]));
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += std::exp(static_cast<double>(logits[i]) - m);
  SoftmaxXentResult<T> r;
  r.probabilities = Tensor<T>(logits.shape());
  r.grad_logits = Tensor<T>(logits.shape());
  for (int i = 0; i < n; ++i) {
    const double p = std::exp(static_cast<double>(logits[i]) - m) / sum;
    r.probabilities[static_cast<std::size_t>(i)] = static_cast<T>(p);
    r.grad_logits[static_cast<std::size_t>(i)] = static_cast<T>(i == true_class ? p - 1.0 : p);
  }
  r.loss = static_cast<T>(-(static_cast<double>(logits[static_cast<std::size_t>(true_class)]) - m -
                            std::log(sum)));
  return r;
}

#define CCNET_INSTANTIATE_OPS(T)                                                              \
  template Tensor<T> conv2d_forward<T>(const Tensor<T>&, const ConvParams<T>&);               \
  template ConvGrads<T> conv2d_backward<T>(const Tensor<T>&, const ConvParams<T>&,            \
                                           const Tensor<T>&);                                 \
  template PoolResult<T> maxpool2x2_forward<T>(const Tensor<T>&);                             \
  template Tensor<T> maxpool2x2_backward<T>(const std::vector<std::uint32_t>&,                \
                                            const std::vector<int>&, const Tensor<T>&);      \
  template Tensor<T> relu<T>(const Tensor<T>&);                                               \
  template Tensor<T> relu_backward<T>(const Tensor<T>&, const Tensor<T>&);                    \
  template DropoutResult<T> dropout<T>(const Tensor<T>&, double, Mode, Rng&);                 \
  template Tensor<T> dropout_backward<T>(const Tensor<T>&, const Tensor<T>&);                 \
  template Tensor<T> dense_forward<T>(const Tensor<T>&, const DenseParams<T>&);               \
  template DenseGrads<T> dense_backward<T>(const Tensor<T>&, const DenseParams<T>&,           \
                                           const Tensor<T>&);                                 \
  template Tensor<T> softmax<T>(const Tensor<T>&);                                            \
  template SoftmaxXentResult<T> softmax_cross_entropy<T>(const Tensor<T>&, int);

CCNET_INSTANTIATE_OPS(float)
CCNET_INSTANTIATE_OPS(double)

#undef CCNET_INSTANTIATE_OPS

}  // namespace ccnet
