#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "ccnet/ops.hpp"
#include "ccnet/rng.hpp"
#include "ccnet/tensor.hpp"

namespace ccnet {

// Two conv blocks (same-padded 3x3, then valid 3x3, each ReLU, then 2x2 pool
// and dropout), a hidden dense layer with ReLU and dropout, and a 2-way
// softmax head. input_side and dense_units scale the network down for tests.
struct ModelConfig {
  int input_side = 180;
  int block1_channels = 32;
  int block2_channels = 64;
  int dense_units = 512;
  int num_classes = 2;
  double dropout_p = 0.25;
};

enum class Label : int { non_congested = 0, congested = 1 };

std::string label_name(Label label);
Label label_from_name(const std::string& name);  // also accepts "medium" rejection upstream

template <typename T>
struct ModelState {
  ModelConfig config;
  ConvParams<T> conv1, conv2, conv3, conv4;
  DenseParams<T> dense1, dense2;
};

template <typename T>
struct ModelGrads {
  Tensor<T> conv1_k, conv1_b, conv2_k, conv2_b, conv3_k, conv3_b, conv4_k, conv4_b;
  Tensor<T> dense1_w, dense1_b, dense2_w, dense2_b;
};

// Parameter tensors in their normative order (also the model file's layer
// order): convN.kernels, convN.bias for N=1..4, then dense1.weights,
// dense1.bias, dense2.weights, dense2.bias.
template <typename T>
std::vector<std::pair<std::string, Tensor<T>*>> parameter_views(ModelState<T>& s);
template <typename T>
std::vector<std::pair<std::string, const Tensor<T>*>> parameter_views(const ModelState<T>& s);
template <typename T>
std::vector<std::pair<std::string, Tensor<T>*>> grad_views(ModelGrads<T>& g);

struct LayerShape {
  std::string name;
  std::vector<int> dims;
};

// Static shape schedule for a config; throws InputError when a layer would
// collapse below its minimum extent.
std::vector<LayerShape> shape_trace(const ModelConfig& config);

// He-normal kernels/weights (std = sqrt(2 / fan_in)), zero biases. Draws come
// from xoshiro256** seeded with `seed`, one normal per element, tensors in
// parameter_views order, elements in flat order.
template <typename T>
ModelState<T> build_model(const ModelConfig& config, std::uint64_t seed);

template <typename T>
ModelGrads<T> zero_grads(const ModelState<T>& s);

// Everything backward needs, captured during a training-mode forward.
template <typename T>
struct ForwardCache {
  Tensor<T> input;
  Tensor<T> z1, a1, z2;
  std::vector<int> a2_shape;
  std::vector<std::uint32_t> am1;
  Tensor<T> mask1, d1;
  Tensor<T> z3, a3, z4;
  std::vector<int> a4_shape;
  std::vector<std::uint32_t> am2;
  Tensor<T> mask2;
  Tensor<T> f, z5, mask3, d3;
};

// Eval-mode forward (dropout disabled); records the per-layer output shapes
// when trace is non-null. Returns logits.
template <typename T>
Tensor<T> forward_eval(const ModelState<T>& s, const Tensor<T>& image,
                       std::vector<LayerShape>* trace = nullptr);

// Training-mode forward; dropout masks draw from rng in layer order.
template <typename T>
Tensor<T> forward_train(const ModelState<T>& s, const Tensor<T>& image, Rng& rng,
                        ForwardCache<T>& cache);

template <typename T>
void backward(const ModelState<T>& s, const ForwardCache<T>& cache, const Tensor<T>& grad_logits,
              ModelGrads<T>& grads);

template <typename T>
struct Prediction {
  Label label;
  Tensor<T> probabilities;  // [non_congested, congested]
};

// Ties go to congested.
template <typename T>
Prediction<T> predict(const ModelState<T>& s, const Tensor<T>& image);

// File format: 7-byte magic "CCNET1\n", one line of JSON (config, layer
// names/shapes in parameter order, precision, byte order), then each layer's
// raw little-endian float32 data in that order. Round-trips bit-exactly.
void save_model(const ModelState<float>& s, const std::filesystem::path& path);
ModelState<float> load_model(const std::filesystem::path& path);

}  // namespace ccnet
