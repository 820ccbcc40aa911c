#include "ccnet/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include "ccnet/error.hpp"

namespace ccnet {

static_assert(std::endian::native == std::endian::little,
              "model serialization assumes a little-endian host");

std::string label_name(Label label) {
  return label == Label::congested ? "congested" : "non_congested";
}

Label label_from_name(const std::string& name) {
  if (name == "congested") return Label::congested;
  if (name == "non_congested") return Label::non_congested;
  throw InputError("unknown label '" + name + "'");
}

std::vector<LayerShape> shape_trace(const ModelConfig& c) {
  if (c.input_side < 1) throw InputError("input_side must be >= 1");
  if (c.block1_channels < 1 || c.block2_channels < 1)
    throw InputError("channel counts must be >= 1");
  if (c.dense_units < 1) throw InputError("dense_units must be >= 1");
  if (c.num_classes < 2) throw InputError("num_classes must be >= 2");
  if (!(c.dropout_p >= 0.0 && c.dropout_p < 1.0)) throw InputError("dropout_p must be in [0,1)");

  std::vector<LayerShape> t;
  const int s = c.input_side;
  t.push_back({"input", {s, s, 3}});
  t.push_back({"conv1", {s, s, c.block1_channels}});
  const int v1 = s - 2;
  if (v1 < 2) throw InputError("input_side " + std::to_string(s) + " too small for conv2+pool");
  t.push_back({"conv2", {v1, v1, c.block1_channels}});
  const int p1 = v1 / 2;
  t.push_back({"pool1", {p1, p1, c.block1_channels}});
  t.push_back({"dropout1", {p1, p1, c.block1_channels}});
  t.push_back({"conv3", {p1, p1, c.block2_channels}});
  const int v2 = p1 - 2;
  if (v2 < 2) throw InputError("input_side " + std::to_string(s) + " too small for conv4+pool");
  t.push_back({"conv4", {v2, v2, c.block2_channels}});
  const int p2 = v2 / 2;
  t.push_back({"pool2", {p2, p2, c.block2_channels}});
  t.push_back({"dropout2", {p2, p2, c.block2_channels}});
  t.push_back({"flatten", {p2 * p2 * c.block2_channels}});
  t.push_back({"dense1", {c.dense_units}});
  t.push_back({"dropout3", {c.dense_units}});
  t.push_back({"dense2", {c.num_classes}});
  return t;
}

namespace {

template <typename T>
ModelState<T> empty_model(const ModelConfig& c) {
  const auto trace = shape_trace(c);  // validates
  const int flat = trace[9].dims[0];
  ModelState<T> s;
  s.config = c;
  s.conv1 = {Tensor<T>({c.block1_channels, 3, 3, 3}), Tensor<T>({c.block1_channels}), Padding::same};
  s.conv2 = {Tensor<T>({c.block1_channels, 3, 3, c.block1_channels}), Tensor<T>({c.block1_channels}),
             Padding::valid};
  s.conv3 = {Tensor<T>({c.block2_channels, 3, 3, c.block1_channels}), Tensor<T>({c.block2_channels}),
             Padding::same};
  s.conv4 = {Tensor<T>({c.block2_channels, 3, 3, c.block2_channels}), Tensor<T>({c.block2_channels}),
             Padding::valid};
  s.dense1 = {Tensor<T>({c.dense_units, flat}), Tensor<T>({c.dense_units})};
  s.dense2 = {Tensor<T>({c.num_classes, c.dense_units}), Tensor<T>({c.num_classes})};
  return s;
}

template <typename T>
Tensor<T> flatten(const Tensor<T>& t) {
  Tensor<T> f({static_cast<int>(t.size())});
  std::memcpy(f.data(), t.data(), t.size() * sizeof(T));
  return f;
}

template <typename T>
Tensor<T> unflatten(const Tensor<T>& f, const std::vector<int>& shape) {
  Tensor<T> t(shape);
  std::memcpy(t.data(), f.data(), f.size() * sizeof(T));
  return t;
}

}  // namespace

template <typename T>
std::vector<std::pair<std::string, Tensor<T>*>> parameter_views(ModelState<T>& s) {
  return {
      {"conv1.kernels", &s.conv1.kernels}, {"conv1.bias", &s.conv1.bias},
      {"conv2.kernels", &s.conv2.kernels}, {"conv2.bias", &s.conv2.bias},
      {"conv3.kernels", &s.conv3.kernels}, {"conv3.bias", &s.conv3.bias},
      {"conv4.kernels", &s.conv4.kernels}, {"conv4.bias", &s.conv4.bias},
      {"dense1.weights", &s.dense1.weights}, {"dense1.bias", &s.dense1.bias},
      {"dense2.weights", &s.dense2.weights}, {"dense2.bias", &s.dense2.bias},
  };
}

template <typename T>
std::vector<std::pair<std::string, const Tensor<T>*>> parameter_views(const ModelState<T>& s) {
  std::vector<std::pair<std::string, const Tensor<T>*>> views;
  for (auto& [name, tensor] : parameter_views(const_cast<ModelState<T>&>(s)))
    views.emplace_back(name, tensor);
  return views;
}

template <typename T>
std::vector<std::pair<std::string, Tensor<T>*>> grad_views(ModelGrads<T>& g) {
  return {
      {"conv1.kernels", &g.conv1_k}, {"conv1.bias", &g.conv1_b},
      {"conv2.kernels", &g.conv2_k}, {"conv2.bias", &g.conv2_b},
      {"conv3.kernels", &g.conv3_k}, {"conv3.bias", &g.conv3_b},
      {"conv4.kernels", &g.conv4_k}, {"conv4.bias", &g.conv4_b},
      {"dense1.weights", &g.dense1_w}, {"dense1.bias", &g.dense1_b},
      {"dense2.weights", &g.dense2_w}, {"dense2.bias", &g.dense2_b},
  };
}

template <typename T>
ModelState<T> build_model(const ModelConfig& config, std::uint64_t seed) {
  ModelState<T> s = empty_model<T>(config);
  Rng rng(seed);
  for (auto& [name, tensor] : parameter_views(s)) {
    if (name.ends_with(".bias")) continue;  // biases stay zero, no draws
    std::size_t fan_in;
    if (tensor->rank() == 4) {
      fan_in = static_cast<std::size_t>(tensor->extent(1)) * tensor->extent(2) * tensor->extent(3);
    } else {
      fan_in = static_cast<std::size_t>(tensor->extent(1));
    }
    const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
    for (std::size_t i = 0; i < tensor->size(); ++i)
      (*tensor)[i] = static_cast<T>(rng.normal() * stddev);
  }
  return s;
}

template <typename T>
ModelGrads<T> zero_grads(const ModelState<T>& s) {
  ModelGrads<T> g;
  g.conv1_k = Tensor<T>(s.conv1.kernels.shape());
  g.conv1_b = Tensor<T>(s.conv1.bias.shape());
  g.conv2_k = Tensor<T>(s.conv2.kernels.shape());
  g.conv2_b = Tensor<T>(s.conv2.bias.shape());
  g.conv3_k = Tensor<T>(s.conv3.kernels.shape());
  g.conv3_b = Tensor<T>(s.conv3.bias.shape());
  g.conv4_k = Tensor<T>(s.conv4.kernels.shape());
  g.conv4_b = Tensor<T>(s.conv4.bias.shape());
  g.dense1_w = Tensor<T>(s.dense1.weights.shape());
  g.dense1_b = Tensor<T>(s.dense1.bias.shape());
  g.dense2_w = Tensor<T>(s.dense2.weights.shape());
  g.dense2_b = Tensor<T>(s.dense2.bias.shape());
  return g;
}

namespace {
template <typename T>
void check_image_input(const ModelState<T>& s, const Tensor<T>& image) {
  const std::vector<int> want{s.config.input_side, s.config.input_side, 3};
  if (image.shape() != want)
    throw InputError("model expects input " + shape_string(want) + ", got " +
                     shape_string(image.shape()));
}
}  // namespace

template <typename T>
Tensor<T> forward_eval(const ModelState<T>& s, const Tensor<T>& image,
                       std::vector<LayerShape>* trace) {
  check_image_input(s, image);
  auto record = [&](const char* name, const std::vector<int>& dims) {
    if (trace != nullptr) trace->push_back({name, dims});
  };
  record("input", image.shape());
  Tensor<T> a1 = relu(conv2d_forward(image, s.conv1));
  record("conv1", a1.shape());
  Tensor<T> a2 = relu(conv2d_forward(a1, s.conv2));
  record("conv2", a2.shape());
  Tensor<T> p1 = maxpool2x2_forward(a2).output;
  record("pool1", p1.shape());
  record("dropout1", p1.shape());
  Tensor<T> a3 = relu(conv2d_forward(p1, s.conv3));
  record("conv3", a3.shape());
  Tensor<T> a4 = relu(conv2d_forward(a3, s.conv4));
  record("conv4", a4.shape());
  Tensor<T> p2 = maxpool2x2_forward(a4).output;
  record("pool2", p2.shape());
  record("dropout2", p2.shape());
  Tensor<T> f = flatten(p2);
  record("flatten", f.shape());
  Tensor<T> a5 = relu(dense_forward(f, s.dense1));
  record("dense1", a5.shape());
  record("dropout3", a5.shape());
  Tensor<T> logits = dense_forward(a5, s.dense2);
  record("dense2", logits.shape());
  return logits;
}

template <typename T>
Tensor<T> forward_train(const ModelState<T>& s, const Tensor<T>& image, Rng& rng,
                        ForwardCache<T>& cache) {
  check_image_input(s, image);
  const double p = s.config.dropout_p;
  cache.input = image;
  cache.z1 = conv2d_forward(image, s.conv1);
  cache.a1 = relu(cache.z1);
  cache.z2 = conv2d_forward(cache.a1, s.conv2);
  Tensor<T> a2 = relu(cache.z2);
  cache.a2_shape = a2.shape();
  auto pool1 = maxpool2x2_forward(a2);
  cache.am1 = std::move(pool1.argmax);
  auto drop1 = dropout(pool1.output, p, Mode::train, rng);
  cache.mask1 = std::move(drop1.mask);
  cache.d1 = std::move(drop1.output);
  cache.z3 = conv2d_forward(cache.d1, s.conv3);
  cache.a3 = relu(cache.z3);
  cache.z4 = conv2d_forward(cache.a3, s.conv4);
  Tensor<T> a4 = relu(cache.z4);
  cache.a4_shape = a4.shape();
  auto pool2 = maxpool2x2_forward(a4);
  cache.am2 = std::move(pool2.argmax);
  auto drop2 = dropout(pool2.output, p, Mode::train, rng);
  cache.mask2 = std::move(drop2.mask);
  cache.f = flatten(drop2.output);
  cache.z5 = dense_forward(cache.f, s.dense1);
  Tensor<T> a5 = relu(cache.z5);
  auto drop3 = dropout(a5, p, Mode::train, rng);
  cache.mask3 = std::move(drop3.mask);
  cache.d3 = std::move(drop3.output);
  return dense_forward(cache.d3, s.dense2);
}

template <typename T>
void backward(const ModelState<T>& s, const ForwardCache<T>& cache, const Tensor<T>& grad_logits,
              ModelGrads<T>& grads) {
  DenseGrads<T> g6 = dense_backward(cache.d3, s.dense2, grad_logits);
  grads.dense2_w = std::move(g6.weights);
  grads.dense2_b = std::move(g6.bias);

  Tensor<T> g_a5 = dropout_backward(cache.mask3, g6.input);
  Tensor<T> g_z5 = relu_backward(cache.z5, g_a5);
  DenseGrads<T> g5 = dense_backward(cache.f, s.dense1, g_z5);
  grads.dense1_w = std::move(g5.weights);
  grads.dense1_b = std::move(g5.bias);

  const std::vector<int> p2_shape{cache.a4_shape[0] / 2, cache.a4_shape[1] / 2, cache.a4_shape[2]};
  Tensor<T> g_d2 = unflatten(g5.input, p2_shape);
  Tensor<T> g_p2 = dropout_backward(cache.mask2, g_d2);
  Tensor<T> g_a4 = maxpool2x2_backward(cache.am2, cache.a4_shape, g_p2);
  Tensor<T> g_z4 = relu_backward(cache.z4, g_a4);
  ConvGrads<T> g4 = conv2d_backward(cache.a3, s.conv4, g_z4);
  grads.conv4_k = std::move(g4.kernels);
  grads.conv4_b = std::move(g4.bias);

  Tensor<T> g_z3 = relu_backward(cache.z3, g4.input);
  ConvGrads<T> g3 = conv2d_backward(cache.d1, s.conv3, g_z3);
  grads.conv3_k = std::move(g3.kernels);
  grads.conv3_b = std::move(g3.bias);

  Tensor<T> g_p1 = dropout_backward(cache.mask1, g3.input);
  Tensor<T> g_a2 = maxpool2x2_backward(cache.am1, cache.a2_shape, g_p1);
  Tensor<T> g_z2 = relu_backward(cache.z2, g_a2);
  ConvGrads<T> g2 = conv2d_backward(cache.a1, s.conv2, g_z2);
  grads.conv2_k = std::move(g2.kernels);
  grads.conv2_b = std::move(g2.bias);

  Tensor<T> g_z1 = relu_backward(cache.z1, g2.input);
  ConvGrads<T> g1 = conv2d_backward(cache.input, s.conv1, g_z1);
  grads.conv1_k = std::move(g1.kernels);
  grads.conv1_b = std::move(g1.bias);
}

template <typename T>
Prediction<T> predict(const ModelState<T>& s, const Tensor<T>& image) {
  if (s.config.num_classes != 2) throw InputError("predict expects a 2-class model");
  Tensor<T> logits = forward_eval(s, image);
  Tensor<T> probs = softmax(logits);
  const Label label = probs(1) >= probs(0) ? Label::congested : Label::non_congested;
  return {label, std::move(probs)};
}

namespace {

constexpr char kMagic[] = "CCNET1\n";
constexpr std::size_t kMagicLen = 7;

nlohmann::json config_to_json(const ModelConfig& c) {
  return {{"input_side", c.input_side},       {"block1_channels", c.block1_channels},
          {"block2_channels", c.block2_channels}, {"dense_units", c.dense_units},
          {"num_classes", c.num_classes},     {"dropout_p", c.dropout_p}};
}

ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  try {
    c.input_side = j.at("input_side").get<int>();
    c.block1_channels = j.at("block1_channels").get<int>();
    c.block2_channels = j.at("block2_channels").get<int>();
    c.dense_units = j.at("dense_units").get<int>();
    c.num_classes = j.at("num_classes").get<int>();
    c.dropout_p = j.at("dropout_p").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("model header config invalid: ") + e.what());
  }
  return c;
}

}  // namespace

void save_model(const ModelState<float>& s, const std::filesystem::path& path) {
  nlohmann::json header;
  header["byte_order"] = "little";
  header["precision"] = "float32";
  header["config"] = config_to_json(s.config);
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& [name, tensor] : parameter_views(s))
    layers.push_back({{"name", name}, {"shape", tensor->shape()}});
  header["layers"] = layers;

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot open model file for writing: " + path.string());
  out.write(kMagic, kMagicLen);
  const std::string line = header.dump();
  out.write(line.data(), static_cast<std::streamsize>(line.size()));
  out.put('\n');
  for (const auto& [name, tensor] : parameter_views(s))
    out.write(reinterpret_cast<const char*>(tensor->data()),
              static_cast<std::streamsize>(tensor->size() * sizeof(float)));
  if (!out) throw InputError("failed writing model file: " + path.string());
}

ModelState<float> load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open model file: " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (bytes.size() < kMagicLen || bytes.compare(0, kMagicLen, kMagic, kMagicLen) != 0)
    throw InputError("not a ccnet model (bad magic): " + path.string());
  const std::size_t header_end = bytes.find('\n', kMagicLen);
  if (header_end == std::string::npos)
    throw InputError("model header line is unterminated: " + path.string());

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(kMagicLen, header_end - kMagicLen));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("model header is not valid JSON: ") + e.what());
  }
  if (header.value("precision", "") != "float32")
    throw InputError("model precision must be float32");
  if (header.value("byte_order", "") != "little")
    throw InputError("model byte order must be little");
  if (!header.contains("config") || !header.contains("layers"))
    throw InputError("model header missing config or layers");

  ModelState<float> s = empty_model<float>(config_from_json(header["config"]));
  auto views = parameter_views(s);
  const auto& layers = header["layers"];
  if (!layers.is_array() || layers.size() != views.size())
    throw InputError("model header lists " + std::to_string(layers.size()) + " layers, expected " +
                     std::to_string(views.size()));
  for (std::size_t i = 0; i < views.size(); ++i) {
    const std::string name = layers[i].value("name", "");
    const auto shape = layers[i].value("shape", std::vector<int>{});
    if (name != views[i].first || shape != views[i].second->shape())
      throw InputError("model header layer " + std::to_string(i) + " ('" + name +
                       "') does not match expected '" + views[i].first + "' " +
                       shape_string(views[i].second->shape()));
  }

  std::size_t expected = 0;
  for (const auto& [name, tensor] : views) expected += tensor->size() * sizeof(float);
  const std::size_t have = bytes.size() - header_end - 1;
  if (have < expected)
    throw InputError("model payload truncated: expected " + std::to_string(expected) +
                     " data bytes, got " + std::to_string(have));
  if (have > expected)
    throw InputError("trailing bytes after model payload: expected " + std::to_string(expected) +
                     " data bytes, got " + std::to_string(have));

  std::size_t off = header_end + 1;
  for (auto& [name, tensor] : views) {
    std::memcpy(tensor->data(), bytes.data() + off, tensor->size() * sizeof(float));
    off += tensor->size() * sizeof(float);
  }
  return s;
}

#define CCNET_INSTANTIATE_MODEL(T)                                                             \
  template std::vector<std::pair<std::string, Tensor<T>*>> parameter_views<T>(ModelState<T>&); \
  template std::vector<std::pair<std::string, const Tensor<T>*>> parameter_views<T>(           \
      const ModelState<T>&);                                                                   \
  template std::vector<std::pair<std::string, Tensor<T>*>> grad_views<T>(ModelGrads<T>&);      \
  template ModelState<T> build_model<T>(const ModelConfig&, std::uint64_t);                    \
  template ModelGrads<T> zero_grads<T>(const ModelState<T>&);                                  \
  template Tensor<T> forward_eval<T>(const ModelState<T>&, const Tensor<T>&,                   \
                                     std::vector<LayerShape>*);                                \
  template Tensor<T> forward_train<T>(const ModelState<T>&, const Tensor<T>&, Rng&,            \
                                      ForwardCache<T>&);                                       \
  template void backward<T>(const ModelState<T>&, const ForwardCache<T>&, const Tensor<T>&,    \
                            ModelGrads<T>&);                                                   \
  template Prediction<T> predict<T>(const ModelState<T>&, const Tensor<T>&);

CCNET_INSTANTIATE_MODEL(float)
CCNET_INSTANTIATE_MODEL(double)

#undef CCNET_INSTANTIATE_MODEL

}  // namespace ccnet
