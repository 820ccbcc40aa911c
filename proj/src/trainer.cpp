#include "ccnet/trainer.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

#include "ccnet/error.hpp"
#include "ccnet/kernels.hpp"
#include "ccnet/ops.hpp"

namespace ccnet {

RgbImage augment_apply(const RgbImage& image, bool horizontal, bool vertical) {
  RgbImage out = horizontal ? flip_horizontal(image) : image;
  if (vertical) out = flip_vertical(out);
  return out;
}

RgbImage augment_sample(const RgbImage& image, Rng& rng) {
  const bool horizontal = rng.uniform() < 0.5;
  const bool vertical = rng.uniform() < 0.5;
  return augment_apply(image, horizontal, vertical);
}

template <typename T>
void sgd_step(ModelState<T>& model, const ModelGrads<T>& grads, ModelGrads<T>& velocity, double lr,
              double momentum) {
  auto params = parameter_views(model);
  auto gviews = grad_views(const_cast<ModelGrads<T>&>(grads));
  auto vviews = grad_views(velocity);
  const auto& table = kernels::active_table<T>();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Tensor<T>& g = *gviews[i].second;
    if (!g.same_shape(*params[i].second))
      throw InputError("sgd_step gradient shape mismatch for " + params[i].first);
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (!std::isfinite(static_cast<double>(g[j])))
        throw NumericError("non-finite gradient in " + params[i].first);
    }
    table.sgd_update(params[i].second->data(), vviews[i].second->data(), g.data(), g.size(),
                     static_cast<T>(lr), static_cast<T>(momentum));
  }
}

template <typename T>
ConfusionMatrix evaluate(const ModelState<T>& model, const std::vector<LabeledImage>& samples) {
  if (samples.empty()) throw InputError("evaluate: empty sample set");
  ConfusionMatrix cm;
  for (const LabeledImage& s : samples) {
    const Label got = predict(model, to_tensor<T>(s.image)).label;
    if (s.label == Label::congested) {
      got == Label::congested ? ++cm.tp : ++cm.fn;
    } else {
      got == Label::non_congested ? ++cm.tn : ++cm.fp;
    }
  }
  return cm;
}

namespace {

template <typename T>
void accumulate_grads(ModelGrads<T>& dst, ModelGrads<T>& src) {
  auto d = grad_views(dst);
  auto s = grad_views(src);
  const auto& table = kernels::active_table<T>();
  for (std::size_t i = 0; i < d.size(); ++i)
    table.vec_add(d[i].second->data(), s[i].second->data(), d[i].second->size());
}

template <typename T>
void scale_grads(ModelGrads<T>& g, T factor) {
  const auto& table = kernels::active_table<T>();
  for (auto& [name, tensor] : grad_views(g)) table.vec_scale(tensor->data(), factor, tensor->size());
}

void check_train_config(const TrainConfig& c) {
  if (c.epochs < 0) throw InputError("epochs must be >= 0, got " + std::to_string(c.epochs));
  if (!(c.lr > 0.0) || !std::isfinite(c.lr))
    throw InputError("lr must be positive and finite, got " + std::to_string(c.lr));
  if (!(c.momentum >= 0.0 && c.momentum < 1.0))
    throw InputError("momentum must be in [0,1), got " + std::to_string(c.momentum));
  if (c.batch_size < 1) throw InputError("batch_size must be >= 1, got " + std::to_string(c.batch_size));
}

template <typename T>
void check_sample_sizes(const ModelState<T>& model, const std::vector<LabeledImage>& set,
                        const char* which) {
  const int side = model.config.input_side;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const RgbImage& img = set[i].image;
    if (img.width != side || img.height != side)
      throw InputError(std::string(which) + " image " + std::to_string(i) + " is " +
                       std::to_string(img.width) + "x" + std::to_string(img.height) +
                       ", model expects " + std::to_string(side) + "x" + std::to_string(side));
  }
}

}  // namespace

template <typename T>
std::vector<EpochReport> train(ModelState<T>& model, const std::vector<LabeledImage>& train_set,
                               const std::vector<LabeledImage>& val_set,
                               const TrainConfig& config) {
  check_train_config(config);
  if (config.epochs == 0) return {};
  if (train_set.empty()) throw InputError("train: empty training set");
  if (val_set.empty()) throw InputError("train: empty validation set");
  check_sample_sizes(model, train_set, "training");
  check_sample_sizes(model, val_set, "validation");

  Rng rng(config.seed);
  ModelGrads<T> velocity = zero_grads(model);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::vector<EpochReport> reports;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[rng.below(i)]);

    double loss_sum = 0.0;
    std::size_t cursor = 0;
    while (cursor < order.size()) {
      const std::size_t batch_n =
          std::min<std::size_t>(static_cast<std::size_t>(config.batch_size),
                                order.size() - cursor);
      ModelGrads<T> batch_grads = zero_grads(model);
      for (std::size_t b = 0; b < batch_n; ++b, ++cursor) {
        const LabeledImage& sample = train_set[order[cursor]];
        const RgbImage img =
            config.augment ? augment_sample(sample.image, rng) : sample.image;
        ForwardCache<T> cache;
        const Tensor<T> logits = forward_train(model, to_tensor<T>(img), rng, cache);
        const int true_class = sample.label == Label::congested ? 1 : 0;
        const auto xent = softmax_cross_entropy(logits, true_class);
        if (!std::isfinite(static_cast<double>(xent.loss)))
          throw NumericError("non-finite loss at epoch " + std::to_string(epoch));
        loss_sum += static_cast<double>(xent.loss);
        ModelGrads<T> sample_grads = zero_grads(model);
        backward(model, cache, xent.grad_logits, sample_grads);
        accumulate_grads(batch_grads, sample_grads);
      }
      scale_grads(batch_grads, static_cast<T>(1.0 / static_cast<double>(batch_n)));
      sgd_step(model, batch_grads, velocity, config.lr, config.momentum);
    }

    EpochReport report;
    report.epoch = epoch;
    report.mean_loss = loss_sum / static_cast<double>(order.size());
    report.val_confusion = evaluate(model, val_set);
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    reports.push_back(report);
  }
  return reports;
}

#define CCNET_INSTANTIATE_TRAINER(T)                                                       \
  template void sgd_step<T>(ModelState<T>&, const ModelGrads<T>&, ModelGrads<T>&, double,  \
                            double);                                                       \
  template ConfusionMatrix evaluate<T>(const ModelState<T>&, const std::vector<LabeledImage>&); \
  template std::vector<EpochReport> train<T>(ModelState<T>&, const std::vector<LabeledImage>&, \
                                             const std::vector<LabeledImage>&,             \
                                             const TrainConfig&);

CCNET_INSTANTIATE_TRAINER(float)
CCNET_INSTANTIATE_TRAINER(double)

#undef CCNET_INSTANTIATE_TRAINER

}  // namespace ccnet
