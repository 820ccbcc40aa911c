#pragma once

#include <cstdint>
#include <vector>

#include "ccnet/dataset.hpp"
#include "ccnet/metrics.hpp"
#include "ccnet/model.hpp"
#include "ccnet/rng.hpp"

namespace ccnet {

struct TrainConfig {
  int epochs = 10;  // 0 trains nothing and returns no reports
  double lr = 0.01;
  double momentum = 0.9;
  int batch_size = 32;
  bool augment = true;
  std::uint64_t seed = 42;
};

struct EpochReport {
  int epoch = 0;  // 1-based
  double mean_loss = 0.0;
  ConfusionMatrix val_confusion;
  double seconds = 0.0;
};

// Independent 0.5-probability horizontal then vertical flip. Two uniform
// draws per call, horizontal first.
RgbImage augment_sample(const RgbImage& image, Rng& rng);
RgbImage augment_apply(const RgbImage& image, bool horizontal, bool vertical);

// v <- momentum*v - lr*g; theta <- theta + v, per parameter tensor. Throws
// NumericError naming the layer when a gradient is non-finite.
template <typename T>
void sgd_step(ModelState<T>& model, const ModelGrads<T>& grads, ModelGrads<T>& velocity, double lr,
              double momentum);

// Eval-mode predictions over samples, counted with congested as positive.
template <typename T>
ConfusionMatrix evaluate(const ModelState<T>& model, const std::vector<LabeledImage>& samples);

// Minibatch SGD over shuffled epochs; the last short batch still trains.
// Gradients are averaged over the batch. Single xoshiro256** stream seeded
// with config.seed; draws per epoch are the shuffle, then per sample two
// augmentation flips (when augment is on) followed by that sample's dropout
// masks in layer order. Identical inputs and config replay bit-identically.
template <typename T>
std::vector<EpochReport> train(ModelState<T>& model, const std::vector<LabeledImage>& train_set,
                               const std::vector<LabeledImage>& val_set,
                               const TrainConfig& config);

}  // namespace ccnet
