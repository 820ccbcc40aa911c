#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "ccnet/model.hpp"
#include "ccnet/rng.hpp"
#include "ccnet/tensor.hpp"

namespace ccnet {

struct GradReport {
  double max_rel_error = 0.0;
  double mean_rel_error = 0.0;
  std::size_t n_checked = 0;
  std::string worst_parameter;  // "tensor[flat_index]"
  std::vector<std::pair<std::string, double>> per_layer_worst;
};

// Central finite differences, always in f64: numeric = (f(t+e) - f(t-e)) / 2e,
// rel = |analytic - numeric| / max(|analytic|, |numeric|, 1e-8). Probes
// samples_per_tensor random elements of every tensor (all of them when the
// tensor is smaller), so shallow and deep layers are covered alike. The loss
// must be smooth within eps of the current point (no ReLU sign changes or
// pool argmax switches); callers construct their problems away from such ties.
struct GradCheckProblem {
  std::function<double()> loss;                                 // loss at current params
  std::vector<std::pair<std::string, Tensor<double>*>> params;  // perturbed in place
  std::vector<std::pair<std::string, Tensor<double>>> analytic; // aligned with params
};

GradReport check_gradients(GradCheckProblem& problem, double eps, std::size_t samples_per_tensor,
                           Rng& rng);

// Whole-network check on a (usually scaled-down) model. Central differences
// only measure a derivative where the loss is smooth, so the check builds a
// verification point with no kink inside any probe's step: conv and dense1
// weights are made positive and normalized to unit tap-sum, biases sit at
// +-0.1, and the input is a strictly increasing ramp, which pins every ReLU
// away from zero and gives every pool window a unique margin-backed max.
// Audited margins exceed the largest activation shift an eps-sized parameter
// step can cause (for eps up to ~1e-3), and the construction is asserted at
// runtime. Dropout is disabled so evaluation is deterministic.
struct NetworkCheckConfig {
  ModelConfig model{.input_side = 32, .dense_units = 64};
  std::uint64_t seed = 42;
  double eps = 1e-3;
  std::size_t samples_per_tensor = 10;
};

GradReport check_network_gradients(const NetworkCheckConfig& config);

}  // namespace ccnet
