#include "ccnet/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ccnet/error.hpp"
#include "ccnet/ops.hpp"

namespace ccnet {

GradReport check_gradients(GradCheckProblem& problem, double eps, std::size_t samples_per_tensor,
                           Rng& rng) {
  if (!(eps > 0.0)) throw InputError("gradcheck eps must be positive");
  if (problem.params.size() != problem.analytic.size())
    throw InputError("gradcheck params and analytic grads differ in count");

  GradReport report;
  double rel_sum = 0.0;
  for (std::size_t t = 0; t < problem.params.size(); ++t) {
    const auto& name = problem.params[t].first;
    Tensor<double>& tensor = *problem.params[t].second;
    const Tensor<double>& grad = problem.analytic[t].second;
    if (!tensor.same_shape(grad))
      throw InputError("gradcheck analytic grad shape mismatch for " + name);

    std::vector<std::size_t> picks;
    if (tensor.size() <= samples_per_tensor) {
      picks.resize(tensor.size());
      for (std::size_t i = 0; i < picks.size(); ++i) picks[i] = i;
    } else {
      while (picks.size() < samples_per_tensor) {
        const std::size_t idx = rng.below(tensor.size());
        if (std::find(picks.begin(), picks.end(), idx) == picks.end()) picks.push_back(idx);
      }
    }

    double layer_worst = 0.0;
    for (const std::size_t idx : picks) {
      const double saved = tensor[idx];
      tensor[idx] = saved + eps;
      const double up = problem.loss();
      tensor[idx] = saved - eps;
      const double down = problem.loss();
      tensor[idx] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double analytic = grad[idx];
      const double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
      const double rel = std::fabs(analytic - numeric) / denom;
      rel_sum += rel;
      ++report.n_checked;
      layer_worst = std::max(layer_worst, rel);
      if (rel >= report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_parameter = name + "[" + std::to_string(idx) + "]";
      }
    }
    report.per_layer_worst.emplace_back(name, layer_worst);
  }
  if (report.n_checked > 0) report.mean_rel_error = rel_sum / static_cast<double>(report.n_checked);
  return report;
}

namespace {

// Rewrites a conv kernel tensor [oc,kh,kw,ic] (or dense weights [out,in]) so
// every weight is positive and each output's weights sum to one; outputs then
// stay inside [min_input + bias, max_input + bias].
void positive_unit_rows(Tensor<double>& w) {
  const std::size_t rows = static_cast<std::size_t>(w.extent(0));
  const std::size_t cols = w.size() / rows;
  for (std::size_t r = 0; r < rows; ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      double& v = w[r * cols + c];
      v = std::fabs(v);
      sum += v;
    }
    if (sum <= 0.0) throw NumericError("gradcheck: degenerate all-zero weight row");
    for (std::size_t c = 0; c < cols; ++c) w[r * cols + c] /= sum;
  }
}

// Smallest (max - runner_up) over all 2x2 pool windows of an [h,w,c] tensor.
double min_pool_gap(const Tensor<double>& z) {
  const int h = z.extent(0), w = z.extent(1), c = z.extent(2);
  double gap = std::numeric_limits<double>::infinity();
  for (int y = 0; y + 1 < h; y += 2)
    for (int x = 0; x + 1 < w; x += 2)
      for (int ch = 0; ch < c; ++ch) {
        const double v[4] = {z(y, x, ch), z(y, x + 1, ch), z(y + 1, x, ch), z(y + 1, x + 1, ch)};
        double best = v[0], second = -std::numeric_limits<double>::infinity();
        for (int i = 1; i < 4; ++i) {
          if (v[i] > best) {
            second = best;
            best = v[i];
          } else {
            second = std::max(second, v[i]);
          }
        }
        gap = std::min(gap, best - second);
      }
  return gap;
}

double min_abs(const Tensor<double>& z) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < z.size(); ++i) m = std::min(m, std::fabs(z[i]));
  return m;
}

}  // namespace

GradReport check_network_gradients(const NetworkCheckConfig& config) {
  ModelConfig mc = config.model;
  mc.dropout_p = 0.0;  // eval behavior; keeps every loss evaluation deterministic
  ModelState<double> state = build_model<double>(mc, config.seed);

  constexpr double kBias = 0.1;
  for (ConvParams<double>* conv : {&state.conv1, &state.conv2, &state.conv3, &state.conv4}) {
    positive_unit_rows(conv->kernels);
    conv->bias = Tensor<double>::full(conv->bias.shape(), kBias);
  }
  positive_unit_rows(state.dense1.weights);
  state.dense1.bias = Tensor<double>::full(state.dense1.bias.shape(), kBias);
  // Half the hidden units are parked strictly negative so the in-network check
  // also crosses a resting ReLU; margins keep them resting under perturbation.
  for (int u = 1; u < mc.dense_units; u += 2) {
    const int in_n = state.dense1.weights.extent(1);
    for (int i = 0; i < in_n; ++i) state.dense1.weights(u, i) = -state.dense1.weights(u, i);
    state.dense1.bias(u) = -kBias;
  }

  // Strictly increasing ramp along both axes: neighbors differ by at least
  // 3/4 * step, so unit-sum positive convs keep every pool max unambiguous.
  Rng data_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  Tensor<double> image({mc.input_side, mc.input_side, 3});
  const double step = 0.25 / static_cast<double>(mc.input_side - 1);
  for (int r = 0; r < mc.input_side; ++r)
    for (int c = 0; c < mc.input_side; ++c)
      for (int ch = 0; ch < 3; ++ch)
        image(r, c, ch) = 0.25 + (r + c) * step + data_rng.uniform() * step * 0.25;
  const int label = 1;

  Rng unused(0);
  ForwardCache<double> cache;
  const Tensor<double> logits = forward_train(state, image, unused, cache);

  // Self-audit: every probe moves any activation by at most ~2*eps (weights
  // are unit-sum, activations stay within [0.25, 1.5]), so these floors
  // guarantee the +-eps segment around every parameter is kink-free.
  const double kink_floor = 0.02, gap_floor = 40.0 * config.eps * 0.1;
  for (const Tensor<double>* z : {&cache.z1, &cache.z2, &cache.z3, &cache.z4, &cache.z5})
    if (min_abs(*z) < kink_floor)
      throw NumericError("gradcheck: pre-activation within " + std::to_string(kink_floor) +
                         " of a ReLU kink");
  if (std::min(min_pool_gap(cache.z2), min_pool_gap(cache.z4)) < gap_floor)
    throw NumericError("gradcheck: pool window decided by less than " + std::to_string(gap_floor));

  const auto xent = softmax_cross_entropy(logits, label);
  ModelGrads<double> grads = zero_grads(state);
  backward(state, cache, xent.grad_logits, grads);

  GradCheckProblem problem;
  problem.loss = [&]() {
    Rng r(0);
    ForwardCache<double> c;
    return static_cast<double>(
        softmax_cross_entropy(forward_train(state, image, r, c), label).loss);
  };
  problem.params = parameter_views(state);
  for (auto& [name, grad] : grad_views(grads)) problem.analytic.emplace_back(name, *grad);

  Rng sampler(config.seed + 1);
  return check_gradients(problem, config.eps, config.samples_per_tensor, sampler);
}

}  // namespace ccnet
