// Acceptance gate: one [PASS] line per criterion, first failure aborts.
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "ccnet/colorcode.hpp"
#include "ccnet/dataset.hpp"
#include "ccnet/gradcheck.hpp"
#include "ccnet/image.hpp"
#include "ccnet/metrics.hpp"
#include "ccnet/model.hpp"
#include "ccnet/ops.hpp"
#include "ccnet/rng.hpp"
#include "ccnet/tensor.hpp"
#include "ccnet/trainer.hpp"

namespace {

namespace fs = std::filesystem;
using namespace ccnet;

// Always-on requirement: never compiled out in Release.
#define REQUIRE(cond, msg)                                                      \
  do {                                                                          \
    if (!(cond)) {                                                              \
      std::cerr << "[FAIL] " << __FILE__ << ":" << __LINE__ << " " << msg       \
                << "\n";                                                        \
      std::exit(1);                                                             \
    }                                                                           \
  } while (0)

double seconds_since(const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Tensor<double> random_tensor(const std::vector<int>& shape, Rng& rng, double scale) {
  Tensor<double> t(shape);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.normal() * scale;
  return t;
}

double project(const Tensor<double>& c, const Tensor<double>& t) {
  double sum = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) sum += c[i] * t[i];
  return sum;
}

// FD-checks one primitive through a fixed linear projection of its output.
double check_primitive(const char* name, GradCheckProblem& problem) {
  Rng rng(17);
  const GradReport report = check_gradients(problem, 1e-3, 10, rng);
  REQUIRE(std::isfinite(report.max_rel_error), name << " gradcheck not finite");
  REQUIRE(report.max_rel_error <= 1e-4,
          name << " max rel error " << report.max_rel_error << " exceeds 1e-4 at "
               << report.worst_parameter);
  return report.max_rel_error;
}

void criterion_gradients() {
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;

  {  // conv2d, both paddings
    for (const Padding padding : {Padding::same, Padding::valid}) {
      Rng rng(21);
      Tensor<double> x = random_tensor({6, 5, 2}, rng, 0.5);
      ConvParams<double> p{random_tensor({4, 3, 3, 2}, rng, 0.5), random_tensor({4}, rng, 0.5),
                           padding};
      const Tensor<double> c = random_tensor(conv2d_forward(x, p).shape(), rng, 1.0);
      ConvGrads<double> g = conv2d_backward(x, p, c);
      GradCheckProblem problem;
      problem.loss = [&]() { return project(c, conv2d_forward(x, p)); };
      problem.params = {{"input", &x}, {"kernels", &p.kernels}, {"bias", &p.bias}};
      problem.analytic.emplace_back("input", std::move(g.input));
      problem.analytic.emplace_back("kernels", std::move(g.kernels));
      problem.analytic.emplace_back("bias", std::move(g.bias));
      worst = std::max(worst, check_primitive("conv2d", problem));
    }
  }

  {  // maxpool on tie-free input
    Tensor<double> x({6, 6, 2});
    for (std::size_t i = 0; i < x.size(); ++i)
      x[i] = static_cast<double>((i * 7919) % 97) / 10.0;  // 72 distinct values, gap 0.1
    Rng rng(22);
    auto pooled = maxpool2x2_forward(x);
    const Tensor<double> c = random_tensor(pooled.output.shape(), rng, 1.0);
    GradCheckProblem problem;
    problem.loss = [&]() { return project(c, maxpool2x2_forward(x).output); };
    problem.params = {{"input", &x}};
    problem.analytic.emplace_back("input", maxpool2x2_backward(pooled.argmax, x.shape(), c));
    worst = std::max(worst, check_primitive("maxpool2x2", problem));
  }

  {  // relu away from its kink
    Tensor<double> x({30});
    for (std::size_t i = 0; i < x.size(); ++i)
      x[i] = (i % 2 == 0 ? 1.0 : -1.0) * (0.1 + 0.02 * static_cast<double>(i));
    Rng rng(23);
    const Tensor<double> c = random_tensor(x.shape(), rng, 1.0);
    GradCheckProblem problem;
    problem.loss = [&]() { return project(c, relu(x)); };
    problem.params = {{"input", &x}};
    problem.analytic.emplace_back("input", relu_backward(x, c));
    worst = std::max(worst, check_primitive("relu", problem));
  }

  {  // dense
    Rng rng(24);
    Tensor<double> x = random_tensor({8}, rng, 0.5);
    DenseParams<double> p{random_tensor({4, 8}, rng, 0.5), random_tensor({4}, rng, 0.5)};
    const Tensor<double> c = random_tensor({4}, rng, 1.0);
    DenseGrads<double> g = dense_backward(x, p, c);
    GradCheckProblem problem;
    problem.loss = [&]() { return project(c, dense_forward(x, p)); };
    problem.params = {{"input", &x}, {"weights", &p.weights}, {"bias", &p.bias}};
    problem.analytic.emplace_back("input", std::move(g.input));
    problem.analytic.emplace_back("weights", std::move(g.weights));
    problem.analytic.emplace_back("bias", std::move(g.bias));
    worst = std::max(worst, check_primitive("dense", problem));
  }

  {  // dropout against a frozen mask
    Rng rng(25);
    Tensor<double> x = random_tensor({40}, rng, 0.5);
    Rng mask_rng(26);
    const Tensor<double> mask = dropout(x, 0.25, Mode::train, mask_rng).mask;
    const Tensor<double> c = random_tensor(x.shape(), rng, 1.0);
    GradCheckProblem problem;
    problem.loss = [&]() {
      double sum = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) sum += c[i] * mask[i] * x[i];
      return sum;
    };
    problem.params = {{"input", &x}};
    problem.analytic.emplace_back("input", dropout_backward(mask, c));
    worst = std::max(worst, check_primitive("dropout", problem));
  }

  {  // softmax cross entropy straight on its loss
    Tensor<double> logits({2});
    logits(0) = 0.3;
    logits(1) = -0.2;
    GradCheckProblem problem;
    problem.loss = [&]() { return static_cast<double>(softmax_cross_entropy(logits, 1).loss); };
    problem.params = {{"logits", &logits}};
    problem.analytic.emplace_back("logits", softmax_cross_entropy(logits, 1).grad_logits);
    worst = std::max(worst, check_primitive("softmax_cross_entropy", problem));
  }

  // Full scaled-down network, 64-bit, eps 1e-3.
  NetworkCheckConfig cfg;  // input 32, dense 64, seed 42
  const GradReport net = check_network_gradients(cfg);
  REQUIRE(std::isfinite(net.max_rel_error), "network gradcheck not finite");
  REQUIRE(net.n_checked >= 100,
          "network gradcheck sampled only " << net.n_checked << " parameters");
  REQUIRE(net.max_rel_error <= 1e-4, "network max rel error " << net.max_rel_error
                                         << " exceeds 1e-4 at " << net.worst_parameter);
  worst = std::max(worst, net.max_rel_error);

  const double elapsed = seconds_since(start);
  REQUIRE(elapsed < 120.0, "gradient verification took " << elapsed << "s, budget 120s");
  std::cout << "[PASS] gradient verification: primitives + 32x32/dense-64 network, max rel err "
            << worst << " over " << net.n_checked << " network params, " << elapsed << "s\n";
}

void criterion_shape_audit() {
  const ModelConfig config;  // 180x180, 32/64 channels, dense 512
  const auto model = build_model<float>(config, 1);
  Rng rng(2);
  Tensor<float> image({180, 180, 3});
  for (std::size_t i = 0; i < image.size(); ++i) image[i] = static_cast<float>(rng.uniform());

  std::vector<LayerShape> trace;
  forward_eval(model, image, &trace);

  auto expect = [&](const char* name, const std::vector<int>& dims) {
    for (const auto& layer : trace)
      if (layer.name == name) {
        REQUIRE(layer.dims == dims, name << " traced " << shape_string(layer.dims)
                                         << ", published schedule says " << shape_string(dims));
        return;
      }
    REQUIRE(false, "trace has no layer named " << name);
  };
  expect("conv1", {180, 180, 32});
  expect("conv2", {178, 178, 32});
  expect("pool1", {89, 89, 32});
  expect("conv3", {89, 89, 64});
  expect("conv4", {87, 87, 64});
  expect("pool2", {43, 43, 64});
  expect("flatten", {118336});
  expect("dense1", {512});
  expect("dense2", {2});
  std::cout << "[PASS] shape audit: default-config forward trace matches the published schedule\n";
}

void criterion_mask_oracle() {
  Rng rng(33);
  const int side = 32;
  for (int trial = 0; trial < 1000; ++trial) {
    const int count = static_cast<int>(rng.below(9));
    std::vector<BoundingBox> boxes;
    for (int i = 0; i < count; ++i) {
      BoundingBox b;
      b.x = static_cast<int>(rng.below(side + 6));
      b.y = static_cast<int>(rng.below(side + 6));
      b.w = 1 + static_cast<int>(rng.below(side));
      b.h = 1 + static_cast<int>(rng.below(side));
      boxes.push_back(b);
    }
    const RgbImage mask = render_mask(boxes, side, side);

    long long red = 0;
    for (int y = 0; y < side; ++y)
      for (int x = 0; x < side; ++x) {
        bool covered = false;
        for (const auto& b : boxes)
          if (x >= b.x && x < b.x + b.w && y >= b.y && y < b.y + b.h) covered = true;
        const auto* px = mask.at(x, y);
        if (covered) {
          REQUIRE(px[0] == 255 && px[1] == 0 && px[2] == 0,
                  "trial " << trial << ": covered pixel (" << x << "," << y << ") is not red");
          ++red;
        } else {
          REQUIRE(px[0] == 255 && px[1] == 255 && px[2] == 255,
                  "trial " << trial << ": free pixel (" << x << "," << y << ") is not white");
        }
      }

    // side*side is a power of two, so both divisions are exact.
    const double want = static_cast<double>(red) / (side * side);
    REQUIRE(occupancy_ratio(mask) == want,
            "trial " << trial << ": occupancy " << occupancy_ratio(mask) << " != union area "
                     << want);
  }
  std::cout << "[PASS] mask oracle: 1000 random box sets render pixel-identically; "
               "occupancy equals union area\n";
}

double epoch_accuracy(const EpochReport& r) {
  return static_cast<double>(r.val_confusion.tp + r.val_confusion.tn) /
         static_cast<double>(r.val_confusion.total());
}

void criterion_training_analog() {
  const auto start = std::chrono::steady_clock::now();
  const auto data = synth_generate(200, 64, 7);

  // Stratified 80/20 split; the generator emits the congested class first.
  std::vector<LabeledImage> train_set, val_set;
  Rng rng(7);
  for (int cls = 0; cls < 2; ++cls) {
    std::vector<std::size_t> idx(200);
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<std::size_t>(cls) * 200 + i;
    for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);
    for (std::size_t i = 0; i < idx.size(); ++i)
      (i < 160 ? train_set : val_set).push_back(data[idx[i]]);
  }

  ModelConfig mc;
  mc.input_side = 64;
  mc.dense_units = 128;
  ModelState<float> model = build_model<float>(mc, 42);

  TrainConfig tc;  // lr 0.01, momentum 0.9, batch 32, augment on, seed 42
  tc.epochs = 20;
  const auto reports = train(model, train_set, val_set, tc);

  double best = 0.0;
  int best_epoch = 0;
  for (const auto& r : reports) {
    REQUIRE(std::isfinite(r.mean_loss), "epoch " << r.epoch << " loss is not finite");
    if (epoch_accuracy(r) > best) {
      best = epoch_accuracy(r);
      best_epoch = r.epoch;
    }
  }
  const double elapsed = seconds_since(start);
  REQUIRE(best >= 0.95, "best validation accuracy " << best << " below 0.95 within 20 epochs");
  REQUIRE(elapsed < 900.0, "training analog took " << elapsed << "s, budget 900s");
  std::cout << "[PASS] scaled training analog: validation accuracy " << best << " at epoch "
            << best_epoch << " (640 masks, 64x64, dense 128), " << elapsed << "s\n";
}

void criterion_metrics() {
  REQUIRE(precision({982, 0, 18, 0}) == 0.982, "precision(982,18) != 0.982");
  REQUIRE(recall({956, 0, 0, 44}) == 0.956, "recall(956,44) != 0.956");

  // evaluate() against an independent recount of 1000 prediction/label pairs.
  ModelConfig mc;
  mc.input_side = 16;
  mc.block1_channels = 4;
  mc.block2_channels = 8;
  mc.dense_units = 8;
  const auto model = build_model<float>(mc, 44);
  Rng rng(45);
  std::vector<LabeledImage> samples;
  for (int i = 0; i < 1000; ++i) {
    RgbImage img(16, 16);
    for (auto& b : img.pixels) b = static_cast<std::uint8_t>(rng.below(256));
    samples.push_back({std::move(img), rng.below(2) == 0 ? Label::non_congested : Label::congested});
  }
  const ConfusionMatrix cm = evaluate(model, samples);
  long long tp = 0, tn = 0, fp = 0, fn = 0;
  for (const auto& s : samples) {
    const bool truth = s.label == Label::congested;
    const bool called = predict(model, to_tensor<float>(s.image)).label == Label::congested;
    if (truth && called) ++tp;
    if (truth && !called) ++fn;
    if (!truth && called) ++fp;
    if (!truth && !called) ++tn;
  }
  REQUIRE(cm.tp == tp && cm.tn == tn && cm.fp == fp && cm.fn == fn,
          "evaluate() disagrees with the recount: " << cm.tp << "/" << cm.tn << "/" << cm.fp << "/"
                                                    << cm.fn << " vs " << tp << "/" << tn << "/"
                                                    << fp << "/" << fn);
  REQUIRE(cm.total() == 1000, "recount total is not 1000");

  // as_printed <= standard over 1e4 random matrices, equality exactly when tn == 0.
  Rng mrng(46);
  int checked = 0;
  for (int i = 0; i < 10000; ++i) {
    ConfusionMatrix m;
    m.tp = static_cast<long long>(mrng.below(50));
    m.tn = static_cast<long long>(mrng.below(50));
    m.fp = static_cast<long long>(mrng.below(50));
    m.fn = static_cast<long long>(mrng.below(50));
    if (m.total() == 0) continue;
    ++checked;
    const double std_acc = accuracy(m, AccuracyVariant::standard);
    const double printed = accuracy(m, AccuracyVariant::as_printed);
    REQUIRE(printed <= std_acc, "as_printed " << printed << " exceeds standard " << std_acc);
    REQUIRE((printed == std_acc) == (m.tn == 0), "as_printed/standard equality off at tn=" << m.tn);
  }
  REQUIRE(checked > 9900, "too few non-empty matrices: " << checked);
  std::cout << "[PASS] metrics consistency: table values exact, evaluate recount equal on 1000 "
               "pairs, as-printed bound on "
            << checked << " matrices\n";
}

void criterion_determinism(const fs::path& dir) {
  // Two identical train invocations write byte-identical model files.
  const auto data = synth_generate(4, 32, 20);
  const std::vector<LabeledImage> train_set(data.begin(), data.begin() + 6);
  const std::vector<LabeledImage> val_set(data.begin() + 6, data.end());
  ModelConfig mc;
  mc.input_side = 32;
  mc.dense_units = 16;
  TrainConfig tc;
  tc.epochs = 3;
  tc.batch_size = 4;

  auto read_bytes = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  };

  std::string bytes[2];
  for (int run = 0; run < 2; ++run) {
    ModelState<float> model = build_model<float>(mc, 5);
    train(model, train_set, val_set, tc);
    const fs::path p = dir / ("train_" + std::to_string(run) + ".bin");
    save_model(model, p);
    bytes[run] = read_bytes(p);
  }
  REQUIRE(!bytes[0].empty(), "first trained model file is empty");
  REQUIRE(bytes[0] == bytes[1], "identical train runs wrote different model bytes");

  // save -> load -> params bit-exact.
  const ModelState<float> fresh = build_model<float>(mc, 6);
  const fs::path mp = dir / "roundtrip.bin";
  save_model(fresh, mp);
  const ModelState<float> loaded = load_model(mp);
  const auto va = parameter_views(fresh);
  const auto vb = parameter_views(loaded);
  for (std::size_t i = 0; i < va.size(); ++i)
    REQUIRE(std::memcmp(va[i].second->data(), vb[i].second->data(),
                        va[i].second->size() * sizeof(float)) == 0,
            "save/load changed " << va[i].first);

  // PPM round trip on 100 random images.
  Rng rng(47);
  for (int i = 0; i < 100; ++i) {
    const int w = 1 + static_cast<int>(rng.below(40));
    const int h = 1 + static_cast<int>(rng.below(40));
    RgbImage img(w, h);
    for (auto& b : img.pixels) b = static_cast<std::uint8_t>(rng.below(256));
    REQUIRE(decode_ppm(encode_ppm(img)) == img, "ppm round trip broke image " << i);
  }
  std::cout << "[PASS] determinism: train-twice byte-identical, save/load bit-exact, "
               "100 ppm round trips bit-exact\n";
}

void criterion_augmentation() {
  Rng rng(48);
  for (int i = 0; i < 50; ++i) {
    const int w = 1 + static_cast<int>(rng.below(24));
    const int h = 1 + static_cast<int>(rng.below(24));
    RgbImage img(w, h);
    for (auto& b : img.pixels) b = static_cast<std::uint8_t>(rng.below(256));
    REQUIRE(flip_horizontal(flip_horizontal(img)) == img, "horizontal flip is not an involution");
    REQUIRE(flip_vertical(flip_vertical(img)) == img, "vertical flip is not an involution");
  }

  const int frame = 16;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<BoundingBox> boxes;
    const int count = static_cast<int>(rng.below(5));
    for (int i = 0; i < count; ++i) {
      BoundingBox b;
      b.x = static_cast<int>(rng.below(frame - 1));
      b.y = static_cast<int>(rng.below(frame - 1));
      b.w = 1 + static_cast<int>(rng.below(frame - b.x));
      b.h = 1 + static_cast<int>(rng.below(frame - b.y));
      boxes.push_back(b);
    }
    const RgbImage mask = render_mask(boxes, frame, frame);

    auto hboxes = boxes;
    for (auto& b : hboxes) b.x = frame - b.x - b.w;
    REQUIRE(render_mask(hboxes, frame, frame) == flip_horizontal(mask),
            "horizontal flip does not commute with box-coordinate flip");
    auto vboxes = boxes;
    for (auto& b : vboxes) b.y = frame - b.y - b.h;
    REQUIRE(render_mask(vboxes, frame, frame) == flip_vertical(mask),
            "vertical flip does not commute with box-coordinate flip");

    for (const int target : {7, 16, 23, 64}) {
      const RgbImage resized = resize_nearest(mask, target, target);
      occupancy_ratio(resized);  // throws unless every pixel stays red or white
    }
  }
  std::cout << "[PASS] augmentation suite: flip involutions, render/flip commutation, "
               "resize keeps the red/white alphabet\n";
}

void criterion_ablation() {
  ModelConfig mc;
  mc.input_side = 32;
  mc.dense_units = 16;
  TrainConfig tc;
  tc.epochs = 5;
  tc.batch_size = 8;

  auto run_mode = [&](const std::vector<LabeledImage>& data) {
    std::vector<LabeledImage> train_set, val_set;
    for (int cls = 0; cls < 2; ++cls)
      for (int i = 0; i < 20; ++i)
        (i < 16 ? train_set : val_set).push_back(data[static_cast<std::size_t>(cls) * 20 + i]);
    ModelState<float> model = build_model<float>(mc, 9);
    const auto reports = train(model, train_set, val_set, tc);
    REQUIRE(!reports.empty(), "ablation training produced no reports");
    for (const auto& r : reports)
      REQUIRE(std::isfinite(r.mean_loss), "ablation epoch " << r.epoch << " loss not finite");
    return reports.back();
  };

  const EpochReport mask_last = run_mode(synth_generate(20, 32, 15));
  const EpochReport raw_last = run_mode(synth_generate_raw(20, 32, 15));

  // Comparative report only; the spread between modes is not a claim.
  std::cout << "{\"ablation\":{"
            << "\"mask\":{\"final_loss\":" << mask_last.mean_loss
            << ",\"val_accuracy\":" << epoch_accuracy(mask_last) << "},"
            << "\"raw\":{\"final_loss\":" << raw_last.mean_loss
            << ",\"val_accuracy\":" << epoch_accuracy(raw_last) << "}}}\n";
  std::cout << "[PASS] ablation harness: mask and raw modes trained on the synthetic set, "
               "comparative report above\n";
}

}  // namespace

int main() {
  const fs::path dir =
      fs::temp_directory_path() / ("ccnet_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);

  criterion_gradients();
  criterion_shape_audit();
  criterion_mask_oracle();
  criterion_training_analog();
  criterion_metrics();
  criterion_determinism(dir);
  criterion_augmentation();
  criterion_ablation();

  fs::remove_all(dir);
  std::cout << "all acceptance criteria hold\n";
  return 0;
}
