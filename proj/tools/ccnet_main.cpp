#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <string>
#include <vector>

#include "ccnet/colorcode.hpp"
#include "ccnet/dataset.hpp"
#include "ccnet/detect.hpp"
#include "ccnet/error.hpp"
#include "ccnet/gradcheck.hpp"
#include "ccnet/image.hpp"
#include "ccnet/metrics.hpp"
#include "ccnet/model.hpp"
#include "ccnet/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitVerification = 4;

ccnet::Roi parse_roi(const std::string& text) {
  ccnet::Roi roi;
  char extra = 0;
  if (std::sscanf(text.c_str(), "%d,%d,%d,%d%c", &roi.x, &roi.y, &roi.w, &roi.h, &extra) != 4)
    throw ccnet::InputError("--roi must be X,Y,W,H, got '" + text + "'");
  return roi;
}

std::string safe_frame_name(const std::string& frame) {
  if (frame.empty()) throw ccnet::InputError("frame id is empty");
  if (frame.find('/') != std::string::npos || frame.find('\\') != std::string::npos ||
      frame == "." || frame == "..")
    throw ccnet::InputError("frame id '" + frame + "' cannot name an output file");
  return frame;
}

struct MaskArgs {
  std::string detections;
  std::string out_dir;
  std::string roi_text;
  int size = 180;
  double min_score = 0.0;
};

int cmd_mask(const MaskArgs& args) {
  const auto records = ccnet::parse_detections_file(args.detections);
  fs::create_directories(args.out_dir);
  const bool has_roi = !args.roi_text.empty();
  const ccnet::Roi roi = has_roi ? parse_roi(args.roi_text) : ccnet::Roi{};
  if (args.size < 1) throw ccnet::InputError("--size must be >= 1");

  std::size_t written = 0;
  for (const ccnet::DetectionRecord& rec : records) {
    std::vector<ccnet::BoundingBox> boxes;
    for (const ccnet::ScoredBox& sb : rec.boxes)
      if (sb.score >= args.min_score) boxes.push_back(sb.box);

    int frame_w = rec.width, frame_h = rec.height;
    if (has_roi) {
      if (roi.x < 0 || roi.y < 0 || roi.w < 1 || roi.h < 1 || roi.x + roi.w > rec.width ||
          roi.y + roi.h > rec.height)
        throw ccnet::InputError("frame '" + rec.frame + "': roi exceeds " +
                                std::to_string(rec.width) + "x" + std::to_string(rec.height));
      boxes = ccnet::boxes_to_roi(boxes, roi);
      frame_w = roi.w;
      frame_h = roi.h;
    }
    ccnet::RgbImage mask = ccnet::render_mask(boxes, frame_w, frame_h);
    if (mask.width != args.size || mask.height != args.size)
      mask = ccnet::resize_nearest(mask, args.size, args.size);
    ccnet::write_ppm(mask, fs::path(args.out_dir) / (safe_frame_name(rec.frame) + ".ppm"));
    ++written;
  }
  std::cout << json{{"frames_written", written}}.dump() << "\n";
  return kExitOk;
}

struct TrainArgs {
  std::string manifest;
  std::string out_model;
  std::string reports_path;
  ccnet::TrainConfig train;
  double train_fraction = 0.8;
  int input_side = 180;
  int block1 = 32;
  int block2 = 64;
  int dense_units = 512;
  double dropout_p = 0.25;
  bool ablation_raw = false;
  bool timing = false;
};

json epoch_report_json(const ccnet::EpochReport& r, bool timing) {
  json j{{"epoch", r.epoch},
         {"loss", r.mean_loss},
         {"tp", r.val_confusion.tp},
         {"tn", r.val_confusion.tn},
         {"fp", r.val_confusion.fp},
         {"fn", r.val_confusion.fn}};
  if (timing) j["seconds"] = r.seconds;
  return j;
}

int cmd_train(const TrainArgs& args) {
  ccnet::ManifestSummary summary;
  const auto entries = ccnet::load_manifest(args.manifest, &summary);
  const auto parts = ccnet::split(entries, args.train_fraction, args.train.seed);
  const bool require_mask = !args.ablation_raw;
  const auto train_set = ccnet::load_samples(parts.train, args.input_side, require_mask);
  const auto val_set = ccnet::load_samples(parts.val, args.input_side, require_mask);

  ccnet::ModelConfig mc;
  mc.input_side = args.input_side;
  mc.block1_channels = args.block1;
  mc.block2_channels = args.block2;
  mc.dense_units = args.dense_units;
  mc.dropout_p = args.dropout_p;
  ccnet::ModelState<float> model = ccnet::build_model<float>(mc, args.train.seed);

  std::ostream* out = &std::cout;
  std::ofstream reports_file;
  if (!args.reports_path.empty()) {
    reports_file.open(args.reports_path, std::ios::trunc);
    if (!reports_file) throw ccnet::InputError("cannot open reports file: " + args.reports_path);
    out = &reports_file;
  }

  *out << json{{"mode", args.ablation_raw ? "raw" : "mask"},
               {"congested", summary.congested},
               {"non_congested", summary.non_congested},
               {"medium_dropped", summary.medium_dropped},
               {"train_samples", parts.train.size()},
               {"val_samples", parts.val.size()}}
              .dump()
       << "\n";

  const auto reports = ccnet::train(model, train_set, val_set, args.train);
  for (const auto& r : reports) *out << epoch_report_json(r, args.timing).dump() << "\n";

  ccnet::save_model(model, args.out_model);
  return kExitOk;
}

struct EvalArgs {
  std::string manifest;
  std::string model_path;
};

int cmd_eval(const EvalArgs& args) {
  const ccnet::ModelState<float> model = ccnet::load_model(args.model_path);
  const auto entries = ccnet::load_manifest(args.manifest);
  const auto samples = ccnet::load_samples(entries, model.config.input_side, false);
  const ccnet::ConfusionMatrix cm = ccnet::evaluate(model, samples);
  std::cout << ccnet::metrics_report(cm) << "\n";
  return kExitOk;
}

struct PredictArgs {
  std::string model_path;
  std::string image_path;
};

int cmd_predict(const PredictArgs& args) {
  const ccnet::ModelState<float> model = ccnet::load_model(args.model_path);
  ccnet::RgbImage img = ccnet::read_ppm(args.image_path);
  const int side = model.config.input_side;
  if (img.width != side || img.height != side) img = ccnet::resize_nearest(img, side, side);
  const auto pred = ccnet::predict(model, ccnet::to_tensor<float>(img));
  std::cout << json{{"label", ccnet::label_name(pred.label)},
                    {"probabilities",
                     {{"non_congested", pred.probabilities(0)},
                      {"congested", pred.probabilities(1)}}}}
                   .dump()
            << "\n";
  return kExitOk;
}

struct DetectArgs {
  std::string frames_dir;
  std::string out_path;
  int threshold = 25;
  int min_area = 16;
};

int cmd_detect(const DetectArgs& args) {
  std::vector<fs::path> frames;
  if (!fs::is_directory(args.frames_dir))
    throw ccnet::InputError("--frames must be a directory: " + args.frames_dir);
  for (const auto& entry : fs::directory_iterator(args.frames_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".ppm")
      frames.push_back(entry.path());
  std::sort(frames.begin(), frames.end());
  if (frames.size() < 2)
    throw ccnet::InputError("need at least two .ppm frames in " + args.frames_dir + ", found " +
                            std::to_string(frames.size()));

  std::vector<ccnet::DetectionRecord> records;
  ccnet::RgbImage prev = ccnet::read_ppm(frames[0]);
  for (std::size_t i = 1; i < frames.size(); ++i) {
    ccnet::RgbImage cur = ccnet::read_ppm(frames[i]);
    ccnet::DetectionRecord rec;
    rec.frame = frames[i].stem().string();
    rec.width = cur.width;
    rec.height = cur.height;
    rec.boxes = ccnet::frame_difference_detect(prev, cur, args.threshold, args.min_area);
    records.push_back(std::move(rec));
    prev = std::move(cur);
  }

  std::ofstream out(args.out_path, std::ios::trunc);
  if (!out) throw ccnet::InputError("cannot open output file: " + args.out_path);
  ccnet::write_detections(records, out);
  std::cout << json{{"records_written", records.size()}}.dump() << "\n";
  return kExitOk;
}

struct GradcheckArgs {
  std::string scale = "small";
  std::uint64_t seed = 42;
  double eps = 1e-3;
  int samples_per_tensor = 10;
};

int cmd_gradcheck(const GradcheckArgs& args) {
  ccnet::NetworkCheckConfig cfg;
  if (args.scale == "small") {
    cfg.model.input_side = 32;
    cfg.model.dense_units = 64;
  } else if (args.scale == "tiny") {
    cfg.model.input_side = 16;
    cfg.model.dense_units = 32;
  } else {
    throw ccnet::InputError("--scale must be 'small' or 'tiny', got '" + args.scale + "'");
  }
  cfg.seed = args.seed;
  cfg.eps = args.eps;
  if (args.samples_per_tensor < 1) throw ccnet::InputError("--samples must be >= 1");
  cfg.samples_per_tensor = static_cast<std::size_t>(args.samples_per_tensor);

  const ccnet::GradReport report = ccnet::check_network_gradients(cfg);
  json per_layer = json::object();
  for (const auto& [name, worst] : report.per_layer_worst) per_layer[name] = worst;
  const bool ok = std::isfinite(report.max_rel_error) && report.max_rel_error <= 1e-4;
  std::cout << json{{"max_rel_error", report.max_rel_error},
                    {"mean_rel_error", report.mean_rel_error},
                    {"n_checked", report.n_checked},
                    {"worst_parameter", report.worst_parameter},
                    {"per_layer_worst", per_layer},
                    {"pass", ok}}
                   .dump()
            << "\n";
  return ok ? kExitOk : kExitVerification;
}

struct SynthArgs {
  std::string out_dir;
  int per_class = 100;
  int side = 64;
  std::uint64_t seed = 42;
  bool raw = false;
};

int cmd_synth(const SynthArgs& args) {
  const auto samples = args.raw
                           ? ccnet::synth_generate_raw(args.per_class, args.side, args.seed)
                           : ccnet::synth_generate(args.per_class, args.side, args.seed);
  fs::create_directories(args.out_dir);
  std::ofstream manifest(fs::path(args.out_dir) / "manifest.csv", std::ios::trunc);
  if (!manifest) throw ccnet::InputError("cannot write manifest in " + args.out_dir);
  manifest << "path,label\n";
  for (std::size_t i = 0; i < samples.size(); ++i) {
    char name[64];
    std::snprintf(name, sizeof(name), "sample_%04zu.ppm", i);
    ccnet::write_ppm(samples[i].image, fs::path(args.out_dir) / name);
    manifest << name << "," << ccnet::label_name(samples[i].label) << "\n";
  }
  std::cout << json{{"samples_written", samples.size()}}.dump() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"color-coded traffic congestion pipeline"};
  app.require_subcommand(1);

  MaskArgs mask;
  auto* mask_cmd = app.add_subcommand("mask", "render detection boxes into red/white mask images");
  mask_cmd->add_option("--detections", mask.detections, "detection JSON Lines file")->required();
  mask_cmd->add_option("--out", mask.out_dir, "output directory for <frame>.ppm masks")->required();
  mask_cmd->add_option("--roi", mask.roi_text, "crop region X,Y,W,H applied before rendering");
  mask_cmd->add_option("--size", mask.size, "output side length")->capture_default_str();
  mask_cmd->add_option("--min-score", mask.min_score, "drop boxes scoring below this")
      ->capture_default_str();

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "train a congestion classifier on mask images");
  train_cmd->add_option("--manifest", train.manifest, "path,label manifest CSV")->required();
  train_cmd->add_option("--out", train.out_model, "model file to write")->required();
  train_cmd->add_option("--epochs", train.train.epochs, "training epochs")->capture_default_str();
  train_cmd->add_option("--lr", train.train.lr, "learning rate")->capture_default_str();
  train_cmd->add_option("--momentum", train.train.momentum, "SGD momentum")->capture_default_str();
  train_cmd->add_option("--batch-size", train.train.batch_size, "minibatch size")
      ->capture_default_str();
  bool no_augment = false;
  train_cmd->add_flag("--no-augment", no_augment, "disable flip augmentation");
  train_cmd->add_option("--seed", train.train.seed, "PRNG seed")->capture_default_str();
  train_cmd->add_option("--train-fraction", train.train_fraction, "stratified train share")
      ->capture_default_str();
  train_cmd->add_option("--input-side", train.input_side, "model input side")->capture_default_str();
  train_cmd->add_option("--block1", train.block1, "channels in conv block 1")->capture_default_str();
  train_cmd->add_option("--block2", train.block2, "channels in conv block 2")->capture_default_str();
  train_cmd->add_option("--dense-units", train.dense_units, "hidden dense width")
      ->capture_default_str();
  train_cmd->add_option("--dropout", train.dropout_p, "dropout probability")->capture_default_str();
  train_cmd->add_flag("--ablation-raw", train.ablation_raw,
                      "train on raw images (skips the mask-alphabet check)");
  train_cmd->add_option("--reports", train.reports_path,
                        "write JSON Lines reports here instead of stdout");
  train_cmd->add_flag("--timing", train.timing, "include wall seconds in epoch reports");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a model over a manifest");
  eval_cmd->add_option("--manifest", eval.manifest, "path,label manifest CSV")->required();
  eval_cmd->add_option("--model", eval.model_path, "model file")->required();

  PredictArgs predict;
  auto* predict_cmd = app.add_subcommand("predict", "classify one image");
  predict_cmd->add_option("--model", predict.model_path, "model file")->required();
  predict_cmd->add_option("--image", predict.image_path, "PPM image")->required();

  DetectArgs detect;
  auto* detect_cmd = app.add_subcommand("detect", "frame-difference motion boxes from a frame directory");
  detect_cmd->add_option("--frames", detect.frames_dir, "directory of .ppm frames")->required();
  detect_cmd->add_option("--out", detect.out_path, "detection JSON Lines file to write")->required();
  detect_cmd->add_option("--threshold", detect.threshold, "gray delta needed to mark a pixel changed")
      ->capture_default_str();
  detect_cmd->add_option("--min-area", detect.min_area, "smallest component kept")
      ->capture_default_str();

  GradcheckArgs gradcheck;
  auto* gradcheck_cmd = app.add_subcommand("gradcheck", "finite-difference audit of the backward pass");
  gradcheck_cmd->add_option("--scale", gradcheck.scale, "network preset: small or tiny")
      ->capture_default_str();
  gradcheck_cmd->add_option("--seed", gradcheck.seed, "PRNG seed")->capture_default_str();
  gradcheck_cmd->add_option("--eps", gradcheck.eps, "finite-difference step")->capture_default_str();
  gradcheck_cmd->add_option("--samples", gradcheck.samples_per_tensor, "probes per parameter tensor")
      ->capture_default_str();

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "write a synthetic mask dataset with manifest");
  synth_cmd->add_option("--out", synth.out_dir, "output directory")->required();
  synth_cmd->add_option("--per-class", synth.per_class, "samples per class")->capture_default_str();
  synth_cmd->add_option("--side", synth.side, "frame side length")->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed, "PRNG seed")->capture_default_str();
  synth_cmd->add_flag("--raw", synth.raw, "scene-flavored images instead of masks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  train.train.augment = !no_augment;

  try {
    if (mask_cmd->parsed()) return cmd_mask(mask);
    if (train_cmd->parsed()) return cmd_train(train);
    if (eval_cmd->parsed()) return cmd_eval(eval);
    if (predict_cmd->parsed()) return cmd_predict(predict);
    if (detect_cmd->parsed()) return cmd_detect(detect);
    if (gradcheck_cmd->parsed()) return cmd_gradcheck(gradcheck);
    if (synth_cmd->parsed()) return cmd_synth(synth);
  } catch (const ccnet::NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
