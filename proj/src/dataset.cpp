#include "ccnet/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "ccnet/colorcode.hpp"
#include "ccnet/error.hpp"
#include "ccnet/rng.hpp"

namespace ccnet {

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path,
                                         ManifestSummary* summary) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open manifest: " + path.string());
  const std::filesystem::path base = path.parent_path();

  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw InputError("manifest is empty: " + path.string());
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "path,label")
    throw InputError("manifest line 1: header must be 'path,label', got '" + line + "'");

  ManifestSummary counts;
  std::vector<ManifestEntry> entries;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t comma = line.rfind(',');
    if (comma == std::string::npos)
      throw InputError("manifest line " + std::to_string(line_no) + ": expected 'path,label'");
    std::string p = line.substr(0, comma);
    const std::string label = line.substr(comma + 1);
    if (p.empty())
      throw InputError("manifest line " + std::to_string(line_no) + ": empty path");
    if (label == "medium") {
      ++counts.medium_dropped;
      continue;
    }
    ManifestEntry e;
    if (label == "congested") {
      e.label = Label::congested;
      ++counts.congested;
    } else if (label == "non_congested") {
      e.label = Label::non_congested;
      ++counts.non_congested;
    } else {
      throw InputError("manifest line " + std::to_string(line_no) + ": unknown label '" + label +
                       "'");
    }
    std::filesystem::path fp(p);
    e.path = fp.is_absolute() ? fp.string() : (base / fp).string();
    entries.push_back(std::move(e));
  }
  if (summary != nullptr) *summary = counts;
  return entries;
}

SplitResult split(const std::vector<ManifestEntry>& samples, double train_fraction,
                  std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw InputError("train_fraction must be in (0,1), got " + std::to_string(train_fraction));

  std::vector<ManifestEntry> classes[2];  // congested, then non_congested
  for (const auto& s : samples) classes[s.label == Label::congested ? 0 : 1].push_back(s);

  Rng rng(seed);
  for (auto& cls : classes) {
    for (std::size_t i = cls.size(); i > 1; --i)
      std::swap(cls[i - 1], cls[rng.below(i)]);
  }

  // Largest-remainder allocation of floor(n * fraction) train seats.
  const auto target =
      static_cast<std::size_t>(std::floor(static_cast<double>(samples.size()) * train_fraction));
  std::size_t take[2];
  double rem[2];
  std::size_t floored = 0;
  for (int c = 0; c < 2; ++c) {
    const double exact = static_cast<double>(classes[c].size()) * train_fraction;
    take[c] = static_cast<std::size_t>(std::floor(exact));
    rem[c] = exact - static_cast<double>(take[c]);
    floored += take[c];
  }
  std::size_t seats = target > floored ? target - floored : 0;
  int order[2] = {0, 1};
  if (rem[1] > rem[0]) std::swap(order[0], order[1]);
  for (int k = 0; k < 2 && seats > 0; ++k) {
    const int c = order[k];
    if (take[c] < classes[c].size()) {
      ++take[c];
      --seats;
    }
  }

  SplitResult r;
  for (int c = 0; c < 2; ++c) {
    for (std::size_t i = 0; i < classes[c].size(); ++i)
      (i < take[c] ? r.train : r.val).push_back(classes[c][i]);
  }
  return r;
}

namespace {

void check_synth_args(int per_class, int frame_side) {
  if (per_class < 0) throw InputError("per_class must be >= 0");
  if (frame_side < 32) throw InputError("frame_side must be >= 32, got " + std::to_string(frame_side));
}

std::vector<BoundingBox> draw_boxes(Rng& rng, int frame_side, bool congested) {
  const int count = congested ? 12 + static_cast<int>(rng.below(14))   // 12..25
                              : static_cast<int>(rng.below(6));        // 0..5
  const int lo = std::max(1, frame_side * 8 / 100);
  const int hi = std::max(lo, frame_side * 20 / 100);
  std::vector<BoundingBox> boxes;
  boxes.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    BoundingBox b;
    b.x = static_cast<int>(rng.below(static_cast<std::uint64_t>(frame_side)));
    b.y = static_cast<int>(rng.below(static_cast<std::uint64_t>(frame_side)));
    b.w = lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
    b.h = lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
    boxes.push_back(b);
  }
  return boxes;
}

}  // namespace

std::vector<LabeledImage> synth_generate(int per_class, int frame_side, std::uint64_t seed) {
  check_synth_args(per_class, frame_side);
  Rng rng(seed);
  std::vector<LabeledImage> out;
  out.reserve(static_cast<std::size_t>(per_class) * 2);
  for (int pass = 0; pass < 2; ++pass) {
    const bool congested = pass == 0;
    for (int i = 0; i < per_class; ++i) {
      const auto boxes = draw_boxes(rng, frame_side, congested);
      out.push_back({render_mask(boxes, frame_side, frame_side),
                     congested ? Label::congested : Label::non_congested});
    }
  }
  return out;
}

std::vector<LabeledImage> synth_generate_raw(int per_class, int frame_side, std::uint64_t seed) {
  check_synth_args(per_class, frame_side);
  Rng rng(seed);
  std::vector<LabeledImage> out;
  out.reserve(static_cast<std::size_t>(per_class) * 2);
  for (int pass = 0; pass < 2; ++pass) {
    const bool congested = pass == 0;
    for (int i = 0; i < per_class; ++i) {
      const int bg = 120 + static_cast<int>(rng.below(81));
      const auto boxes = draw_boxes(rng, frame_side, congested);
      RgbImage img(frame_side, frame_side);
      for (int y = 0; y < frame_side; ++y) {
        for (int x = 0; x < frame_side; ++x) {
          const int v = std::clamp(bg + static_cast<int>(rng.below(41)) - 20, 0, 255);
          std::uint8_t* px = img.at(x, y);
          px[0] = px[1] = px[2] = static_cast<std::uint8_t>(v);
        }
      }
      for (const BoundingBox& b : boxes) {
        const std::uint8_t r = static_cast<std::uint8_t>(rng.below(101));
        const std::uint8_t g = static_cast<std::uint8_t>(rng.below(101));
        const std::uint8_t bl = static_cast<std::uint8_t>(rng.below(101));
        const int x1 = std::min(b.x + b.w, frame_side);
        const int y1 = std::min(b.y + b.h, frame_side);
        for (int y = b.y; y < y1; ++y) {
          for (int x = b.x; x < x1; ++x) {
            std::uint8_t* px = img.at(x, y);
            px[0] = r;
            px[1] = g;
            px[2] = bl;
          }
        }
      }
      out.push_back({std::move(img), congested ? Label::congested : Label::non_congested});
    }
  }
  return out;
}

std::vector<LabeledImage> load_samples(const std::vector<ManifestEntry>& entries, int side,
                                       bool require_mask) {
  std::vector<LabeledImage> out;
  out.reserve(entries.size());
  for (const auto& e : entries) {
    RgbImage img = read_ppm(e.path);
    if (img.width != side || img.height != side) img = resize_nearest(img, side, side);
    if (require_mask) {
      try {
        occupancy_ratio(img);
      } catch (const InputError& err) {
        throw InputError(e.path + " is not a red/white mask (" + err.what() +
                         "); use --ablation-raw for raw images");
      }
    }
    out.push_back({std::move(img), e.label});
  }
  return out;
}

}  // namespace ccnet
