#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ccnet/image.hpp"
#include "ccnet/model.hpp"

namespace ccnet {

struct ManifestEntry {
  std::string path;
  Label label;
};

struct ManifestSummary {
  std::size_t congested = 0;
  std::size_t non_congested = 0;
  std::size_t medium_dropped = 0;
};

// CSV with exact header "path,label". Labels: congested, non_congested, or
// medium; medium rows are dropped (counted in the summary), anything else is
// an error citing the line. Relative paths resolve against the manifest's
// directory. Rows split at the last comma so paths may contain commas.
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path,
                                         ManifestSummary* summary = nullptr);

// Stratified split: each class list is shuffled (congested first, then
// non_congested, one seeded PRNG), the train side takes
// floor(total * train_fraction) samples allocated per class by floor then
// largest fractional remainder, so class ratios hold within one sample.
struct SplitResult {
  std::vector<ManifestEntry> train;
  std::vector<ManifestEntry> val;
};

SplitResult split(const std::vector<ManifestEntry>& samples, double train_fraction,
                  std::uint64_t seed);

struct LabeledImage {
  RgbImage image;
  Label label;
};

// Synthetic mask dataset: per class, frame_side x frame_side masks whose box
// count separates the classes (congested 12-25 boxes, non_congested 0-5) and
// whose box sides are uniform in [8%, 20%] of frame_side. Congested samples
// come first. Draw order per sample: box count, then x, y, w, h per box.
std::vector<LabeledImage> synth_generate(int per_class, int frame_side, std::uint64_t seed);

// Scene-flavored variant for the raw-input ablation: same box statistics, but
// rendered as dark random-color rectangles over a noisy gray background
// instead of a red/white mask.
std::vector<LabeledImage> synth_generate_raw(int per_class, int frame_side, std::uint64_t seed);

// Reads every manifest entry, resizing to side x side when needed.
// require_mask additionally insists each image is a pure red/white mask.
std::vector<LabeledImage> load_samples(const std::vector<ManifestEntry>& entries, int side,
                                       bool require_mask);

}  // namespace ccnet
