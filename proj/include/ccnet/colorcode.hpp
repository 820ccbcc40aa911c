#pragma once

#include <vector>

#include "ccnet/image.hpp"

namespace ccnet {

// Pixel-space rectangle; may extend past the frame it is rendered into.
struct BoundingBox {
  int x = 0;
  int y = 0;
  int w = 1;
  int h = 1;
};

struct Roi {
  int x = 0;
  int y = 0;
  int w = 1;
  int h = 1;
};

inline constexpr std::uint8_t kRed[3] = {255, 0, 0};
inline constexpr std::uint8_t kWhite[3] = {255, 255, 255};

// White frame with every box filled red. Boxes are clamped to the frame;
// overlaps paint red once, so rendering is an idempotent union.
RgbImage render_mask(const std::vector<BoundingBox>& boxes, int width, int height);

// Strict crop: the ROI must lie fully inside the image.
RgbImage apply_roi(const RgbImage& image, const Roi& roi);

// Boxes intersected with the ROI and translated into its coordinates; boxes
// that miss the ROI drop out. Rendering the result into a roi.w x roi.h frame
// equals cropping a full-frame render.
std::vector<BoundingBox> boxes_to_roi(const std::vector<BoundingBox>& boxes, const Roi& roi);

// Fraction of red pixels. The image must be a pure red/white mask.
double occupancy_ratio(const RgbImage& mask);

}  // namespace ccnet
