#include "ccnet/colorcode.hpp"

#include <algorithm>
#include <string>

#include "ccnet/error.hpp"

namespace ccnet {

RgbImage render_mask(const std::vector<BoundingBox>& boxes, int width, int height) {
  if (width < 1 || height < 1)
    throw InputError("mask frame must be at least 1x1, got " + std::to_string(width) + "x" +
                     std::to_string(height));
  RgbImage mask(width, height);
  std::fill(mask.pixels.begin(), mask.pixels.end(), std::uint8_t{255});
  for (const BoundingBox& b : boxes) {
    if (b.w < 1 || b.h < 1)
      throw InputError("bounding box must be at least 1x1, got " + std::to_string(b.w) + "x" +
                       std::to_string(b.h));
    if (b.x < 0 || b.y < 0)
      throw InputError("bounding box origin must be non-negative, got (" + std::to_string(b.x) +
                       "," + std::to_string(b.y) + ")");
    const int x0 = std::min(b.x, width);
    const int y0 = std::min(b.y, height);
    const int x1 = std::min(b.x + b.w, width);
    const int y1 = std::min(b.y + b.h, height);
    for (int y = y0; y < y1; ++y) {
      for (int x = x0; x < x1; ++x) {
        std::uint8_t* px = mask.at(x, y);
        px[0] = kRed[0];
        px[1] = kRed[1];
        px[2] = kRed[2];
      }
    }
  }
  return mask;
}

RgbImage apply_roi(const RgbImage& image, const Roi& roi) {
  if (roi.w < 1 || roi.h < 1)
    throw InputError("roi must be at least 1x1, got " + std::to_string(roi.w) + "x" +
                     std::to_string(roi.h));
  if (roi.x < 0 || roi.y < 0 || roi.x + roi.w > image.width || roi.y + roi.h > image.height)
    throw InputError("roi [" + std::to_string(roi.x) + "," + std::to_string(roi.y) + " " +
                     std::to_string(roi.w) + "x" + std::to_string(roi.h) +
                     "] exceeds image bounds " + std::to_string(image.width) + "x" +
                     std::to_string(image.height));
  RgbImage out(roi.w, roi.h);
  for (int y = 0; y < roi.h; ++y) {
    const std::uint8_t* src = image.at(roi.x, roi.y + y);
    std::uint8_t* dst = out.at(0, y);
    std::copy(src, src + static_cast<std::size_t>(roi.w) * 3, dst);
  }
  return out;
}

std::vector<BoundingBox> boxes_to_roi(const std::vector<BoundingBox>& boxes, const Roi& roi) {
  std::vector<BoundingBox> out;
  for (const BoundingBox& b : boxes) {
    const int x0 = std::max(b.x, roi.x);
    const int y0 = std::max(b.y, roi.y);
    const int x1 = std::min(b.x + b.w, roi.x + roi.w);
    const int y1 = std::min(b.y + b.h, roi.y + roi.h);
    if (x1 > x0 && y1 > y0) out.push_back({x0 - roi.x, y0 - roi.y, x1 - x0, y1 - y0});
  }
  return out;
}

double occupancy_ratio(const RgbImage& mask) {
  if (mask.width < 1 || mask.height < 1) throw InputError("occupancy: empty image");
  std::size_t red = 0;
  const std::size_t n = static_cast<std::size_t>(mask.width) * mask.height;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t* px = mask.pixels.data() + i * 3;
    if (px[0] == 255 && px[1] == 0 && px[2] == 0) {
      ++red;
    } else if (px[0] == 255 && px[1] == 255 && px[2] == 255) {
      // white
    } else {
      throw InputError("occupancy: pixel " + std::to_string(i) + " is neither red nor white (" +
                       std::to_string(px[0]) + "," + std::to_string(px[1]) + "," +
                       std::to_string(px[2]) + ")");
    }
  }
  return static_cast<double>(red) / static_cast<double>(n);
}

}  // namespace ccnet
