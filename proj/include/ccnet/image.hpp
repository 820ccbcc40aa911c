#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ccnet/tensor.hpp"

namespace ccnet {

// 8-bit RGB, row-major, 3 bytes per pixel.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  RgbImage() = default;
  RgbImage(int w, int h);

  std::uint8_t* at(int x, int y) { return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3; }
  const std::uint8_t* at(int x, int y) const {
    return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3;
  }

  friend bool operator==(const RgbImage& a, const RgbImage& b) {
    return a.width == b.width && a.height == b.height && a.pixels == b.pixels;
  }
};

// Binary P6, maxval 255. Encoding emits exactly "P6\n<w> <h>\n255\n" + payload.
// Decoding accepts any whitespace between header tokens (plus '#' comments)
// but exactly one whitespace byte before the payload.
std::vector<std::uint8_t> encode_ppm(const RgbImage& image);
RgbImage decode_ppm(const std::vector<std::uint8_t>& bytes);

RgbImage read_ppm(const std::filesystem::path& path);
void write_ppm(const RgbImage& image, const std::filesystem::path& path);

// Nearest neighbor with center mapping: src = min((2*dst+1)*src_extent /
// (2*dst_extent), src_extent-1), evaluated in exact integer arithmetic.
RgbImage resize_nearest(const RgbImage& image, int out_width, int out_height);

RgbImage flip_horizontal(const RgbImage& image);
RgbImage flip_vertical(const RgbImage& image);

// [h, w, 3] tensor scaled to [0, 1] (value / 255).
template <typename T>
Tensor<T> to_tensor(const RgbImage& image);

}  // namespace ccnet
