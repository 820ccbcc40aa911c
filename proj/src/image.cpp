#include "ccnet/image.hpp"

#include <cstdint>
#include <fstream>
#include <string>

#include "ccnet/error.hpp"

namespace ccnet {

RgbImage::RgbImage(int w, int h) : width(w), height(h) {
  if (w < 1 || h < 1)
    throw InputError("image dimensions must be >= 1, got " + std::to_string(w) + "x" +
                     std::to_string(h));
  pixels.assign(static_cast<std::size_t>(w) * h * 3, 0);
}

std::vector<std::uint8_t> encode_ppm(const RgbImage& image) {
  if (image.width < 1 || image.height < 1 ||
      image.pixels.size() != static_cast<std::size_t>(image.width) * image.height * 3)
    throw InputError("cannot encode malformed image");
  const std::string header =
      "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), image.pixels.begin(), image.pixels.end());
  return out;
}

namespace {

bool is_ppm_space(std::uint8_t c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

// Skips whitespace and '#' comments, then parses a decimal token.
int parse_ppm_int(const std::vector<std::uint8_t>& bytes, std::size_t& pos, const char* what) {
  while (pos < bytes.size()) {
    if (is_ppm_space(bytes[pos])) {
      ++pos;
    } else if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else {
      break;
    }
  }
  if (pos >= bytes.size() || bytes[pos] < '0' || bytes[pos] > '9')
    throw InputError(std::string("ppm header: expected ") + what);
  long value = 0;
  while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') {
    value = value * 10 + (bytes[pos] - '0');
    if (value > 1000000000L) throw InputError(std::string("ppm header: ") + what + " out of range");
    ++pos;
  }
  return static_cast<int>(value);
}

}  // namespace

RgbImage decode_ppm(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6')
    throw InputError("ppm decode: bad magic, expected P6");
  std::size_t pos = 2;
  const int width = parse_ppm_int(bytes, pos, "width");
  const int height = parse_ppm_int(bytes, pos, "height");
  const int maxval = parse_ppm_int(bytes, pos, "maxval");
  if (width < 1 || height < 1)
    throw InputError("ppm decode: dimensions must be >= 1, got " + std::to_string(width) + "x" +
                     std::to_string(height));
  if (maxval != 255)
    throw InputError("ppm decode: maxval must be 255, got " + std::to_string(maxval));
  if (pos >= bytes.size() || !is_ppm_space(bytes[pos]))
    throw InputError("ppm decode: expected single whitespace before payload");
  ++pos;
  const std::size_t need = static_cast<std::size_t>(width) * height * 3;
  if (bytes.size() - pos < need)
    throw InputError("ppm decode: payload short, expected " + std::to_string(need) +
                     " bytes, got " + std::to_string(bytes.size() - pos));
  if (bytes.size() - pos > need)
    throw InputError("ppm decode: trailing bytes after payload");
  RgbImage image(width, height);
  std::copy(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.end(), image.pixels.begin());
  return image;
}

RgbImage read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open image: " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_ppm(bytes);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_ppm(const RgbImage& image, const std::filesystem::path& path) {
  const auto bytes = encode_ppm(image);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot open image for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InputError("failed writing image: " + path.string());
}

RgbImage resize_nearest(const RgbImage& image, int out_width, int out_height) {
  if (out_width < 1 || out_height < 1)
    throw InputError("resize target must be >= 1x1, got " + std::to_string(out_width) + "x" +
                     std::to_string(out_height));
  RgbImage out(out_width, out_height);
  for (int y = 0; y < out_height; ++y) {
    const long long sy = std::min(
        (2LL * y + 1) * image.height / (2LL * out_height), static_cast<long long>(image.height - 1));
    for (int x = 0; x < out_width; ++x) {
      const long long sx = std::min(
          (2LL * x + 1) * image.width / (2LL * out_width), static_cast<long long>(image.width - 1));
      const std::uint8_t* src = image.at(static_cast<int>(sx), static_cast<int>(sy));
      std::uint8_t* dst = out.at(x, y);
      dst[0] = src[0];
      dst[1] = src[1];
      dst[2] = src[2];
    }
  }
  return out;
}

RgbImage flip_horizontal(const RgbImage& image) {
  RgbImage out(image.width, image.height);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const std::uint8_t* src = image.at(image.width - 1 - x, y);
      std::uint8_t* dst = out.at(x, y);
      dst[0] = src[0];
      dst[1] = src[1];
      dst[2] = src[2];
    }
  }
  return out;
}

RgbImage flip_vertical(const RgbImage& image) {
  RgbImage out(image.width, image.height);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const std::uint8_t* src = image.at(x, image.height - 1 - y);
      std::uint8_t* dst = out.at(x, y);
      dst[0] = src[0];
      dst[1] = src[1];
      dst[2] = src[2];
    }
  }
  return out;
}

template <typename T>
Tensor<T> to_tensor(const RgbImage& image) {
  if (image.width < 1 || image.height < 1) throw InputError("to_tensor: empty image");
  Tensor<T> t({image.height, image.width, 3});
  for (std::size_t i = 0; i < image.pixels.size(); ++i)
    t[i] = static_cast<T>(image.pixels[i]) / T(255);
  return t;
}

template Tensor<float> to_tensor<float>(const RgbImage&);
template Tensor<double> to_tensor<double>(const RgbImage&);

}  // namespace ccnet
