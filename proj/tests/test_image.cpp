#include <doctest.h>

#include <filesystem>
#include <string>
#include <vector>

#include "ccnet/image.hpp"
#include "ccnet/rng.hpp"

using namespace ccnet;

namespace {

RgbImage random_image(int w, int h, Rng& rng) {
  RgbImage img(w, h);
  for (auto& b : img.pixels) b = static_cast<std::uint8_t>(rng.below(256));
  return img;
}

std::vector<std::uint8_t> bytes_of(const std::string& s) {
  return std::vector<std::uint8_t>(s.begin(), s.end());
}

std::string error_of(const std::vector<std::uint8_t>& bytes) {
  try {
    decode_ppm(bytes);
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("encode emits the exact header byte string") {
  RgbImage white(1, 1);
  white.pixels = {255, 255, 255};
  const auto bytes = encode_ppm(white);
  const std::string want = "P6\n1 1\n255\n\xff\xff\xff";
  REQUIRE(bytes.size() == want.size());
  CHECK(std::string(bytes.begin(), bytes.end()) == want);
}

TEST_CASE("decode of encode is the identity") {
  Rng rng(51);
  for (const auto [w, h] : {std::pair{1, 1}, {3, 2}, {17, 5}, {64, 64}}) {
    const auto img = random_image(w, h, rng);
    CHECK(decode_ppm(encode_ppm(img)) == img);
  }
}

TEST_CASE("decode tolerates comments and flexible header whitespace") {
  const auto img = decode_ppm(bytes_of(std::string("P6 # binary pixmap\n# sized\n 2\t1 #w h\n255\n") +
                                       std::string("\x01\x02\x03\x04\x05\x06", 6)));
  CHECK(img.width == 2);
  CHECK(img.height == 1);
  CHECK(img.pixels == std::vector<std::uint8_t>{1, 2, 3, 4, 5, 6});
}

TEST_CASE("decode failures carry distinct diagnostics") {
  const std::string pixel3 = std::string("\x01\x02\x03", 3);

  const auto magic = error_of(bytes_of("P5\n1 1\n255\n" + pixel3));
  CHECK(magic.find("magic") != std::string::npos);

  const auto maxval = error_of(bytes_of("P6\n1 1\n254\n" + pixel3));
  CHECK(maxval.find("254") != std::string::npos);

  const auto short_payload = error_of(bytes_of(std::string("P6\n2 1\n255\n") + pixel3));
  CHECK(short_payload.find("6") != std::string::npos);  // expected byte count
  CHECK(short_payload.find("3") != std::string::npos);  // present byte count

  const auto trailing = error_of(bytes_of("P6\n1 1\n255\n" + pixel3 + "extra"));
  CHECK(trailing.find("trailing") != std::string::npos);

  CHECK(error_of(bytes_of("P6\n0 1\n255\n")) != "");
  CHECK(error_of(bytes_of("P6\n1 -1\n255\n")) != "");
  CHECK(error_of(bytes_of("")) != "");
}

TEST_CASE("file round trip and read errors name the path") {
  Rng rng(52);
  const auto img = random_image(5, 4, rng);
  const auto path = std::filesystem::temp_directory_path() / "ccnet_test_roundtrip.ppm";
  write_ppm(img, path);
  CHECK(read_ppm(path) == img);
  std::filesystem::remove(path);

  try {
    read_ppm("/nonexistent/ccnet.ppm");
    FAIL("expected InputError");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("/nonexistent/ccnet.ppm") != std::string::npos);
  }
}

TEST_CASE("resize_nearest follows the center mapping") {
  Rng rng(53);

  SUBCASE("identity size is bit-identical") {
    const auto img = random_image(7, 9, rng);
    CHECK(resize_nearest(img, 7, 9) == img);
  }

  SUBCASE("2x2 to 1x1 picks source pixel (1,1)") {
    RgbImage img(2, 2);
    for (int i = 0; i < 4; ++i) {
      img.pixels[static_cast<std::size_t>(i) * 3] = static_cast<std::uint8_t>(10 * (i + 1));
    }
    const auto out = resize_nearest(img, 1, 1);
    CHECK(out.at(0, 0)[0] == 40);  // pixel (1,1)
  }

  SUBCASE("320x240 reaches the model input size") {
    const auto img = random_image(320, 240, rng);
    const auto out = resize_nearest(img, 180, 180);
    CHECK(out.width == 180);
    CHECK(out.height == 180);
  }

  SUBCASE("mapping formula: src = min(floor((2*dst+1)*src_n/(2*dst_n)), src_n-1)") {
    RgbImage img(5, 1);
    for (int x = 0; x < 5; ++x) img.at(x, 0)[0] = static_cast<std::uint8_t>(x);
    const auto out = resize_nearest(img, 3, 1);
    // dst 0,1,2 -> src floor(5/6)=0, floor(15/6)=2, floor(25/6)=4
    CHECK(out.at(0, 0)[0] == 0);
    CHECK(out.at(1, 0)[0] == 2);
    CHECK(out.at(2, 0)[0] == 4);
  }

  SUBCASE("upscale replicates without inventing colors") {
    RgbImage img(1, 1);
    img.pixels = {9, 8, 7};
    const auto out = resize_nearest(img, 3, 3);
    for (int y = 0; y < 3; ++y)
      for (int x = 0; x < 3; ++x) {
        CHECK(out.at(x, y)[0] == 9);
        CHECK(out.at(x, y)[1] == 8);
        CHECK(out.at(x, y)[2] == 7);
      }
  }

  SUBCASE("zero target is rejected") {
    const auto img = random_image(4, 4, rng);
    CHECK_THROWS_AS(resize_nearest(img, 0, 4), InputError);
    CHECK_THROWS_AS(resize_nearest(img, 4, 0), InputError);
  }
}

TEST_CASE("flips are involutions with the documented coordinates") {
  Rng rng(54);
  const auto img = random_image(6, 5, rng);
  CHECK(flip_horizontal(flip_horizontal(img)) == img);
  CHECK(flip_vertical(flip_vertical(img)) == img);

  RgbImage ab(2, 1);
  ab.pixels = {1, 1, 1, 2, 2, 2};
  const auto ba = flip_horizontal(ab);
  CHECK(ba.pixels == std::vector<std::uint8_t>{2, 2, 2, 1, 1, 1});

  RgbImage corner(3, 3);
  corner.pixels.assign(27, 255);
  corner.at(0, 0)[1] = 0;
  corner.at(0, 0)[2] = 0;  // lone red pixel at (0,0)
  const auto flipped = flip_horizontal(corner);
  CHECK(flipped.at(2, 0)[0] == 255);
  CHECK(flipped.at(2, 0)[1] == 0);
  CHECK(flipped.at(2, 0)[2] == 0);
  CHECK(flipped.at(0, 0)[1] == 255);
}

TEST_CASE_TEMPLATE("to_tensor scales into [0,1] with [h,w,3] layout", T, float, double) {
  RgbImage img(2, 1);
  img.pixels = {255, 0, 51, 0, 255, 102};
  const auto t = to_tensor<T>(img);
  REQUIRE(t.shape() == std::vector<int>{1, 2, 3});
  CHECK(t(0, 0, 0) == T(1));
  CHECK(t(0, 0, 1) == T(0));
  CHECK(t(0, 0, 2) == T(51) / T(255));
  CHECK(t(0, 1, 0) == T(0));
  CHECK(t(0, 1, 1) == T(1));
  CHECK(t(0, 1, 2) == T(102) / T(255));
}
