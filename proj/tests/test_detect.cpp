#include <doctest.h>

#include <sstream>
#include <string>
#include <vector>

#include "ccnet/detect.hpp"
#include "ccnet/error.hpp"

using namespace ccnet;

namespace {

std::vector<DetectionRecord> parse_str(const std::string& text) {
  std::istringstream in(text);
  return parse_detections(in);
}

std::string error_of(const std::string& text) {
  try {
    parse_str(text);
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

const std::string kRecord =
    R"({"frame":"f1","width":4,"height":4,"boxes":[{"x":1,"y":1,"w":2,"h":2}]})";

}  // namespace

TEST_CASE("parse_detections reads JSON lines in file order") {
  const auto records = parse_str(kRecord + "\n" +
                                 R"({"frame":"f2","width":8,"height":6,"boxes":[]})" + "\n");
  REQUIRE(records.size() == 2);

  CHECK(records[0].frame == "f1");
  CHECK(records[0].width == 4);
  CHECK(records[0].height == 4);
  REQUIRE(records[0].boxes.size() == 1);
  const auto& sb = records[0].boxes[0];
  CHECK(sb.box.x == 1);
  CHECK(sb.box.y == 1);
  CHECK(sb.box.w == 2);
  CHECK(sb.box.h == 2);
  CHECK(sb.score == 1.0);  // absent score defaults to 1.0
  CHECK(sb.label == "");

  CHECK(records[1].frame == "f2");
  CHECK(records[1].boxes.empty());
}

TEST_CASE("parse_detections skips blanks and ignores unknown keys") {
  const auto records = parse_str(
      "\n   \n" +
      std::string(
          R"({"frame":"a","width":2,"height":2,"camera":"c7","boxes":[{"x":0,"y":0,"w":1,"h":1,"score":0.5,"label":"car","pose":9}]})") +
      "\n\n");
  REQUIRE(records.size() == 1);
  REQUIRE(records[0].boxes.size() == 1);
  CHECK(records[0].boxes[0].score == 0.5);
  CHECK(records[0].boxes[0].label == "car");
}

TEST_CASE("parse_detections errors cite the 1-based line number") {
  const auto msg = error_of(kRecord + "\n" + kRecord + "\n" + "not json\n");
  CHECK(msg.find("line 3") != std::string::npos);

  CHECK(error_of("{}") != "");
  CHECK(error_of(R"({"frame":"f","width":0,"height":4,"boxes":[]})") != "");
  CHECK(error_of(R"({"frame":"f","width":4,"height":4})").find("boxes") != std::string::npos);
  CHECK(error_of(R"({"frame":"f","width":4,"height":4,"boxes":[{"x":0,"y":0,"w":0,"h":1}]})") != "");
  CHECK(error_of(R"({"frame":"f","width":4,"height":4,"boxes":[{"x":0,"y":0,"w":1,"h":-2}]})") != "");
  CHECK(error_of(R"({"frame":"f","width":4,"height":4,"boxes":[{"x":-1,"y":0,"w":1,"h":1}]})") != "");
  CHECK(error_of(R"({"frame":"f","width":4,"height":4,"boxes":[{"y":0,"w":1,"h":1}]})").find("'x'") !=
        std::string::npos);
  CHECK(error_of(R"({"frame":"f","width":4,"height":4,"boxes":[{"x":0,"y":0,"w":1,"h":1,"score":1.5}]})") !=
        "");
}

TEST_CASE("parse of a re-serialization is a fixed point") {
  const auto records = parse_str(
      kRecord + "\n" +
      R"({"frame":"f2","width":9,"height":7,"boxes":[{"x":0,"y":3,"w":4,"h":2,"score":0.25,"label":"bus"},{"x":5,"y":5,"w":1,"h":1}]})" +
      "\n");

  std::ostringstream out;
  write_detections(records, out);
  const auto reparsed = parse_str(out.str());

  REQUIRE(reparsed.size() == records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(reparsed[i].frame == records[i].frame);
    CHECK(reparsed[i].width == records[i].width);
    CHECK(reparsed[i].height == records[i].height);
    REQUIRE(reparsed[i].boxes.size() == records[i].boxes.size());
    for (std::size_t k = 0; k < records[i].boxes.size(); ++k) {
      CHECK(reparsed[i].boxes[k].box.x == records[i].boxes[k].box.x);
      CHECK(reparsed[i].boxes[k].box.y == records[i].boxes[k].box.y);
      CHECK(reparsed[i].boxes[k].box.w == records[i].boxes[k].box.w);
      CHECK(reparsed[i].boxes[k].box.h == records[i].boxes[k].box.h);
      CHECK(reparsed[i].boxes[k].score == records[i].boxes[k].score);
      CHECK(reparsed[i].boxes[k].label == records[i].boxes[k].label);
    }
  }

  // Serializing the reparse reproduces the bytes: a true fixed point.
  std::ostringstream again;
  write_detections(reparsed, again);
  CHECK(again.str() == out.str());
}

namespace {

RgbImage solid(int w, int h, std::uint8_t v) {
  RgbImage img(w, h);
  img.pixels.assign(img.pixels.size(), v);
  return img;
}

void paint_block(RgbImage& img, int x0, int y0, int w, int h, std::uint8_t v) {
  for (int y = y0; y < y0 + h; ++y)
    for (int x = x0; x < x0 + w; ++x) {
      auto* p = img.at(x, y);
      p[0] = p[1] = p[2] = v;
    }
}

}  // namespace

TEST_CASE("frame_difference_detect finds tight component boxes") {
  SUBCASE("identical frames yield nothing") {
    const auto img = solid(6, 6, 128);
    CHECK(frame_difference_detect(img, img).empty());
  }

  SUBCASE("threshold 255 suppresses even black-to-white") {
    const auto black = solid(6, 6, 0);
    const auto white = solid(6, 6, 255);
    CHECK(frame_difference_detect(black, white, 255, 1).empty());
  }

  SUBCASE("one white 3x3 block at (2,2) on black gives box (2,2,3,3)") {
    const auto prev = solid(8, 8, 0);
    auto cur = solid(8, 8, 0);
    paint_block(cur, 2, 2, 3, 3, 255);
    const auto boxes = frame_difference_detect(prev, cur, 25, 4);
    REQUIRE(boxes.size() == 1);
    CHECK(boxes[0].box.x == 2);
    CHECK(boxes[0].box.y == 2);
    CHECK(boxes[0].box.w == 3);
    CHECK(boxes[0].box.h == 3);
    CHECK(boxes[0].score == 1.0);
    CHECK(boxes[0].label == "motion");
  }

  SUBCASE("symmetric in the two frames") {
    auto a = solid(10, 10, 30);
    auto b = solid(10, 10, 30);
    paint_block(a, 1, 1, 2, 3, 200);
    paint_block(b, 6, 4, 3, 2, 220);
    const auto ab = frame_difference_detect(a, b, 25, 2);
    const auto ba = frame_difference_detect(b, a, 25, 2);
    REQUIRE(ab.size() == ba.size());
    for (std::size_t i = 0; i < ab.size(); ++i) {
      CHECK(ab[i].box.x == ba[i].box.x);
      CHECK(ab[i].box.y == ba[i].box.y);
      CHECK(ab[i].box.w == ba[i].box.w);
      CHECK(ab[i].box.h == ba[i].box.h);
    }
  }

  SUBCASE("diagonal touches are separate 4-connected components") {
    const auto prev = solid(6, 6, 0);
    auto cur = solid(6, 6, 0);
    paint_block(cur, 0, 0, 2, 2, 255);
    paint_block(cur, 2, 2, 2, 2, 255);
    CHECK(frame_difference_detect(prev, cur, 25, 1).size() == 2);
  }

  SUBCASE("min_area filters small components but keeps big ones") {
    const auto prev = solid(12, 8, 0);
    auto cur = solid(12, 8, 0);
    paint_block(cur, 1, 1, 1, 2, 255);  // area 2
    paint_block(cur, 6, 2, 3, 3, 255);  // area 9
    const auto boxes = frame_difference_detect(prev, cur, 25, 4);
    REQUIRE(boxes.size() == 1);
    CHECK(boxes[0].box.x == 6);
    CHECK(frame_difference_detect(prev, cur, 25, 1).size() == 2);
  }

  SUBCASE("components emit in row-major discovery order") {
    const auto prev = solid(10, 10, 0);
    auto cur = solid(10, 10, 0);
    paint_block(cur, 7, 0, 2, 2, 255);  // first scanline hit at (7,0)
    paint_block(cur, 0, 4, 2, 2, 255);
    paint_block(cur, 5, 6, 2, 2, 255);
    const auto boxes = frame_difference_detect(prev, cur, 25, 1);
    REQUIRE(boxes.size() == 3);
    CHECK(boxes[0].box.y == 0);
    CHECK(boxes[1].box.y == 4);
    CHECK(boxes[2].box.y == 6);
  }

  SUBCASE("emitted boxes lie in bounds with area >= min_area") {
    auto prev = solid(16, 12, 40);
    auto cur = solid(16, 12, 40);
    paint_block(cur, 0, 0, 3, 2, 250);
    paint_block(cur, 13, 9, 3, 3, 250);
    paint_block(prev, 8, 5, 2, 6, 250);
    for (const int min_area : {1, 4, 6}) {
      for (const auto& sb : frame_difference_detect(prev, cur, 25, min_area)) {
        CHECK(sb.box.x >= 0);
        CHECK(sb.box.y >= 0);
        CHECK(sb.box.x + sb.box.w <= 16);
        CHECK(sb.box.y + sb.box.h <= 12);
        CHECK(sb.box.w * sb.box.h >= min_area);
      }
    }
  }

  SUBCASE("invalid arguments are rejected") {
    const auto a = solid(4, 4, 0);
    const auto b = solid(5, 4, 0);
    CHECK_THROWS_AS(frame_difference_detect(a, b), InputError);
    CHECK_THROWS_AS(frame_difference_detect(a, a, -1, 1), InputError);
    CHECK_THROWS_AS(frame_difference_detect(a, a, 256, 1), InputError);
    CHECK_THROWS_AS(frame_difference_detect(a, a, 25, 0), InputError);
  }
}
