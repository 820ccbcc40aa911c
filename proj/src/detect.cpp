#include "ccnet/detect.hpp"

#include <cstdlib>
#include <fstream>
#include <istream>
#include <json.hpp>
#include <ostream>
#include <string>

#include "ccnet/error.hpp"

namespace ccnet {

namespace {

[[noreturn]] void line_error(std::size_t line, const std::string& msg) {
  throw InputError("detections line " + std::to_string(line) + ": " + msg);
}

int require_int(const nlohmann::json& j, const char* key, std::size_t line) {
  if (!j.contains(key)) line_error(line, std::string("missing field '") + key + "'");
  const auto& v = j.at(key);
  if (!v.is_number_integer()) line_error(line, std::string("field '") + key + "' must be an integer");
  return v.get<int>();
}

}  // namespace

std::vector<DetectionRecord> parse_detections(std::istream& in) {
  std::vector<DetectionRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;

    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      line_error(line_no, std::string("not valid JSON: ") + e.what());
    }
    if (!j.is_object()) line_error(line_no, "record must be a JSON object");

    DetectionRecord rec;
    if (!j.contains("frame") || !j.at("frame").is_string())
      line_error(line_no, "missing or non-string field 'frame'");
    rec.frame = j.at("frame").get<std::string>();
    rec.width = require_int(j, "width", line_no);
    rec.height = require_int(j, "height", line_no);
    if (rec.width < 1 || rec.height < 1) line_error(line_no, "width and height must be >= 1");

    if (!j.contains("boxes") || !j.at("boxes").is_array())
      line_error(line_no, "missing or non-array field 'boxes'");
    for (const auto& jb : j.at("boxes")) {
      if (!jb.is_object()) line_error(line_no, "box entries must be JSON objects");
      ScoredBox sb;
      sb.box.x = require_int(jb, "x", line_no);
      sb.box.y = require_int(jb, "y", line_no);
      sb.box.w = require_int(jb, "w", line_no);
      sb.box.h = require_int(jb, "h", line_no);
      if (sb.box.w < 1 || sb.box.h < 1) line_error(line_no, "box w/h must be >= 1");
      if (sb.box.x < 0 || sb.box.y < 0) line_error(line_no, "box x/y must be >= 0");
      if (jb.contains("score")) {
        if (!jb.at("score").is_number()) line_error(line_no, "box score must be a number");
        sb.score = jb.at("score").get<double>();
        if (!(sb.score >= 0.0 && sb.score <= 1.0)) line_error(line_no, "box score must be in [0,1]");
      }
      if (jb.contains("label")) {
        if (!jb.at("label").is_string()) line_error(line_no, "box label must be a string");
        sb.label = jb.at("label").get<std::string>();
      }
      rec.boxes.push_back(std::move(sb));
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<DetectionRecord> parse_detections_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open detections file: " + path);
  return parse_detections(in);
}

void write_detections(const std::vector<DetectionRecord>& records, std::ostream& out) {
  for (const DetectionRecord& rec : records) {
    nlohmann::json boxes = nlohmann::json::array();
    for (const ScoredBox& sb : rec.boxes)
      boxes.push_back({{"x", sb.box.x},
                       {"y", sb.box.y},
                       {"w", sb.box.w},
                       {"h", sb.box.h},
                       {"score", sb.score},
                       {"label", sb.label}});
    const nlohmann::json j = {
        {"frame", rec.frame}, {"width", rec.width}, {"height", rec.height}, {"boxes", boxes}};
    out << j.dump() << "\n";
  }
}

std::vector<ScoredBox> frame_difference_detect(const RgbImage& prev, const RgbImage& cur,
                                               int threshold, int min_area) {
  if (prev.width != cur.width || prev.height != cur.height)
    throw InputError("frame difference needs equal-sized frames, got " +
                     std::to_string(prev.width) + "x" + std::to_string(prev.height) + " and " +
                     std::to_string(cur.width) + "x" + std::to_string(cur.height));
  if (threshold < 0 || threshold > 255)
    throw InputError("threshold must be in [0,255], got " + std::to_string(threshold));
  if (min_area < 1) throw InputError("min_area must be >= 1, got " + std::to_string(min_area));

  const int w = cur.width, h = cur.height;
  const std::size_t n = static_cast<std::size_t>(w) * h;
  std::vector<std::uint8_t> changed(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t* a = prev.pixels.data() + i * 3;
    const std::uint8_t* b = cur.pixels.data() + i * 3;
    const int ga = (a[0] + a[1] + a[2] + 1) / 3;
    const int gb = (b[0] + b[1] + b[2] + 1) / 3;
    changed[i] = std::abs(ga - gb) > threshold ? 1 : 0;
  }

  std::vector<ScoredBox> boxes;
  std::vector<std::uint8_t> seen(n, 0);
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < n; ++start) {
    if (!changed[start] || seen[start]) continue;
    int min_x = w, min_y = h, max_x = -1, max_y = -1;
    std::size_t area = 0;
    stack.assign(1, start);
    seen[start] = 1;
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      const int x = static_cast<int>(p % static_cast<std::size_t>(w));
      const int y = static_cast<int>(p / static_cast<std::size_t>(w));
      ++area;
      min_x = std::min(min_x, x);
      min_y = std::min(min_y, y);
      max_x = std::max(max_x, x);
      max_y = std::max(max_y, y);
      const std::size_t neighbors[4] = {p - 1, p + 1, p - static_cast<std::size_t>(w),
                                        p + static_cast<std::size_t>(w)};
      const bool ok[4] = {x > 0, x < w - 1, y > 0, y < h - 1};
      for (int k = 0; k < 4; ++k) {
        if (ok[k] && changed[neighbors[k]] && !seen[neighbors[k]]) {
          seen[neighbors[k]] = 1;
          stack.push_back(neighbors[k]);
        }
      }
    }
    if (area >= static_cast<std::size_t>(min_area))
      boxes.push_back({{min_x, min_y, max_x - min_x + 1, max_y - min_y + 1}, 1.0, "motion"});
  }
  return boxes;
}

}  // namespace ccnet
