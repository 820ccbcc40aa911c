#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ccnet/colorcode.hpp"
#include "ccnet/image.hpp"

namespace ccnet {

struct ScoredBox {
  BoundingBox box;
  double score = 1.0;
  std::string label;
};

struct DetectionRecord {
  std::string frame;
  int width = 0;
  int height = 0;
  std::vector<ScoredBox> boxes;
};

// One JSON object per line: {"frame":str,"width":int,"height":int,
// "boxes":[{"x","y","w","h","score","label"},...]}. score defaults to 1.0,
// label to ""; unknown keys are ignored; blank lines are skipped. Errors cite
// the 1-based line number.
std::vector<DetectionRecord> parse_detections(std::istream& in);
std::vector<DetectionRecord> parse_detections_file(const std::string& path);

void write_detections(const std::vector<DetectionRecord>& records, std::ostream& out);

// Motion boxes between two equal-sized frames: grayscale each pixel as the
// rounded mean (r+g+b+1)/3, mark it changed when |cur-prev| > threshold, then
// take tight bounding boxes of 4-connected changed components with at least
// min_area pixels. Components emit in row-major discovery order with score
// 1.0 and label "motion".
std::vector<ScoredBox> frame_difference_detect(const RgbImage& prev, const RgbImage& cur,
                                               int threshold = 25, int min_area = 16);

}  // namespace ccnet
