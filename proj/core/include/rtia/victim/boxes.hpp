#pragma once

#include <algorithm>
#include <optional>
#include <vector>

namespace rtia::victim {

// Axis-aligned box in normalized image coordinates (center + size).
struct BBox {
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;
  double conf = 0.0;
  int class_id = 0;
};

double iou(const BBox& a, const BBox& b);

// Greedy non-max suppression: keep in descending confidence, suppress boxes
// of the same class with IoU above iou_thresh against a kept box.
std::vector<BBox> nms(const std::vector<BBox>& candidates, double conf_thresh, double iou_thresh);

// Highest-confidence box of the class; ties broken by lexicographically
// smaller (cx, cy).
std::optional<BBox> select_target(const std::vector<BBox>& boxes, int target_class);

}  // namespace rtia::victim
