#pragma once

#include <optional>
#include <vector>

#include "rtia/victim/kalman.hpp"

namespace rtia::victim {

struct MotConfig {
  double iou_min = 0.3;
  int max_misses = 3;
  KfConfig kf;
};

// Greedy-IoU multi-object tracker: detections are associated to predicted
// track boxes in descending IoU (cutoff iou_min), matched tracks are
// Kalman-updated, unmatched detections spawn tracks, and tracks with more
// than max_misses consecutive misses retire.
class MotTracker {
 public:
  explicit MotTracker(MotConfig cfg = {}) : cfg_(cfg) {}

  void reset() {
    tracks_.clear();
    next_id_ = 1;
  }

  const std::vector<TrackState>& step(const std::vector<BBox>& boxes, double dt);

  const std::vector<TrackState>& tracks() const { return tracks_; }
  std::optional<BBox> box_of(int track_id) const;

 private:
  MotConfig cfg_;
  std::vector<TrackState> tracks_;
  int next_id_ = 1;
};

}  // namespace rtia::victim
