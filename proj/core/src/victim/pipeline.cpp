#include "rtia/victim/pipeline.hpp"

namespace rtia::victim {

void GuidancePipeline::reset() {
  kf_state_.reset();
  mot_.reset();
  locked_track_ = -1;
  detector_forwards_ = 0;
}

std::optional<BBox> GuidancePipeline::process(const nn::Tensor& frame) {
  auto boxes = detector_->detect_boxes(frame);
  ++detector_forwards_;

  switch (scenario_) {
    case world::Scenario::kE1:
    case world::Scenario::kE2:
      return select_target(boxes, target_class_);

    case world::Scenario::kE3: {
      auto sel = select_target(boxes, target_class_);
      if (!kf_state_ && !sel) return std::nullopt;
      auto r = kf_track(kf_state_, sel, dt_);
      kf_state_ = r.track;
      return r.box;  // the "kf box"
    }

    case world::Scenario::kE4: {
      mot_.step(boxes, dt_);
      if (locked_track_ < 0) {
        // lock onto the track spawned by the most confident target-class box
        double best_conf = -1.0;
        for (const auto& t : mot_.tracks()) {
          if (t.class_id != target_class_) continue;
          // freshly spawned tracks have age 1; prefer the strongest detection
          for (const auto& b : boxes) {
            if (b.class_id != target_class_) continue;
            if (iou(b, t.box()) > 0.5 && b.conf > best_conf) {
              best_conf = b.conf;
              locked_track_ = t.id;
            }
          }
        }
      }
      if (locked_track_ < 0) return std::nullopt;
      return mot_.box_of(locked_track_);
    }
  }
  return std::nullopt;
}

}  // namespace rtia::victim
