#pragma once

#include <optional>

#include "rtia/victim/detector.hpp"
#include "rtia/victim/kalman.hpp"
#include "rtia/victim/mot.hpp"
#include "rtia/world/world.hpp"

namespace rtia::victim {

// The victim side of the loop: detect -> nms -> per-scenario tracking ->
// the box handed to guidance. E1/E2 use plain highest-confidence selection,
// E3 smooths the selected box with a Kalman filter, E4 runs the multi-object
// tracker and follows the track locked at episode start.
class GuidancePipeline {
 public:
  GuidancePipeline(const DetectorNet& detector, world::Scenario scenario, double dt,
                   int target_class = world::kClassCar)
      : detector_(&detector), scenario_(scenario), dt_(dt), target_class_(target_class) {}

  void reset();

  // One victim step on the (possibly attacked) frame. Exactly one detector
  // forward per call.
  std::optional<BBox> process(const nn::Tensor& frame);

  int detector_forwards() const { return detector_forwards_; }

 private:
  const DetectorNet* detector_;
  world::Scenario scenario_;
  double dt_;
  int target_class_;
  int detector_forwards_ = 0;

  std::optional<TrackState> kf_state_;
  MotTracker mot_;
  int locked_track_ = -1;
};

}  // namespace rtia::victim
