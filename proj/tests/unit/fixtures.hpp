#pragma once

// Shared heavyweight fixtures: the trained toy detector is built once per
// test process and reused (its training takes tens of seconds).

#include <memory>

#include "rtia/victim/dataset.hpp"
#include "rtia/victim/detector.hpp"
#include "rtia/victim/train.hpp"
#include "rtia/world/world.hpp"

namespace fixtures {

struct TrainedDetector {
  rtia::world::WorldConfig world;
  rtia::victim::Dataset dataset;
  rtia::victim::DetectorNet net;
  rtia::victim::DetectorTrainResult result;

  TrainedDetector(int frames, int steps)
      : net(rtia::victim::DetectorConfig{},
            *[] {
              static rtia::nn::RngStream rng(424242);
              return &rng;
            }()) {
    dataset = rtia::victim::generate_dataset(frames, world, 20240202);
    rtia::victim::DetectorTrainConfig cfg;
    cfg.steps = steps;
    cfg.seed = 99;
    result = rtia::victim::train_detector(net, dataset, cfg);
  }
};

inline const TrainedDetector& trained_detector() {
  static TrainedDetector fixture(400, 2500);
  return fixture;
}

}  // namespace fixtures
