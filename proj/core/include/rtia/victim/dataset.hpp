#pragma once

#include <string>
#include <vector>

#include "rtia/nn/tensor.hpp"
#include "rtia/victim/boxes.hpp"
#include "rtia/world/world.hpp"

namespace rtia::victim {

struct LabeledFrame {
  nn::Tensor frame;          // [3,H,W]
  std::vector<BBox> labels;  // conf = 1, class_id set
};

struct Dataset {
  int frame_size = 32;
  std::vector<LabeledFrame> items;
};

// Renders n random single-view scenes (1-5 objects of mixed classes with
// jittered world sizes) and records the projected boxes as labels. Boxes
// thinner than one pixel are dropped from the labels.
Dataset generate_dataset(int n, const world::WorldConfig& cfg, uint64_t seed);

// Directory layout: meta.txt (count, frame size), labels.csv
// (frame,class,cx,cy,w,h), frames/NNNNNN.bin (raw f32 [3,H,W]).
void save_dataset(const Dataset& ds, const std::string& dir);
Dataset load_dataset(const std::string& dir);

}  // namespace rtia::victim
