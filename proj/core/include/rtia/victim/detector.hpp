#pragma once

#include <array>
#include <vector>

#include "rtia/nn/modules.hpp"
#include "rtia/victim/boxes.hpp"

namespace rtia::victim {

// Anchor layout: two grid scales, two size templates per scale. Template
// index is scale * anchors_per_scale + anchor.
struct AnchorLayout {
  std::vector<int> grid_sizes = {8, 4};
  int anchors_per_scale = 2;
  std::vector<std::array<double, 2>> templates = {
      {0.15, 0.15}, {0.35, 0.35}, {0.50, 0.50}, {0.80, 0.80}};

  int num_scales() const { return static_cast<int>(grid_sizes.size()); }
  const std::array<double, 2>& tmpl(int scale, int anchor) const {
    return templates[static_cast<std::size_t>(scale * anchors_per_scale + anchor)];
  }
};

struct DetectorConfig {
  int frame_size = 32;
  int num_classes = 3;
  double lambda_coord = 5.0;
  double lambda_noobj = 0.5;
  double conf_thresh = 0.30;
  double iou_thresh = 0.45;
  AnchorLayout anchors;
};

// One anchor slot's decoded prediction.
struct AnchorPred {
  double x = 0, y = 0, w = 0, h = 0, conf = 0;
  std::array<double, 3> cls = {0, 0, 0};
};

// Decoded multi-scale prediction tensor: scales[s].anchors[k][cell j],
// j = row * S + col.
struct DetectionGrid {
  struct Scale {
    int s = 0;
    std::vector<std::vector<AnchorPred>> anchors;
  };
  std::vector<Scale> scales;

  std::vector<BBox> to_boxes() const;
};

// Graph-side decoded outputs for one scale: per anchor, [1,S,S] values for
// the box fields and [C,S,S] class probabilities. Coordinates are global
// normalized (cell offset folded in), sizes are template-relative softplus.
struct ScaleValues {
  int s = 0;
  std::vector<nn::Value> x, y, w, h, conf;
  std::vector<nn::Value> cls;
};

// Small two-scale grid-anchor detector. Logistic squash on coordinates,
// objectness and class scores; softplus on sizes (template-relative, so a
// zero-initialized head predicts the template itself). Heads are zero-init:
// an untrained detector outputs conf = 0.5 everywhere.
class DetectorNet {
 public:
  DetectorNet(const DetectorConfig& cfg, nn::RngStream& rng);

  std::vector<ScaleValues> forward(nn::Tape& t, nn::Value frame, bool frozen) const;

  // Plain inference: deterministic, parameter-pure.
  DetectionGrid detect(const nn::Tensor& frame) const;

  // detect + nms + per-config thresholds.
  std::vector<BBox> detect_boxes(const nn::Tensor& frame) const;

  const DetectorConfig& config() const { return cfg_; }
  nn::ParamGroup& group() { return group_; }
  const nn::ParamGroup& group() const { return group_; }

 private:
  DetectorConfig cfg_;
  nn::ParamGroup group_;
  nn::Conv3x3 c1_, c2_, c3_;
  nn::Conv3x3 head1_, head2_;
};

}  // namespace rtia::victim
