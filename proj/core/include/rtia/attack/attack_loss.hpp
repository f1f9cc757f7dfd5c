#pragma once

#include <vector>

#include "rtia/victim/detector.hpp"

namespace rtia::attack {

// A box the loss tries to make the detector emit: global normalized center,
// size, and the class to claim.
struct TargetBox {
  double x = 0.5, y = 0.5, w = 0.2, h = 0.2;
  int class_id = 0;
};

struct AnchorAssignment {
  int scale = 0;
  int cell = 0;  // row * S + col
  int anchor = 0;

  bool operator==(const AnchorAssignment&) const = default;
};

// Nearest size template in sqrt-space over all (scale, anchor) pairs, ties to
// the lexicographically smallest (scale, anchor); the cell comes from
// discretizing the center with an edge clamp at S-1.
AnchorAssignment assign_anchor(const TargetBox& box, const victim::AnchorLayout& anchors);

// Single-target detection-shaping loss on decoded grid numbers:
//   lambda_coord * [(x-x^)^2 + (y-y^)^2]
// + lambda_coord * [(sqrt w - sqrt w^)^2 + (sqrt h - sqrt h^)^2]
// + (1 - C^)^2 at the assigned slot
// + lambda_noobj * sum of C^2 over every other slot
// + class squared error at the assigned slot (object-indicator convention;
//   the no-object variant of the class term contradicts the loss family this
//   follows and is intentionally not used)
double attack_loss(const victim::DetectionGrid& grid, const TargetBox& box,
                   const AnchorAssignment& assign, const victim::DetectorConfig& cfg);

// Graph-side versions used for gradients (the values carry their tape). The
// multi-box form is the detector training objective; boxes that collide on an
// anchor slot after the first are dropped from the positive terms for that
// sample.
nn::Value attack_loss_graph(const std::vector<victim::ScaleValues>& scales, const TargetBox& box,
                            const AnchorAssignment& assign, const victim::DetectorConfig& cfg);

nn::Value detection_loss_graph(const std::vector<victim::ScaleValues>& scales,
                               const std::vector<TargetBox>& boxes,
                               const victim::DetectorConfig& cfg);

}  // namespace rtia::attack
