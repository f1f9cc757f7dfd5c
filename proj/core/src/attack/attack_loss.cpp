#include "rtia/attack/attack_loss.hpp"

#include <algorithm>
#include <cmath>

namespace rtia::attack {

using namespace rtia::nn;
using victim::AnchorLayout;
using victim::DetectorConfig;
using victim::DetectionGrid;
using victim::ScaleValues;

AnchorAssignment assign_anchor(const TargetBox& box, const AnchorLayout& anchors) {
  AnchorAssignment best;
  double best_d = 1e18;
  for (int s = 0; s < anchors.num_scales(); ++s) {
    for (int k = 0; k < anchors.anchors_per_scale; ++k) {
      const auto& tmpl = anchors.tmpl(s, k);
      const double dw = std::sqrt(tmpl[0]) - std::sqrt(box.w);
      const double dh = std::sqrt(tmpl[1]) - std::sqrt(box.h);
      const double d = dw * dw + dh * dh;
      if (d < best_d) {
        best_d = d;
        best = {s, 0, k};
      }
    }
  }
  const int s = anchors.grid_sizes[static_cast<std::size_t>(best.scale)];
  const int col = std::min(s - 1, std::max(0, static_cast<int>(std::floor(box.x * s))));
  const int row = std::min(s - 1, std::max(0, static_cast<int>(std::floor(box.y * s))));
  best.cell = row * s + col;
  return best;
}

double attack_loss(const DetectionGrid& grid, const TargetBox& box,
                   const AnchorAssignment& assign, const DetectorConfig& cfg) {
  const auto& p = grid.scales[static_cast<std::size_t>(assign.scale)]
                      .anchors[static_cast<std::size_t>(assign.anchor)]
                      [static_cast<std::size_t>(assign.cell)];
  double l = 0.0;
  l += cfg.lambda_coord * ((box.x - p.x) * (box.x - p.x) + (box.y - p.y) * (box.y - p.y));
  const double dw = std::sqrt(box.w) - std::sqrt(p.w);
  const double dh = std::sqrt(box.h) - std::sqrt(p.h);
  l += cfg.lambda_coord * (dw * dw + dh * dh);
  l += (1.0 - p.conf) * (1.0 - p.conf);

  double noobj = 0.0;
  for (std::size_t si = 0; si < grid.scales.size(); ++si)
    for (std::size_t k = 0; k < grid.scales[si].anchors.size(); ++k)
      for (std::size_t j = 0; j < grid.scales[si].anchors[k].size(); ++j) {
        if (static_cast<int>(si) == assign.scale && static_cast<int>(k) == assign.anchor &&
            static_cast<int>(j) == assign.cell)
          continue;
        const double c = grid.scales[si].anchors[k][j].conf;
        noobj += c * c;
      }
  l += cfg.lambda_noobj * noobj;

  for (int c = 0; c < cfg.num_classes; ++c) {
    const double target = c == box.class_id ? 1.0 : 0.0;
    const double d = target - p.cls[static_cast<std::size_t>(c)];
    l += d * d;
  }
  return l;
}

namespace {

// positive-slot terms for one target box
Value positive_terms(const ScaleValues& sv, const TargetBox& box,
                     const AnchorAssignment& assign, const DetectorConfig& cfg) {
  const int j = assign.cell;
  const int k = assign.anchor;
  const int cells = sv.s * sv.s;

  Value xs = gather(sv.x[static_cast<std::size_t>(k)], j);
  Value ys = gather(sv.y[static_cast<std::size_t>(k)], j);
  Value ws = gather(sv.w[static_cast<std::size_t>(k)], j);
  Value hs = gather(sv.h[static_cast<std::size_t>(k)], j);
  Value cs = gather(sv.conf[static_cast<std::size_t>(k)], j);

  Value coord = add(square(affine(xs, -1.0, box.x)), square(affine(ys, -1.0, box.y)));
  Value size = add(square(affine(sqrt_(ws), -1.0, std::sqrt(box.w))),
                   square(affine(sqrt_(hs), -1.0, std::sqrt(box.h))));
  Value obj = square(affine(cs, -1.0, 1.0));

  Value cls_terms = obj;  // seeded; replaced below
  bool first = true;
  for (int c = 0; c < cfg.num_classes; ++c) {
    const double target = c == box.class_id ? 1.0 : 0.0;
    Value pc = gather(sv.cls[static_cast<std::size_t>(k)], static_cast<int64_t>(c) * cells + j);
    Value term = square(affine(pc, -1.0, target));
    cls_terms = first ? term : add(cls_terms, term);
    first = false;
  }

  Value l = affine(add(coord, size), cfg.lambda_coord, 0.0);
  l = add(l, obj);
  l = add(l, cls_terms);
  return l;
}

Value loss_for_boxes(const std::vector<ScaleValues>& scales,
                     const std::vector<TargetBox>& boxes,
                     const std::vector<AnchorAssignment>& assigns, const DetectorConfig& cfg) {
  // lambda_noobj * (sum of C^2 over all slots - sum over assigned slots)
  Value all_sq = sum_squares(scales[0].conf[0]);
  for (std::size_t si = 0; si < scales.size(); ++si)
    for (std::size_t k = 0; k < scales[si].conf.size(); ++k) {
      if (si == 0 && k == 0) continue;
      all_sq = add(all_sq, sum_squares(scales[si].conf[k]));
    }

  std::vector<AnchorAssignment> taken;
  Value total = affine(all_sq, cfg.lambda_noobj, 0.0);
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const auto& a = assigns[i];
    if (std::find(taken.begin(), taken.end(), a) != taken.end()) continue;  // slot collision
    taken.push_back(a);
    const auto& sv = scales[static_cast<std::size_t>(a.scale)];
    Value c_at = gather(sv.conf[static_cast<std::size_t>(a.anchor)], a.cell);
    total = add(total, affine(square(c_at), -cfg.lambda_noobj, 0.0));
    total = add(total, positive_terms(sv, boxes[i], a, cfg));
  }
  return total;
}

}  // namespace

Value attack_loss_graph(const std::vector<ScaleValues>& scales, const TargetBox& box,
                        const AnchorAssignment& assign, const DetectorConfig& cfg) {
  return loss_for_boxes(scales, {box}, {assign}, cfg);
}

Value detection_loss_graph(const std::vector<ScaleValues>& scales,
                           const std::vector<TargetBox>& boxes, const DetectorConfig& cfg) {
  std::vector<AnchorAssignment> assigns;
  assigns.reserve(boxes.size());
  for (const auto& b : boxes) assigns.push_back(assign_anchor(b, cfg.anchors));
  return loss_for_boxes(scales, boxes, assigns, cfg);
}

}  // namespace rtia::attack
