#include "rtia/victim/boxes.hpp"

#include <cmath>
#include <numeric>

namespace rtia::victim {

double iou(const BBox& a, const BBox& b) {
  const double ax0 = a.cx - a.w / 2, ax1 = a.cx + a.w / 2;
  const double ay0 = a.cy - a.h / 2, ay1 = a.cy + a.h / 2;
  const double bx0 = b.cx - b.w / 2, bx1 = b.cx + b.w / 2;
  const double by0 = b.cy - b.h / 2, by1 = b.cy + b.h / 2;
  const double ix = std::max(0.0, std::min(ax1, bx1) - std::max(ax0, bx0));
  const double iy = std::max(0.0, std::min(ay1, by1) - std::max(ay0, by0));
  const double inter = ix * iy;
  const double uni = a.w * a.h + b.w * b.h - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

std::vector<BBox> nms(const std::vector<BBox>& candidates, double conf_thresh, double iou_thresh) {
  std::vector<int> order;
  order.reserve(candidates.size());
  for (int i = 0; i < static_cast<int>(candidates.size()); ++i)
    if (candidates[static_cast<std::size_t>(i)].conf >= conf_thresh) order.push_back(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return candidates[static_cast<std::size_t>(a)].conf > candidates[static_cast<std::size_t>(b)].conf;
  });
  std::vector<BBox> kept;
  for (int idx : order) {
    const BBox& c = candidates[static_cast<std::size_t>(idx)];
    bool suppressed = false;
    for (const BBox& k : kept) {
      if (k.class_id == c.class_id && iou(k, c) > iou_thresh) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(c);
  }
  return kept;
}

std::optional<BBox> select_target(const std::vector<BBox>& boxes, int target_class) {
  std::optional<BBox> best;
  for (const BBox& b : boxes) {
    if (b.class_id != target_class) continue;
    if (!best || b.conf > best->conf ||
        (b.conf == best->conf &&
         (b.cx < best->cx || (b.cx == best->cx && b.cy < best->cy))))
      best = b;
  }
  return best;
}

}  // namespace rtia::victim
