#include "rtia/victim/mot.hpp"

#include <algorithm>

namespace rtia::victim {

const std::vector<TrackState>& MotTracker::step(const std::vector<BBox>& boxes, double dt) {
  // predict all tracks first; association runs against predicted boxes
  std::vector<TrackState> predicted;
  predicted.reserve(tracks_.size());
  for (const auto& t : tracks_) {
    auto r = kf_track(t, std::nullopt, dt, cfg_.kf);
    predicted.push_back(*r.track);
  }

  struct Pair {
    double iou;
    int ti, bi;
  };
  std::vector<Pair> pairs;
  for (int ti = 0; ti < static_cast<int>(predicted.size()); ++ti)
    for (int bi = 0; bi < static_cast<int>(boxes.size()); ++bi) {
      const double v = iou(predicted[static_cast<std::size_t>(ti)].box(),
                           boxes[static_cast<std::size_t>(bi)]);
      if (v >= cfg_.iou_min) pairs.push_back({v, ti, bi});
    }
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    return a.iou > b.iou;
  });

  std::vector<int> track_match(predicted.size(), -1);
  std::vector<bool> box_used(boxes.size(), false);
  for (const auto& p : pairs) {
    if (track_match[static_cast<std::size_t>(p.ti)] >= 0 || box_used[static_cast<std::size_t>(p.bi)])
      continue;
    track_match[static_cast<std::size_t>(p.ti)] = p.bi;
    box_used[static_cast<std::size_t>(p.bi)] = true;
  }

  std::vector<TrackState> next;
  next.reserve(predicted.size() + boxes.size());
  for (int ti = 0; ti < static_cast<int>(tracks_.size()); ++ti) {
    const int bi = track_match[static_cast<std::size_t>(ti)];
    if (bi >= 0) {
      auto r = kf_track(tracks_[static_cast<std::size_t>(ti)],
                        boxes[static_cast<std::size_t>(bi)], dt, cfg_.kf);
      next.push_back(*r.track);
    } else {
      auto r = kf_track(tracks_[static_cast<std::size_t>(ti)], std::nullopt, dt, cfg_.kf);
      if (r.track->misses <= cfg_.max_misses) next.push_back(*r.track);
    }
  }
  for (int bi = 0; bi < static_cast<int>(boxes.size()); ++bi) {
    if (box_used[static_cast<std::size_t>(bi)]) continue;
    auto r = kf_track(std::nullopt, boxes[static_cast<std::size_t>(bi)], dt, cfg_.kf);
    r.track->id = next_id_++;
    next.push_back(*r.track);
  }

  tracks_ = std::move(next);
  return tracks_;
}

std::optional<BBox> MotTracker::box_of(int track_id) const {
  for (const auto& t : tracks_)
    if (t.id == track_id) return t.box();
  return std::nullopt;
}

}  // namespace rtia::victim
