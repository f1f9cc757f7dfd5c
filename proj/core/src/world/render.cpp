#include "rtia/world/render.hpp"

#include <algorithm>
#include <cmath>

namespace rtia::world {

namespace {

// Per-pixel hash noise so the background is a fixed texture of the scene, not
// of time.
double pixel_noise(uint64_t seed, int y, int x, int c) {
  uint64_t h = seed ^ (static_cast<uint64_t>(y) * 0x9e3779b97f4a7c15ull) ^
               (static_cast<uint64_t>(x) * 0xbf58476d1ce4e5b9ull) ^
               (static_cast<uint64_t>(c) * 0x94d049bb133111ebull);
  h ^= h >> 30;
  h *= 0xbf58476d1ce4e5b9ull;
  h ^= h >> 27;
  h *= 0x94d049bb133111ebull;
  h ^= h >> 31;
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

struct Projected {
  double cx, cy, w, h;  // normalized, unclipped
  double dist;
  const SceneObject* obj;
};

std::vector<Projected> project_all(const VehicleState& state, const Scene& scene,
                                   const WorldConfig& cfg) {
  std::vector<Projected> out;
  for (const auto& obj : scene.objects) {
    const double d = obj.fwd - state.fwd;
    if (d <= cfg.near_clip) continue;
    Projected p{};
    p.w = cfg.focal * obj.width / d;
    p.h = cfg.focal * obj.height / d;
    p.cx = cfg.focal * (obj.lat - state.lat) / d + 0.5;
    p.cy = 0.5;
    p.dist = d;
    p.obj = &obj;
    out.push_back(p);
  }
  return out;
}

}  // namespace

nn::Tensor render(const VehicleState& state, const Scene& scene, const WorldConfig& cfg) {
  const int n = cfg.frame_size;
  nn::Tensor frame({3, n, n});
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x)
        frame[(static_cast<int64_t>(c) * n + y) * n + x] =
            cfg.background_base +
            cfg.noise_amplitude * pixel_noise(scene.background_seed, y, x, c);

  auto projected = project_all(state, scene, cfg);
  std::stable_sort(projected.begin(), projected.end(),
                   [](const Projected& a, const Projected& b) { return a.dist > b.dist; });

  for (const auto& p : projected) {
    const int x0 = std::max(0, static_cast<int>(std::lround((p.cx - p.w / 2) * n)));
    const int x1 = std::min(n, static_cast<int>(std::lround((p.cx + p.w / 2) * n)));
    const int y0 = std::max(0, static_cast<int>(std::lround((p.cy - p.h / 2) * n)));
    const int y1 = std::min(n, static_cast<int>(std::lround((p.cy + p.h / 2) * n)));
    for (int c = 0; c < 3; ++c)
      for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x)
          frame[(static_cast<int64_t>(c) * n + y) * n + x] = p.obj->color[static_cast<std::size_t>(c)];
  }
  return frame;
}

std::vector<TruthBox> truth_boxes(const VehicleState& state, const Scene& scene,
                                  const WorldConfig& cfg) {
  std::vector<TruthBox> out;
  int idx = 0;
  for (const auto& obj : scene.objects) {
    TruthBox tb;
    tb.object_index = idx++;
    const double d = obj.fwd - state.fwd;
    if (d <= cfg.near_clip) {
      out.push_back(tb);
      continue;
    }
    const double w = cfg.focal * obj.width / d;
    const double h = cfg.focal * obj.height / d;
    const double cx = cfg.focal * (obj.lat - state.lat) / d + 0.5;
    const double cy = 0.5;
    // clip to the unit square; invisible if the intersection is empty
    const double x0 = std::max(0.0, cx - w / 2), x1 = std::min(1.0, cx + w / 2);
    const double y0 = std::max(0.0, cy - h / 2), y1 = std::min(1.0, cy + h / 2);
    if (x1 <= x0 || y1 <= y0) {
      out.push_back(tb);
      continue;
    }
    tb.visible = true;
    tb.box.cx = (x0 + x1) / 2;
    tb.box.cy = (y0 + y1) / 2;
    tb.box.w = x1 - x0;
    tb.box.h = y1 - y0;
    tb.box.conf = 1.0;
    tb.box.class_id = obj.class_id;
    out.push_back(tb);
  }
  return out;
}

}  // namespace rtia::world
