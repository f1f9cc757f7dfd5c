#pragma once

#include <vector>

#include "rtia/world/world.hpp"

namespace rtia::world {

// Pinhole-style rasterizer. Each object in front of the camera becomes a
// filled rectangle of apparent width focal*W_obj/d centered horizontally at
// focal*(lat_obj - lat_veh)/d + 1/2 (normalized), drawn far-to-near over a
// seeded low-amplitude noise background. Deterministic in (state, scene).
nn::Tensor render(const VehicleState& state, const Scene& scene, const WorldConfig& cfg);

struct TruthBox {
  victim::BBox box;   // projected, clipped to the unit square
  int object_index = 0;
  bool visible = false;
};

// Projected ground-truth geometry for every object (culled objects have
// visible=false). The same projection the rasterizer uses.
std::vector<TruthBox> truth_boxes(const VehicleState& state, const Scene& scene,
                                  const WorldConfig& cfg);

}  // namespace rtia::world
