#pragma once

#include <array>
#include <optional>

#include "rtia/victim/boxes.hpp"

namespace rtia::victim {

// Constant-velocity Kalman track over (cx, cy, w, h) and their rates.
struct TrackState {
  std::array<double, 8> mean = {};       // cx, cy, w, h, d(cx), d(cy), d(w), d(h)
  std::array<double, 64> cov = {};       // row-major 8x8, symmetric positive definite
  int id = 0;
  int age = 0;
  int misses = 0;
  int class_id = 0;

  BBox box(double conf = 1.0) const {
    return BBox{mean[0], mean[1], mean[2], mean[3], conf, class_id};
  }
};

struct KfConfig {
  double process_noise = 1e-2;      // Q = q * I8 per predict, normalized coords
  double measurement_noise = 1e-3;  // R = r * I4
  double init_pos_var = 1e-2;
  double init_vel_var = 0.25;
};

struct KfStep {
  std::optional<TrackState> track;
  std::optional<BBox> box;  // the filtered ("kf") box handed to guidance
  bool floored_covariance = false;
};

// One predict(+update) cycle. A missing track initializes from the box; a
// missing box is a pure prediction step. If the updated covariance loses
// positive definiteness it is re-symmetrized and its eigenvalues floored at
// 1e-9 (reported through floored_covariance and a stderr warning).
KfStep kf_track(std::optional<TrackState> track, const std::optional<BBox>& box, double dt,
                const KfConfig& cfg = {});

}  // namespace rtia::victim
