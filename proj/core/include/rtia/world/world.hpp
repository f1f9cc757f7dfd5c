#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "rtia/nn/rng.hpp"
#include "rtia/nn/tensor.hpp"
#include "rtia/victim/boxes.hpp"

namespace rtia::world {

enum class Scenario { kE1, kE2, kE3, kE4 };

Scenario scenario_from_string(const std::string& s);  // "E1".."E4"
std::string to_string(Scenario s);

enum class DoneCause { kNone, kTargetFar, kStopped, kCollided, kTimeout };
std::string to_string(DoneCause c);

// Object classes the detector knows about.
inline constexpr int kClassCar = 0;
inline constexpr int kClassTruck = 1;
inline constexpr int kClassPerson = 2;
inline constexpr int kNumClasses = 3;

struct WorldConfig {
  int frame_size = 32;
  double dt = 0.1;            // s
  double tau = 0.4;           // first-order velocity tracking constant, s
  double v_max = 5.0;         // m/s
  double k_lat = 20.0;        // guidance gains (shared, see guidance())
  double k_fwd = 20.0;
  double s_ref = 0.35;        // reference box width; standoff = focal*obj_w/s_ref
  double focal = 1.5;         // normalized focal: apparent width = focal*W_obj/d
  double collision_radius = 2.0;
  double stop_speed = 0.1;
  double far_radius = 40.0;   // E1/E2 termination distance
  double e4_far_radius = 50.0;
  double lead_speed = 2.0;    // m/s, scripted lead vehicles in E3/E4
  double noise_amplitude = 0.05;
  double background_base = 0.08;
  int grace_steps = 15;       // far/stopped causes ignored before this step
  std::array<int, 4> max_steps = {300, 300, 300, 700};
  std::array<double, 4> disp_lat = {5.0, 5.0, 1.0, 1.0};   // reset displacement half-ranges
  std::array<double, 4> disp_fwd = {2.5, 2.5, 2.5, 2.5};
  double e2_reward_sign = 1.0;  // +1 drifts one way, -1 the other
  double near_clip = 0.1;       // objects at d <= near_clip are culled
};

struct SceneObject {
  int class_id = kClassCar;
  double lat = 0.0;   // world position, m
  double fwd = 0.0;
  double width = 3.5;   // world size, m
  double height = 2.0;
  double v_fwd = 0.0;  // scripted forward speed
  std::array<double, 3> color = {0.8, 0.2, 0.2};
};

struct Scene {
  std::vector<SceneObject> objects;
  uint64_t background_seed = 0;
  int primary = 0;  // index of the tracked/termination-reference object
};

struct VehicleState {
  double lat = 0.0;
  double fwd = 0.0;
  double v_lat = 0.0;
  double v_fwd = 0.0;
  bool collided = false;

  double speed() const;
};

struct GuidanceCommand {
  double lateral_rate = 0.0;  // desired box-recentering rate in the image axis
  double forward_rate = 0.0;
};

struct StepOutcome {
  nn::Tensor frame;  // [3,H,W] in [0,1]
  VehicleState state;
  double reward = 0.0;
  bool done = false;
  DoneCause done_cause = DoneCause::kNone;
};

// The tracking law: center the box and hold its width at s_ref. No box means
// hold position (zero command). Components are clipped to [-v_max, v_max].
GuidanceCommand guidance(const std::optional<victim::BBox>& box, const WorldConfig& cfg);

// Deterministic 2D vehicle world. One instance per episode thread; all
// randomness comes from the reset seed.
class World {
 public:
  explicit World(WorldConfig cfg = {}) : cfg_(cfg) {}

  StepOutcome reset(Scenario scenario, uint64_t seed);

  // Integrates one control step. Throws std::logic_error if the episode is
  // already done.
  StepOutcome step(const GuidanceCommand& cmd);

  const WorldConfig& config() const { return cfg_; }
  const Scene& scene() const { return scene_; }
  const VehicleState& state() const { return state_; }
  Scenario scenario() const { return scenario_; }
  int step_count() const { return t_; }
  bool done() const { return done_; }

  // Distance from the vehicle to the scenario's reference object.
  double target_distance() const;

 private:
  double min_object_distance() const;

  WorldConfig cfg_;
  Scenario scenario_ = Scenario::kE1;
  Scene scene_;
  VehicleState state_;
  int t_ = 0;
  bool done_ = false;
};

// Scene construction for a scenario (used by reset and by dataset tooling).
Scene build_scene(Scenario scenario, const WorldConfig& cfg, nn::RngStream& rng);

}  // namespace rtia::world
