#include "rtia/world/world.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rtia/world/render.hpp"

namespace rtia::world {

Scenario scenario_from_string(const std::string& s) {
  if (s == "E1") return Scenario::kE1;
  if (s == "E2") return Scenario::kE2;
  if (s == "E3") return Scenario::kE3;
  if (s == "E4") return Scenario::kE4;
  throw std::invalid_argument("unknown scenario: " + s);
}

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::kE1: return "E1";
    case Scenario::kE2: return "E2";
    case Scenario::kE3: return "E3";
    case Scenario::kE4: return "E4";
  }
  return "?";
}

std::string to_string(DoneCause c) {
  switch (c) {
    case DoneCause::kNone: return "none";
    case DoneCause::kTargetFar: return "target_far";
    case DoneCause::kStopped: return "stopped";
    case DoneCause::kCollided: return "collided";
    case DoneCause::kTimeout: return "timeout";
  }
  return "?";
}

double VehicleState::speed() const { return std::hypot(v_lat, v_fwd); }

GuidanceCommand guidance(const std::optional<victim::BBox>& box, const WorldConfig& cfg) {
  GuidanceCommand cmd;
  if (!box) return cmd;
  cmd.lateral_rate = cfg.k_lat * (0.5 - box->cx);
  cmd.forward_rate = cfg.k_fwd * (cfg.s_ref - box->w);
  cmd.lateral_rate = std::clamp(cmd.lateral_rate, -cfg.v_max, cfg.v_max);
  cmd.forward_rate = std::clamp(cmd.forward_rate, -cfg.v_max, cfg.v_max);
  return cmd;
}

namespace {

std::array<double, 3> class_color(int class_id, nn::RngStream& rng) {
  std::array<double, 3> base{};
  switch (class_id) {
    case kClassCar: base = {0.85, 0.15, 0.12}; break;
    case kClassTruck: base = {0.15, 0.35, 0.85}; break;
    default: base = {0.20, 0.80, 0.25}; break;
  }
  for (auto& c : base) c = std::clamp(c + rng.uniform(-0.08, 0.08), 0.02, 0.98);
  return base;
}

SceneObject make_object(int class_id, double lat, double fwd, double v_fwd, nn::RngStream& rng) {
  SceneObject o;
  o.class_id = class_id;
  o.lat = lat;
  o.fwd = fwd;
  o.v_fwd = v_fwd;
  switch (class_id) {
    case kClassCar:
      o.width = 3.5;
      o.height = 2.0;
      break;
    case kClassTruck:
      o.width = 4.8;
      o.height = 3.0;
      break;
    default:
      o.width = 0.7;
      o.height = 1.9;
      break;
  }
  o.color = class_color(class_id, rng);
  return o;
}

}  // namespace

Scene build_scene(Scenario scenario, const WorldConfig& cfg, nn::RngStream& rng) {
  Scene scene;
  scene.background_seed = rng.next_u64();
  switch (scenario) {
    case Scenario::kE1:
      scene.objects.push_back(make_object(kClassCar, 0.0, 0.0, 0.0, rng));
      scene.objects.push_back(make_object(kClassTruck, -9.0, 12.0, 0.0, rng));
      scene.objects.push_back(make_object(kClassPerson, 6.5, 6.0, 0.0, rng));
      break;
    case Scenario::kE2: {
      scene.objects.push_back(make_object(kClassCar, 0.0, 0.0, 0.0, rng));
      const double lats[4] = {-7.0, 8.0, -13.0, 15.0};
      const double fwds[4] = {-3.0, 2.5, 7.0, 9.0};
      for (int i = 0; i < 4; ++i)
        scene.objects.push_back(make_object(kClassCar, lats[i], fwds[i], 0.0, rng));
      scene.objects.push_back(make_object(kClassPerson, -4.0, 5.0, 0.0, rng));
      scene.objects.push_back(make_object(kClassPerson, 5.0, -2.0, 0.0, rng));
      break;
    }
    case Scenario::kE3:
      scene.objects.push_back(make_object(kClassCar, 0.0, 0.0, cfg.lead_speed, rng));
      scene.objects.push_back(make_object(kClassTruck, -10.0, 18.0, 0.0, rng));
      break;
    case Scenario::kE4: {
      scene.objects.push_back(make_object(kClassCar, 0.0, 0.0, cfg.lead_speed, rng));
      scene.objects.push_back(make_object(kClassCar, -6.0, 9.0, cfg.lead_speed * 0.9, rng));
      scene.objects.push_back(make_object(kClassCar, 7.0, 16.0, cfg.lead_speed * 1.1, rng));
      scene.objects.push_back(make_object(kClassCar, -9.5, 26.0, cfg.lead_speed, rng));
      break;
    }
  }
  scene.primary = 0;
  return scene;
}

StepOutcome World::reset(Scenario scenario, uint64_t seed) {
  scenario_ = scenario;
  nn::RngStream rng(seed);
  nn::RngStream scene_rng = rng.child("scene");
  scene_ = build_scene(scenario, cfg_, scene_rng);

  const int si = static_cast<int>(scenario);
  const double nominal_fwd = (scenario == Scenario::kE3 || scenario == Scenario::kE4) ? -17.0 : -40.0;
  nn::RngStream disp = rng.child("displacement");
  state_ = VehicleState{};
  state_.lat = disp.uniform(-cfg_.disp_lat[static_cast<std::size_t>(si)],
                            cfg_.disp_lat[static_cast<std::size_t>(si)]);
  state_.fwd = nominal_fwd + disp.uniform(-cfg_.disp_fwd[static_cast<std::size_t>(si)],
                                          cfg_.disp_fwd[static_cast<std::size_t>(si)]);
  t_ = 0;
  done_ = false;

  StepOutcome out;
  out.frame = render(state_, scene_, cfg_);
  out.state = state_;
  return out;
}

double World::target_distance() const {
  const auto& obj = scene_.objects[static_cast<std::size_t>(scene_.primary)];
  return std::hypot(obj.lat - state_.lat, obj.fwd - state_.fwd);
}

double World::min_object_distance() const {
  double best = 1e18;
  for (const auto& obj : scene_.objects)
    best = std::min(best, std::hypot(obj.lat - state_.lat, obj.fwd - state_.fwd));
  return best;
}

StepOutcome World::step(const GuidanceCommand& cmd) {
  if (done_) throw std::logic_error("World::step: episode already done");

  // The lateral command is the desired box-recentering rate in the image
  // axis; the vehicle strafes opposite to move the box toward the center.
  const double v_cmd_lat = std::clamp(-cmd.lateral_rate, -cfg_.v_max, cfg_.v_max);
  const double v_cmd_fwd = std::clamp(cmd.forward_rate, -cfg_.v_max, cfg_.v_max);
  const double alpha = std::min(1.0, cfg_.dt / cfg_.tau);
  state_.v_lat += (v_cmd_lat - state_.v_lat) * alpha;
  state_.v_fwd += (v_cmd_fwd - state_.v_fwd) * alpha;
  state_.v_lat = std::clamp(state_.v_lat, -cfg_.v_max, cfg_.v_max);
  state_.v_fwd = std::clamp(state_.v_fwd, -cfg_.v_max, cfg_.v_max);
  state_.lat += state_.v_lat * cfg_.dt;
  state_.fwd += state_.v_fwd * cfg_.dt;

  for (auto& obj : scene_.objects) obj.fwd += obj.v_fwd * cfg_.dt;

  ++t_;
  if (!state_.collided && min_object_distance() < cfg_.collision_radius) state_.collided = true;

  const double speed = state_.speed();
  const double dist = target_distance();
  const int si = static_cast<int>(scenario_);
  const bool grace_over = t_ >= cfg_.grace_steps;

  DoneCause cause = DoneCause::kNone;
  if (state_.collided) {
    cause = DoneCause::kCollided;
  } else if (scenario_ == Scenario::kE4 && dist > cfg_.e4_far_radius) {
    cause = DoneCause::kTargetFar;
  } else if ((scenario_ == Scenario::kE1 || scenario_ == Scenario::kE2) && grace_over &&
             dist > cfg_.far_radius) {
    cause = DoneCause::kTargetFar;
  } else if (scenario_ != Scenario::kE4 && grace_over && speed < cfg_.stop_speed) {
    cause = DoneCause::kStopped;
  } else if (t_ >= cfg_.max_steps[static_cast<std::size_t>(si)]) {
    cause = DoneCause::kTimeout;
  }
  done_ = cause != DoneCause::kNone;

  double reward = 0.0;
  switch (scenario_) {
    case Scenario::kE1:
      reward = done_ ? dist : speed;
      break;
    case Scenario::kE2:
      reward = cfg_.e2_reward_sign * (done_ ? state_.lat : state_.v_lat);
      break;
    case Scenario::kE3:
      reward = state_.collided ? 10.0 + speed : speed;
      break;
    case Scenario::kE4:
      if (state_.collided)
        reward = 20.0 + speed;
      else if (dist > cfg_.e4_far_radius)
        reward = 10.0 + speed;
      else
        reward = speed;
      break;
  }

  StepOutcome out;
  out.frame = render(state_, scene_, cfg_);
  out.state = state_;
  out.reward = reward;
  out.done = done_;
  out.done_cause = cause;
  return out;
}

}  // namespace rtia::world
