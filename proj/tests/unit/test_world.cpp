#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "rtia/world/render.hpp"
#include "rtia/world/world.hpp"

using namespace rtia;
using namespace rtia::world;

namespace {

// closed loop on renderer geometry, no detector
StepOutcome run_oracle_episode(World& env, Scenario sc, uint64_t seed, int max_iters = 400) {
  StepOutcome out = env.reset(sc, seed);
  for (int i = 0; i < max_iters && !out.done; ++i) {
    auto boxes = truth_boxes(env.state(), env.scene(), env.config());
    std::optional<victim::BBox> primary;
    if (boxes[static_cast<std::size_t>(env.scene().primary)].visible)
      primary = boxes[static_cast<std::size_t>(env.scene().primary)].box;
    out = env.step(guidance(primary, env.config()));
  }
  return out;
}

}  // namespace

TEST_CASE("reset: identical outcome for identical seed") {
  World a, b;
  auto ra = a.reset(Scenario::kE1, 1234);
  auto rb = b.reset(Scenario::kE1, 1234);
  CHECK(ra.state.lat == rb.state.lat);
  CHECK(ra.state.fwd == rb.state.fwd);
  CHECK(ra.reward == 0.0);
  CHECK_FALSE(ra.done);
  CHECK(ra.done_cause == DoneCause::kNone);
  for (int64_t i = 0; i < ra.frame.size(); ++i) CHECK(ra.frame[i] == rb.frame[i]);
}

TEST_CASE("reset: lateral offsets uniform on [-5,5] (KS < 0.02 over 1e4 seeds)") {
  World env;
  std::vector<double> lats;
  for (uint64_t s = 0; s < 10000; ++s) {
    env.reset(Scenario::kE1, s * 7919 + 3);
    lats.push_back(env.state().lat);
  }
  CHECK(oracles::ks_statistic_uniform(lats, -5.0, 5.0) < 0.02);
}

TEST_CASE("reset: E1 nominal start distance is 40 m before displacement") {
  // average displacement is zero; verify the nominal geometry directly
  WorldConfig cfg;
  cfg.disp_lat = {0, 0, 0, 0};
  cfg.disp_fwd = {0, 0, 0, 0};
  World env(cfg);
  env.reset(Scenario::kE1, 99);
  CHECK(env.target_distance() == doctest::Approx(40.0).epsilon(1e-12));
}

TEST_CASE("step: zero command from rest leaves position unchanged, reward 0") {
  WorldConfig cfg;
  World env(cfg);
  env.reset(Scenario::kE1, 5);
  const auto before = env.state();
  auto out = env.step(GuidanceCommand{});
  CHECK(out.state.lat == before.lat);
  CHECK(out.state.fwd == before.fwd);
  CHECK(out.reward == 0.0);
}

TEST_CASE("step: E3 collision transition pays 10 + speed") {
  WorldConfig cfg;
  World env(cfg);
  env.reset(Scenario::kE3, 17);
  // drive straight at the lead car at full speed
  GuidanceCommand cmd;
  cmd.forward_rate = cfg.v_max;
  StepOutcome out;
  for (int i = 0; i < 200; ++i) {
    out = env.step(cmd);
    if (out.done) break;
  }
  REQUIRE(out.done);
  CHECK(out.done_cause == DoneCause::kCollided);
  CHECK(out.state.collided);
  CHECK(out.reward == doctest::Approx(10.0 + out.state.speed()).epsilon(1e-12));
}

TEST_CASE("step: E4 beyond 50 m terminates as target_far with 10 + speed") {
  WorldConfig cfg;
  cfg.disp_lat = {0, 0, 0, 0};
  cfg.disp_fwd = {0, 0, 0, 0};
  World env(cfg);
  env.reset(Scenario::kE4, 3);
  // hold still; the lead drives away at lead_speed until distance > 50
  StepOutcome out;
  for (int i = 0; i < 700 && !env.done(); ++i) out = env.step(GuidanceCommand{});
  REQUIRE(out.done);
  CHECK(out.done_cause == DoneCause::kTargetFar);
  CHECK(env.target_distance() > 50.0);
  CHECK(out.reward == doctest::Approx(10.0 + out.state.speed()).epsilon(1e-12));
}

TEST_CASE("step: stepping a finished episode is rejected") {
  WorldConfig cfg;
  World env(cfg);
  env.reset(Scenario::kE4, 3);
  while (!env.done()) env.step(GuidanceCommand{});
  CHECK_THROWS_AS(env.step(GuidanceCommand{}), std::logic_error);
}

TEST_CASE("render: apparent width halves at double distance (+-1 px)") {
  WorldConfig cfg;
  Scene scene;
  SceneObject obj;
  obj.lat = 0;
  obj.fwd = 10;
  obj.width = 3.5;
  obj.height = 2.0;
  scene.objects.push_back(obj);
  scene.background_seed = 5;

  VehicleState near{};   // d = 10
  VehicleState far{};
  far.fwd = -10;         // d = 20

  auto tb_near = truth_boxes(near, scene, cfg)[0];
  auto tb_far = truth_boxes(far, scene, cfg)[0];
  REQUIRE(tb_near.visible);
  REQUIRE(tb_far.visible);
  const double px = 1.0 / cfg.frame_size;
  CHECK(std::abs(tb_near.box.w - 2.0 * tb_far.box.w) <= 2 * px);

  // pixel-level: count lit columns in the rendered frames
  auto lit_cols = [&](const VehicleState& st) {
    auto frame = render(st, scene, cfg);
    const int n = cfg.frame_size;
    int cols = 0;
    for (int x = 0; x < n; ++x) {
      bool lit = false;
      for (int y = 0; y < n; ++y)
        if (frame[(0 * n + y) * n + x] == obj.color[0]) lit = true;
      if (lit) ++cols;
    }
    return cols;
  };
  CHECK(std::abs(lit_cols(near) - 2 * lit_cols(far)) <= 2);
}

TEST_CASE("render: centered object lands at image center (+-1 px)") {
  WorldConfig cfg;
  Scene scene;
  SceneObject obj;
  obj.lat = 0;
  obj.fwd = 12;
  scene.objects.push_back(obj);
  scene.background_seed = 9;
  VehicleState st{};
  auto frame = render(st, scene, cfg);
  const int n = cfg.frame_size;
  int x_min = n, x_max = -1;
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      if (frame[(0 * n + y) * n + x] == obj.color[0]) {
        x_min = std::min(x_min, x);
        x_max = std::max(x_max, x);
      }
  REQUIRE(x_max >= 0);
  const double center = (x_min + x_max + 1) / 2.0;
  CHECK(std::abs(center - n / 2.0) <= 1.0);
}

TEST_CASE("render: culls objects at or behind the near plane") {
  WorldConfig cfg;
  Scene scene;
  SceneObject obj;
  obj.fwd = 0.05;  // inside near clip
  scene.objects.push_back(obj);
  scene.background_seed = 2;
  VehicleState st{};
  auto tbs = truth_boxes(st, scene, cfg);
  CHECK_FALSE(tbs[0].visible);
  auto frame = render(st, scene, cfg);  // must not throw
  CHECK(frame.all_finite());
}

TEST_CASE("render: deterministic golden frame for fixed (state, scene, seed)") {
  WorldConfig cfg;
  World env(cfg);
  env.reset(Scenario::kE2, 20240101);
  auto frame = render(env.state(), env.scene(), cfg);
  const uint64_t h1 = oracles::fnv_hash(frame.data(), frame.size());
  auto frame2 = render(env.state(), env.scene(), cfg);
  CHECK(h1 == oracles::fnv_hash(frame2.data(), frame2.size()));
  // frozen value generated once from this renderer
  CHECK(h1 == UINT64_C(0x4D941D08D8657BD4));
}

TEST_CASE("guidance: setpoint, linear law, no-box hold") {
  WorldConfig cfg;
  victim::BBox centered{0.5, 0.5, cfg.s_ref, 0.3, 1.0, 0};
  auto cmd = guidance(centered, cfg);
  CHECK(cmd.lateral_rate == doctest::Approx(0.0));
  CHECK(cmd.forward_rate == doctest::Approx(0.0));

  victim::BBox left{0.25, 0.5, cfg.s_ref, 0.3, 1.0, 0};
  cmd = guidance(left, cfg);
  CHECK(cmd.lateral_rate == doctest::Approx(0.25 * cfg.k_lat));

  cmd = guidance(std::nullopt, cfg);
  CHECK(cmd.lateral_rate == 0.0);
  CHECK(cmd.forward_rate == 0.0);

  // clipped to [-v_max, v_max]
  victim::BBox tiny{0.0, 0.5, 0.0, 0.0, 1.0, 0};
  cmd = guidance(tiny, cfg);
  CHECK(cmd.lateral_rate <= cfg.v_max);
  CHECK(cmd.forward_rate <= cfg.v_max);
}

TEST_CASE("guidance: oracle closed loop reaches the 15 m standoff within 300 steps") {
  World env;
  for (uint64_t seed : {11ull, 22ull, 33ull}) {
    auto out = run_oracle_episode(env, Scenario::kE1, seed, 300);
    REQUIRE(out.done);
    CHECK(out.done_cause == DoneCause::kStopped);
    CHECK(std::abs(env.target_distance() - 15.0) < 1.0);
    CHECK(out.reward == doctest::Approx(env.target_distance()));
  }
}

TEST_CASE("episode trajectories bit-identical for fixed (scenario, seed, commands)") {
  auto run = [](uint64_t seed) {
    World env;
    env.reset(Scenario::kE2, seed);
    std::vector<double> trace;
    GuidanceCommand cmd;
    cmd.forward_rate = 1.0;
    cmd.lateral_rate = -0.5;
    for (int i = 0; i < 50; ++i) {
      auto out = env.step(cmd);
      trace.push_back(out.state.lat);
      trace.push_back(out.state.fwd);
      trace.push_back(out.reward);
      if (out.done) break;
    }
    return trace;
  };
  CHECK(run(5) == run(5));
}

TEST_CASE("collision flag implies proximity below the collision radius") {
  WorldConfig cfg;
  World env(cfg);
  env.reset(Scenario::kE3, 7);
  GuidanceCommand cmd;
  cmd.forward_rate = cfg.v_max;
  double min_dist = 1e9;
  while (!env.done()) {
    env.step(cmd);
    double d = 1e9;
    for (const auto& obj : env.scene().objects)
      d = std::min(d, std::hypot(obj.lat - env.state().lat, obj.fwd - env.state().fwd));
    min_dist = std::min(min_dist, d);
  }
  REQUIRE(env.state().collided);
  CHECK(min_dist < cfg.collision_radius);
}

TEST_CASE("collided is monotone within an episode") {
  WorldConfig cfg;
  World env(cfg);
  env.reset(Scenario::kE4, 7);
  GuidanceCommand cmd;
  cmd.forward_rate = cfg.v_max;
  bool seen = false;
  while (!env.done()) {
    auto out = env.step(cmd);
    if (seen) CHECK(out.state.collided);
    seen = seen || out.state.collided;
  }
}

TEST_CASE("E2 reward sign flips with the configured variant") {
  WorldConfig left;
  WorldConfig right;
  right.e2_reward_sign = -1.0;
  World a(left), b(right);
  a.reset(Scenario::kE2, 42);
  b.reset(Scenario::kE2, 42);
  GuidanceCommand cmd;
  cmd.lateral_rate = -2.0;  // strafe toward +lat
  auto oa = a.step(cmd);
  auto ob = b.step(cmd);
  CHECK(oa.reward == doctest::Approx(-ob.reward));
  CHECK(oa.reward != 0.0);
}
