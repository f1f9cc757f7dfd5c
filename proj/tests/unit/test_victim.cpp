#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "rtia/victim/kalman.hpp"
#include "rtia/victim/mot.hpp"
#include "rtia/victim/pipeline.hpp"
#include "rtia/world/render.hpp"

using namespace rtia;
using namespace rtia::victim;

namespace {

BBox random_box(nn::RngStream& rng, int classes = 3) {
  BBox b;
  b.cx = rng.uniform(0.05, 0.95);
  b.cy = rng.uniform(0.05, 0.95);
  b.w = rng.uniform(0.05, 0.5);
  b.h = rng.uniform(0.05, 0.5);
  b.conf = rng.uniform();
  b.class_id = static_cast<int>(rng.uniform_index(static_cast<uint64_t>(classes)));
  return b;
}

}  // namespace

TEST_CASE("detect: zero-init heads give conf 0.5 everywhere on any frame") {
  nn::RngStream rng(1);
  DetectorNet net(DetectorConfig{}, rng);
  nn::Tensor zero({3, 32, 32});
  auto grid = net.detect(zero);
  for (const auto& sc : grid.scales)
    for (const auto& anchors : sc.anchors)
      for (const auto& p : anchors) CHECK(p.conf == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("detect: pure function of (frame, parameters)") {
  nn::RngStream rng(2);
  DetectorNet net(DetectorConfig{}, rng);
  nn::Tensor frame({3, 32, 32});
  for (int64_t i = 0; i < frame.size(); ++i) frame[i] = (i % 7) / 7.0;
  auto g1 = net.detect(frame);
  auto g2 = net.detect(frame);
  for (std::size_t s = 0; s < g1.scales.size(); ++s)
    for (std::size_t k = 0; k < g1.scales[s].anchors.size(); ++k)
      for (std::size_t j = 0; j < g1.scales[s].anchors[k].size(); ++j) {
        CHECK(g1.scales[s].anchors[k][j].conf == g2.scales[s].anchors[k][j].conf);
        CHECK(g1.scales[s].anchors[k][j].x == g2.scales[s].anchors[k][j].x);
      }
}

TEST_CASE("detect: decoded centers stay inside their owning cell") {
  nn::RngStream rng(3);
  DetectorNet net(DetectorConfig{}, rng);
  nn::Tensor frame({3, 32, 32});
  for (int64_t i = 0; i < frame.size(); ++i) frame[i] = ((i * 31) % 11) / 11.0;
  auto grid = net.detect(frame);
  for (const auto& sc : grid.scales) {
    for (const auto& anchors : sc.anchors)
      for (int j = 0; j < static_cast<int>(anchors.size()); ++j) {
        const int row = j / sc.s, col = j % sc.s;
        const auto& p = anchors[static_cast<std::size_t>(j)];
        CHECK(p.x >= static_cast<double>(col) / sc.s);
        CHECK(p.x <= static_cast<double>(col + 1) / sc.s);
        CHECK(p.y >= static_cast<double>(row) / sc.s);
        CHECK(p.y <= static_cast<double>(row + 1) / sc.s);
        CHECK(p.w >= 0.0);
        CHECK(p.h >= 0.0);
        CHECK(p.conf >= 0.0);
        CHECK(p.conf <= 1.0);
      }
  }
}

TEST_CASE("nms: empty below threshold, duplicate suppression") {
  CHECK(nms({}, 0.5, 0.5).empty());

  BBox b{0.4, 0.4, 0.2, 0.2, 0.3, 0};
  CHECK(nms({b}, 0.5, 0.5).empty());  // conf below threshold

  BBox hi = b;
  hi.conf = 0.9;
  auto out = nms({hi, hi}, 0.5, 0.5);
  CHECK(out.size() == 1);
}

TEST_CASE("nms: matches the exhaustive reference on random grids") {
  nn::RngStream rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<BBox> boxes;
    const int n = 5 + static_cast<int>(rng.uniform_index(40));
    for (int i = 0; i < n; ++i) boxes.push_back(random_box(rng));
    auto got = nms(boxes, 0.25, 0.45);
    auto want = oracles::reference_nms(boxes, 0.25, 0.45);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].cx == want[i].cx);
      CHECK(got[i].conf == want[i].conf);
      CHECK(got[i].class_id == want[i].class_id);
    }
  }
}

TEST_CASE("nms: survivors are mutually non-overlapping above the threshold per class") {
  nn::RngStream rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<BBox> boxes;
    for (int i = 0; i < 30; ++i) boxes.push_back(random_box(rng));
    auto kept = nms(boxes, 0.2, 0.4);
    for (std::size_t i = 0; i < kept.size(); ++i)
      for (std::size_t j = i + 1; j < kept.size(); ++j)
        if (kept[i].class_id == kept[j].class_id) CHECK(iou(kept[i], kept[j]) <= 0.4);
  }
}

TEST_CASE("select_target: empties, argmax, declared tie-break, rescale invariance") {
  CHECK_FALSE(select_target({}, 0).has_value());

  BBox a{0.2, 0.2, 0.1, 0.1, 0.9, 0};
  BBox b{0.6, 0.6, 0.1, 0.1, 0.4, 0};
  auto sel = select_target({a, b}, 0);
  REQUIRE(sel.has_value());
  CHECK(sel->conf == 0.9);

  BBox t1{0.5, 0.5, 0.1, 0.1, 0.7, 1};
  BBox t2{0.3, 0.5, 0.1, 0.1, 0.7, 1};
  sel = select_target({t1, t2}, 1);
  REQUIRE(sel.has_value());
  CHECK(sel->cx == 0.3);  // lexicographically smaller center wins the tie

  CHECK_FALSE(select_target({a, b}, 2).has_value());

  // argmax invariance under positive rescaling of all confidences
  nn::RngStream rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<BBox> boxes;
    for (int i = 0; i < 12; ++i) boxes.push_back(random_box(rng));
    auto s1 = select_target(boxes, 1);
    std::vector<BBox> scaled = boxes;
    for (auto& bb : scaled) bb.conf *= 0.37;
    auto s2 = select_target(scaled, 1);
    CHECK(s1.has_value() == s2.has_value());
    if (s1) {
      CHECK(s1->cx == s2->cx);
      CHECK(s1->cy == s2->cy);
    }
  }
}

TEST_CASE("kf_track: stationary measurements converge to the measurement") {
  BBox z{0.5, 0.4, 0.2, 0.15, 1.0, 0};
  std::optional<TrackState> track;
  std::optional<BBox> filtered;
  for (int i = 0; i < 200; ++i) {
    auto r = kf_track(track, z, 0.1);
    track = r.track;
    filtered = r.box;
  }
  REQUIRE(filtered.has_value());
  CHECK(filtered->cx == doctest::Approx(z.cx).epsilon(1e-6));
  CHECK(filtered->w == doctest::Approx(z.w).epsilon(1e-6));
  for (int i = 4; i < 8; ++i) CHECK(std::abs(track->mean[static_cast<std::size_t>(i)]) < 1e-3);
}

TEST_CASE("kf_track: missing measurement is a pure prediction step") {
  BBox z{0.5, 0.5, 0.2, 0.2, 1.0, 0};
  auto r = kf_track(std::nullopt, z, 0.1);
  REQUIRE(r.track.has_value());
  auto t = *r.track;
  t.mean[4] = 0.3;  // inject velocity
  auto r2 = kf_track(t, std::nullopt, 0.1);
  REQUIRE(r2.track.has_value());
  CHECK(r2.track->mean[0] == doctest::Approx(t.mean[0] + 0.3 * 0.1).epsilon(1e-12));
  CHECK(r2.track->misses == 1);
}

TEST_CASE("kf_track: equals the dense matrix-formula oracle within 1e-9 over 1e4 cycles") {
  KfConfig cfg;
  nn::RngStream rng(13);
  BBox z0{0.5, 0.5, 0.2, 0.2, 1.0, 0};
  auto r = kf_track(std::nullopt, z0, 0.1);
  REQUIRE(r.track.has_value());
  TrackState t = *r.track;

  oracles::RefKf ref{};
  for (int i = 0; i < 8; ++i) ref.x[i] = t.mean[static_cast<std::size_t>(i)];
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) ref.p[i][j] = t.cov[static_cast<std::size_t>(i * 8 + j)];

  int spd_checks = 0;
  for (int cycle = 0; cycle < 10000; ++cycle) {
    const bool have_z = rng.uniform() < 0.8;
    std::optional<BBox> z;
    if (have_z)
      z = BBox{rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0), rng.uniform(0.05, 0.5),
               rng.uniform(0.05, 0.5), 1.0, 0};
    auto step = kf_track(t, z, 0.1, cfg);
    REQUIRE(step.track.has_value());
    CHECK_FALSE(step.floored_covariance);
    t = *step.track;

    oracles::ref_kf_predict(ref, 0.1, cfg.process_noise);
    if (have_z) {
      const double zz[4] = {z->cx, z->cy, z->w, z->h};
      oracles::ref_kf_update(ref, zz, cfg.measurement_noise);
    }
    for (int i = 0; i < 8; ++i)
      CHECK(std::abs(ref.x[i] - t.mean[static_cast<std::size_t>(i)]) < 1e-9);
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j)
        CHECK(std::abs(ref.p[i][j] - t.cov[static_cast<std::size_t>(i * 8 + j)]) < 1e-9);

    // SPD + symmetry spot checks (full Cholesky every 100 cycles)
    if (cycle % 100 == 0) {
      ++spd_checks;
      for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j)
          CHECK(std::abs(t.cov[static_cast<std::size_t>(i * 8 + j)] -
                         t.cov[static_cast<std::size_t>(j * 8 + i)]) < 1e-9);
      // leading principal minors positive (Sylvester)
      double m[8][8];
      for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) m[i][j] = t.cov[static_cast<std::size_t>(i * 8 + j)];
      for (int k = 0; k < 8; ++k) {
        // in-place Cholesky of the leading k+1 block copy
        double c[8][8];
        for (int i = 0; i <= k; ++i)
          for (int j = 0; j <= k; ++j) c[i][j] = m[i][j];
        bool ok = true;
        for (int i = 0; i <= k && ok; ++i) {
          for (int j = 0; j < i; ++j) c[i][i] -= c[i][j] * c[i][j];
          if (c[i][i] <= 0) ok = false;
          if (!ok) break;
          c[i][i] = std::sqrt(c[i][i]);
          for (int r2 = i + 1; r2 <= k; ++r2) {
            for (int j = 0; j < i; ++j) c[r2][i] -= c[r2][j] * c[i][j];
            c[r2][i] /= c[i][i];
          }
        }
        CHECK(ok);
      }
    }
  }
  CHECK(spd_checks == 100);
}

TEST_CASE("mot_track: overlap keeps the id, disjoint spawns a new one, misses retire") {
  MotTracker mot;
  BBox a{0.3, 0.3, 0.2, 0.2, 0.9, 0};
  mot.step({a}, 0.1);
  REQUIRE(mot.tracks().size() == 1);
  const int id = mot.tracks()[0].id;

  BBox a2 = a;
  a2.cx += 0.01;
  mot.step({a2}, 0.1);
  REQUIRE(mot.tracks().size() == 1);
  CHECK(mot.tracks()[0].id == id);

  BBox far{0.8, 0.8, 0.1, 0.1, 0.8, 0};
  mot.step({a2, far}, 0.1);
  REQUIRE(mot.tracks().size() == 2);
  CHECK(mot.tracks()[0].id == id);
  CHECK(mot.tracks()[1].id != id);

  // starve the far track beyond max_misses
  for (int i = 0; i < 5; ++i) mot.step({a2}, 0.1);
  CHECK(mot.tracks().size() == 1);
  CHECK(mot.tracks()[0].id == id);
}

TEST_CASE("mot_track: two crossing tracks keep their ids over 100 clean steps") {
  MotTracker mot;
  int idA = -1, idB = -1;
  int swaps = 0;
  for (int step = 0; step < 100; ++step) {
    const double t = step / 99.0;
    BBox a{0.1 + 0.8 * t, 0.35, 0.12, 0.12, 0.9, 0};   // left -> right, upper lane
    BBox b{0.9 - 0.8 * t, 0.65, 0.12, 0.12, 0.9, 0};   // right -> left, lower lane
    mot.step({a, b}, 0.1);
    REQUIRE(mot.tracks().size() == 2);
    // identify by vertical lane, which never crosses
    int cur_a = -1, cur_b = -1;
    for (const auto& tr : mot.tracks()) {
      if (std::abs(tr.mean[1] - 0.35) < 0.12) cur_a = tr.id;
      if (std::abs(tr.mean[1] - 0.65) < 0.12) cur_b = tr.id;
    }
    REQUIRE(cur_a >= 0);
    REQUIRE(cur_b >= 0);
    if (step == 0) {
      idA = cur_a;
      idB = cur_b;
    } else if (cur_a != idA || cur_b != idB) {
      ++swaps;
    }
  }
  CHECK(swaps == 0);
}

TEST_CASE("train_detector: zero steps leave parameters unchanged") {
  nn::RngStream rng(5);
  DetectorNet net(DetectorConfig{}, rng);
  std::vector<double> before;
  for (const auto& p : net.group().params())
    for (int64_t i = 0; i < p.value.size(); ++i) before.push_back(p.value[i]);

  world::WorldConfig wc;
  auto ds = generate_dataset(20, wc, 1);
  DetectorTrainConfig cfg;
  cfg.steps = 0;
  auto res = train_detector(net, ds, cfg);
  CHECK(res.steps_done == 0);
  std::size_t idx = 0;
  for (const auto& p : net.group().params())
    for (int64_t i = 0; i < p.value.size(); ++i) CHECK(p.value[i] == before[idx++]);
}

TEST_CASE("train_detector: held-out loss drops and IoU clears 0.6") {
  const auto& fx = fixtures::trained_detector();
  MESSAGE("holdout loss ", fx.result.initial_holdout_loss, " -> ", fx.result.final_holdout_loss,
          ", IoU ", fx.result.holdout_mean_iou);
  CHECK_FALSE(fx.result.aborted_non_finite);
  CHECK(fx.result.final_holdout_loss < fx.result.initial_holdout_loss);
  CHECK(fx.result.holdout_mean_iou >= 0.6);
}

TEST_CASE("trained detector: argmax-conf cell contains the true box center") {
  const auto& fx = fixtures::trained_detector();
  world::World env(fx.world);
  env.reset(world::Scenario::kE1, 909);
  auto frame = world::render(env.state(), env.scene(), fx.world);
  auto tbs = world::truth_boxes(env.state(), env.scene(), fx.world);
  REQUIRE(tbs[0].visible);

  auto grid = fx.net.detect(frame);
  double best = -1;
  double bx = 0, by = 0;
  int bs = 0;
  for (const auto& sc : grid.scales) {
    for (const auto& anchors : sc.anchors)
      for (int j = 0; j < static_cast<int>(anchors.size()); ++j) {
        const auto& p = anchors[static_cast<std::size_t>(j)];
        if (p.conf > best) {
          best = p.conf;
          bx = p.x;
          by = p.y;
          bs = sc.s;
        }
      }
  }
  // the winning cell must be the cell holding the true center
  const auto& gt = tbs[0].box;
  CHECK(static_cast<int>(bx * bs) == static_cast<int>(gt.cx * bs));
  CHECK(static_cast<int>(by * bs) == static_cast<int>(gt.cy * bs));
}

TEST_CASE("detect+render closed loop reproduces the oracle standoff within 2 m") {
  const auto& fx = fixtures::trained_detector();
  world::World env(fx.world);
  GuidancePipeline pipeline(fx.net, world::Scenario::kE1, fx.world.dt);
  auto out = env.reset(world::Scenario::kE1, 31337);
  pipeline.reset();
  int steps = 0;
  while (!out.done && steps < 400) {
    auto box = pipeline.process(out.frame);
    out = env.step(world::guidance(box, fx.world));
    ++steps;
  }
  REQUIRE(out.done);
  CHECK(out.done_cause == world::DoneCause::kStopped);
  CHECK(std::abs(env.target_distance() - 15.0) < 2.0);
}
