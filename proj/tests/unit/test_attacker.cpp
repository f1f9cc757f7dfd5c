#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "rtia/attack/attacker.hpp"
#include "rtia/attack/buffers.hpp"
#include "rtia/attack/decision.hpp"

using namespace rtia;
using namespace rtia::attack;

namespace {

AttackerNets make_nets(uint64_t seed = 1) {
  nn::RngStream rng(seed);
  return AttackerNets(AttackerConfig{}, rng);
}

nn::Tensor random_frame(nn::RngStream& rng, int n = 32) {
  nn::Tensor f({3, n, n});
  for (int64_t i = 0; i < f.size(); ++i) f[i] = rng.uniform();
  return f;
}

nn::Tensor random_hidden(nn::RngStream& rng, int d = 64) {
  nn::Tensor h({d});
  for (int64_t i = 0; i < h.size(); ++i) h[i] = rng.normal();
  return h;
}

victim::DetectionGrid random_grid(nn::RngStream& rng, const victim::DetectorConfig& cfg) {
  victim::DetectionGrid grid;
  for (int si = 0; si < cfg.anchors.num_scales(); ++si) {
    victim::DetectionGrid::Scale sc;
    sc.s = cfg.anchors.grid_sizes[static_cast<std::size_t>(si)];
    sc.anchors.resize(static_cast<std::size_t>(cfg.anchors.anchors_per_scale));
    for (auto& anchors : sc.anchors) {
      anchors.resize(static_cast<std::size_t>(sc.s * sc.s));
      for (int j = 0; j < sc.s * sc.s; ++j) {
        auto& p = anchors[static_cast<std::size_t>(j)];
        const int row = j / sc.s, col = j % sc.s;
        p.x = (col + rng.uniform()) / sc.s;
        p.y = (row + rng.uniform()) / sc.s;
        p.w = rng.uniform(0.01, 0.9);
        p.h = rng.uniform(0.01, 0.9);
        p.conf = rng.uniform();
        for (auto& c : p.cls) c = rng.uniform();
      }
    }
    grid.scales.push_back(std::move(sc));
  }
  return grid;
}

}  // namespace

TEST_CASE("act: deterministic without noise, 0.5^4 at zero-init head") {
  auto nets = make_nets();
  nn::RngStream rng(3);
  nn::Tensor h = random_hidden(rng);
  nn::RngStream r1(0), r2(0);
  auto a1 = act(nets, h, 0.0, r1);
  auto a2 = act(nets, h, 0.0, r2);
  for (int i = 0; i < 4; ++i) {
    CHECK(a1.a[static_cast<std::size_t>(i)] == a2.a[static_cast<std::size_t>(i)]);
    CHECK(a1.a[static_cast<std::size_t>(i)] == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("act: exploration noise std within 15% of sigma before clamping") {
  auto nets = make_nets();
  nn::RngStream rng(5);
  nn::Tensor h = random_hidden(rng);
  // zero-init actor head outputs exactly 0.5, far from the clamp boundary
  nn::RngStream noise(77);
  const double sigma = 0.1;
  const int n = 10000;
  double sum = 0, sum_sq = 0;
  for (int i = 0; i < n; ++i) {
    auto a = act(nets, h, sigma, noise);
    const double d = a.a[0] - 0.5;
    sum += d;
    sum_sq += d * d;
  }
  const double mean = sum / n;
  const double std = std::sqrt((sum_sq - n * mean * mean) / (n - 1));
  CHECK(std == doctest::Approx(sigma).epsilon(0.15));
}

TEST_CASE("act: output always in [0,1]^4") {
  auto nets = make_nets();
  nn::RngStream rng(6), noise(7);
  for (int i = 0; i < 200; ++i) {
    auto a = act(nets, random_hidden(rng), 0.8, noise);
    for (double v : a.a) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("action_to_box: endpoints and midpoint") {
  AttackerConfig cfg;
  auto b0 = action_to_box(AttackAction{{0, 0, 0, 0}}, cfg);
  CHECK(b0.x == 0.0);
  CHECK(b0.y == 0.0);
  CHECK(b0.w == doctest::Approx(0.05));
  CHECK(b0.h == doctest::Approx(0.05));

  auto b1 = action_to_box(AttackAction{{1, 1, 1, 1}}, cfg);
  CHECK(b1.x == 1.0);
  CHECK(b1.w == doctest::Approx(0.6));
  CHECK(b1.h == doctest::Approx(0.6));

  auto bm = action_to_box(AttackAction{{0.5, 0.5, 0.5, 0.5}}, cfg);
  CHECK(bm.x == 0.5);
  CHECK(bm.w == doctest::Approx(0.5 * (0.05 + 0.6)));
  CHECK(bm.h == doctest::Approx(0.5 * (0.05 + 0.6)));
}

TEST_CASE("generate: zero-init output head emits w = 0; deterministic") {
  auto nets = make_nets();
  nn::RngStream rng(9);
  nn::Tensor x = random_frame(rng);
  AttackAction a{{0.3, 0.7, 0.2, 0.9}};
  auto w1 = generate(nets, x, a);
  for (int64_t i = 0; i < w1.size(); ++i) CHECK(w1[i] == 0.0);
  auto w2 = generate(nets, x, a);
  for (int64_t i = 0; i < w1.size(); ++i) CHECK(w1[i] == w2[i]);
  CHECK(w1.shape() == x.shape());
}

TEST_CASE("apply: zero perturbation, saturation, no-attack branch, totality") {
  nn::RngStream rng(11);
  nn::Tensor x = random_frame(rng);
  nn::Tensor w0({3, 32, 32});
  auto same = apply(x, w0, 0.05, true);
  for (int64_t i = 0; i < x.size(); ++i) CHECK(same[i] == x[i]);

  nn::Tensor ones = nn::Tensor::full({3, 32, 32}, 1.0);
  nn::Tensor wp = nn::Tensor::full({3, 32, 32}, 0.7);
  auto sat = apply(ones, wp, 0.5, true);
  for (int64_t i = 0; i < sat.size(); ++i) CHECK(sat[i] == 1.0);

  nn::Tensor wn({3, 32, 32});
  for (int64_t i = 0; i < wn.size(); ++i) wn[i] = rng.uniform(-40.0, 40.0);
  auto off = apply(x, wn, 0.8, false);
  for (int64_t i = 0; i < x.size(); ++i) CHECK(off[i] == x[i]);

  auto clamped = apply(x, wn, 0.8, true);
  for (int64_t i = 0; i < clamped.size(); ++i) {
    CHECK(clamped[i] >= 0.0);
    CHECK(clamped[i] <= 1.0);
  }
}

TEST_CASE("update_state: deterministic; components bounded over 500 steps") {
  auto nets = make_nets();
  nn::RngStream rng(13);
  nn::Tensor x = random_frame(rng);
  nn::Tensor h = random_hidden(rng);
  AttackAction a{{0.1, 0.2, 0.3, 0.4}};
  auto h1 = update_state(nets, h, x, a);
  auto h2 = update_state(nets, h, x, a);
  for (int64_t i = 0; i < h1.size(); ++i) CHECK(h1[i] == h2[i]);

  nn::Tensor cur = h;
  for (int i = 0; i < 500; ++i) cur = update_state(nets, cur, x, a);
  for (int64_t i = 0; i < cur.size(); ++i) {
    CHECK(cur[i] > -1.0);
    CHECK(cur[i] < 1.0);
  }
}

TEST_CASE("attack_loss: zero at a perfectly fitted grid") {
  victim::DetectorConfig cfg;
  nn::RngStream rng(15);
  auto grid = random_grid(rng, cfg);
  TargetBox box{0.33, 0.61, 0.2, 0.25, 1};
  auto assign = assign_anchor(box, cfg.anchors);
  // zero all confidences, then plant the exact target at the assigned slot
  for (auto& sc : grid.scales)
    for (auto& anchors : sc.anchors)
      for (auto& p : anchors) p.conf = 0.0;
  auto& slot = grid.scales[static_cast<std::size_t>(assign.scale)]
                   .anchors[static_cast<std::size_t>(assign.anchor)]
                   [static_cast<std::size_t>(assign.cell)];
  slot.x = box.x;
  slot.y = box.y;
  slot.w = box.w;
  slot.h = box.h;
  slot.conf = 1.0;
  slot.cls = {0.0, 1.0, 0.0};
  CHECK(attack_loss(grid, box, assign, cfg) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("attack_loss: perturbing one no-obj confidence adds lambda_noobj*delta*(2C+delta)") {
  victim::DetectorConfig cfg;
  nn::RngStream rng(16);
  auto grid = random_grid(rng, cfg);
  TargetBox box{0.5, 0.5, 0.3, 0.3, 0};
  auto assign = assign_anchor(box, cfg.anchors);
  const double before = attack_loss(grid, box, assign, cfg);
  // pick a no-obj slot (scale differs from the assigned one)
  const int other_scale = assign.scale == 0 ? 1 : 0;
  auto& slot = grid.scales[static_cast<std::size_t>(other_scale)].anchors[0][5];
  const double c = slot.conf;
  const double delta = 0.17;
  slot.conf = c + delta;
  const double after = attack_loss(grid, box, assign, cfg);
  CHECK(after - before == doctest::Approx(cfg.lambda_noobj * delta * (2 * c + delta)).epsilon(1e-9));
}

TEST_CASE("attack_loss: equals the term-by-term oracle within 1e-10 on random grids") {
  victim::DetectorConfig cfg;
  nn::RngStream rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    auto grid = random_grid(rng, cfg);
    TargetBox box{rng.uniform(), rng.uniform(), rng.uniform(0.05, 0.6), rng.uniform(0.05, 0.6),
                  static_cast<int>(rng.uniform_index(3))};
    auto assign = assign_anchor(box, cfg.anchors);
    const double got = attack_loss(grid, box, assign, cfg);
    const double want = oracles::reference_attack_loss(grid, box, assign, cfg);
    CHECK(got == doctest::Approx(want).epsilon(1e-10));
  }
}

TEST_CASE("attack_loss gradient w.r.t. the input frame matches finite differences") {
  const auto& fx = fixtures::trained_detector();
  nn::RngStream rng(18);
  for (int trial = 0; trial < 5; ++trial) {
    nn::Tensor frame = random_frame(rng);
    TargetBox box{rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8), 0.3, 0.3, 0};
    auto assign = assign_anchor(box, fx.net.config().anchors);

    auto eval = [&](const nn::Tensor& f) {
      nn::Tape t;
      auto scales = fx.net.forward(t, t.input(f), true);
      return attack_loss_graph(scales, box, assign, fx.net.config()).val().item();
    };

    nn::Tape t;
    nn::Value x = t.variable(frame);
    auto scales = fx.net.forward(t, x, true);
    nn::Value loss = attack_loss_graph(scales, box, assign, fx.net.config());
    t.backward(loss);
    nn::Tensor g = t.grad(x);

    for (int probe = 0; probe < 20; ++probe) {
      const int64_t idx = static_cast<int64_t>(rng.uniform_index(static_cast<uint64_t>(frame.size())));
      const double h = 1e-5;
      nn::Tensor fp = frame, fm = frame;
      fp[idx] += h;
      fm[idx] -= h;
      const double fd = (eval(fp) - eval(fm)) / (2 * h);
      const double rel = std::abs(fd - g[idx]) / std::max({std::abs(fd), std::abs(g[idx]), 1e-8});
      CHECK(rel < 1e-3);
    }
  }
}

TEST_CASE("assign_anchor: exact template, corner clamp, brute-force agreement") {
  victim::AnchorLayout anchors;
  TargetBox tpl{0.5, 0.5, 0.35, 0.35, 0};
  auto a = assign_anchor(tpl, anchors);
  CHECK(a.scale == 0);
  CHECK(a.anchor == 1);

  TargetBox corner{0.999, 0.999, 0.35, 0.35, 0};
  a = assign_anchor(corner, anchors);
  CHECK(a.cell == 8 * 8 - 1);

  nn::RngStream rng(19);
  for (int trial = 0; trial < 1000; ++trial) {
    TargetBox box{rng.uniform(), rng.uniform(), rng.uniform(0.01, 0.95), rng.uniform(0.01, 0.95),
                  0};
    auto got = assign_anchor(box, anchors);
    auto want = oracles::brute_force_assign(box, anchors);
    CHECK(got.scale == want.scale);
    CHECK(got.cell == want.cell);
    CHECK(got.anchor == want.anchor);
  }
}

TEST_CASE("predict_losses: zero dropout degenerates to a deterministic value") {
  auto nets = make_nets();
  nn::RngStream rng(21);
  nn::Tensor h = random_hidden(rng);
  AttackAction a{{0.2, 0.4, 0.6, 0.8}};
  auto st = predict_losses(nets, h, a, 8, 0.0, 123);
  CHECK(st.var0 == 0.0);
  CHECK(st.var1 == 0.0);
  auto st2 = predict_losses(nets, h, a, 8, 0.0, 456);
  CHECK(st.mean0 == st2.mean0);
  CHECK(st.mean1 == st2.mean1);
}

TEST_CASE("predict_losses: reproducible from the seed; rejects n < 2") {
  auto nets = make_nets();
  nn::RngStream rng(22);
  nn::Tensor h = random_hidden(rng);
  AttackAction a;
  auto s1 = predict_losses(nets, h, a, 16, 0.3, 99);
  auto s2 = predict_losses(nets, h, a, 16, 0.3, 99);
  CHECK(s1.mean0 == s2.mean0);
  CHECK(s1.var0 == s2.var0);
  CHECK(s1.mean1 == s2.mean1);
  CHECK(s1.var1 == s2.var1);
  CHECK_THROWS_AS(predict_losses(nets, h, a, 1, 0.3, 99), std::invalid_argument);
}

TEST_CASE("dropout expectation: linear head over dropout matches analytic value") {
  // E[w . dropout(h) + b] = w . h + b for inverted dropout
  nn::RngStream rng(23);
  nn::ParamGroup g("probe");
  nn::Dense head(g, "fc", 16, 1, rng);
  nn::Tensor h = random_hidden(rng, 16);

  double analytic = head.b->value[0];
  for (int i = 0; i < 16; ++i) analytic += head.w->value[i] * h[i];

  const int n = 10000;
  nn::RngStream mask(31);
  double sum = 0, sum_sq = 0;
  for (int i = 0; i < n; ++i) {
    nn::Tape t;
    nn::Value out = head(t, nn::dropout(t.input(h), 0.25, mask));
    const double v = out.val().item();
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / n;
  const double var = (sum_sq - n * mean * mean) / (n - 1);
  const double stderr_ = std::sqrt(var / n);
  CHECK(std::abs(mean - analytic) < 3 * stderr_);
}

TEST_CASE("decide_cs: degenerate variances, symmetric stats, Gaussian-difference rate") {
  nn::RngStream rng(25);

  LossStats sure{1.0, 0.0, 0.0, 0.0};
  for (int i = 0; i < 100; ++i) {
    auto d = decide_cs(sure, rng);
    CHECK(d.attack);
    CHECK(d.attack == (d.l1 <= d.l0));
  }

  LossStats sym{0.5, 0.04, 0.5, 0.04};
  int attacks = 0;
  for (int i = 0; i < 10000; ++i) attacks += decide_cs(sym, rng).attack ? 1 : 0;
  CHECK(std::abs(attacks / 10000.0 - 0.5) < 0.02);

  LossStats spread{1.0, 0.01, 0.0, 0.01};
  attacks = 0;
  for (int i = 0; i < 10000; ++i) attacks += decide_cs(spread, rng).attack ? 1 : 0;
  const double expect = oracles::phi_cdf(1.0 / std::sqrt(0.02));
  CHECK(std::abs(attacks / 10000.0 - expect) < 0.02);
}

TEST_CASE("decide_nts: degenerate argmin, symmetry, equality with decide_cs at fixed stats") {
  nn::RngStream rng(26);
  LossStats sure{0.0, 0.0, 1.0, 0.0};
  for (int i = 0; i < 100; ++i) CHECK_FALSE(decide_nts(sure, rng).attack);

  LossStats sym{0.2, 0.09, 0.2, 0.09};
  int attacks = 0;
  for (int i = 0; i < 10000; ++i) attacks += decide_nts(sym, rng).attack ? 1 : 0;
  CHECK(std::abs(attacks / 10000.0 - 0.5) < 0.02);

  LossStats st{0.7, 0.02, 0.5, 0.05};
  nn::RngStream ra(777), rb(777);
  for (int i = 0; i < 1000; ++i) {
    auto a = decide_cs(st, ra);
    auto b = decide_nts(st, rb);
    CHECK(a.l0 == b.l0);
    CHECK(a.l1 == b.l1);
    CHECK(a.attack == b.attack);
  }
}

TEST_CASE("buffers: capacity-1 roundtrip and FIFO eviction") {
  RingBuffer<int> rb(3);
  rb.push(1);
  nn::RngStream rng(27);
  CHECK(rb.sample(rng) == 1);
  rb.push(2);
  rb.push(3);
  rb.push(4);  // evicts 1
  CHECK(rb.size() == 3);
  bool saw_one = false;
  for (int i = 0; i < 200; ++i) saw_one = saw_one || rb.sample(rng) == 1;
  CHECK_FALSE(saw_one);

  RingBuffer<int> empty(2);
  CHECK_THROWS_AS(empty.sample(rng), std::logic_error);
}

TEST_CASE("buffers: sampling frequencies uniform within 3-sigma multinomial bounds") {
  RingBuffer<int> rb(10);
  for (int i = 0; i < 10; ++i) rb.push(i);
  nn::RngStream rng(28);
  std::vector<int> counts(10, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(rb.sample(rng))];
  const double p = 0.1;
  const double sigma = std::sqrt(n * p * (1 - p));
  for (int c : counts) CHECK(std::abs(c - n * p) < 3.5 * sigma);
}

TEST_CASE("trajectory buffer: windows, episode FIFO, and pair sampling") {
  TrajectoryBuffer buf(2, 4);  // tiny frames for speed
  nn::RngStream rng(29);
  auto frame = [&](double v) { return nn::Tensor::full({3, 4, 4}, v); };

  for (int i = 0; i < 10; ++i) buf.push(frame(i / 10.0), AttackAction{{i / 10.0, 0, 0, 0}});
  CHECK(buf.num_pairs() == 10);
  CHECK(buf.num_windows(4) == 6);
  buf.end_episode();

  auto win = buf.sample_window(4, rng);
  CHECK(win.frames.size() == 5);
  CHECK(win.actions.size() == 4);
  // frames quantized to u8 on push; actions exact
  for (std::size_t i = 1; i < win.actions.size(); ++i)
    CHECK(win.actions[i].a[0] == doctest::Approx(win.actions[i - 1].a[0] + 0.1));

  // capacity 2 episodes: pushing two more episodes evicts the first
  for (int e = 0; e < 2; ++e) {
    for (int i = 0; i < 6; ++i) buf.push(frame(0.5), AttackAction{{0.9, 0, 0, 0}});
    buf.end_episode();
  }
  CHECK(buf.num_pairs() == 12);
  bool saw_old = false;
  for (int i = 0; i < 400; ++i)
    if (buf.sample_pair(rng).action.a[0] != 0.9) saw_old = true;
  CHECK_FALSE(saw_old);

  TrajectoryBuffer fresh(2, 4);
  CHECK_THROWS_AS(fresh.sample_pair(rng), std::logic_error);
  CHECK_THROWS_AS(fresh.sample_window(4, rng), std::logic_error);
}

TEST_CASE("decision sample invariant holds for every draw") {
  nn::RngStream rng(30);
  for (int i = 0; i < 2000; ++i) {
    LossStats st{rng.uniform(-1, 1), rng.uniform(0, 0.3), rng.uniform(-1, 1), rng.uniform(0, 0.3)};
    auto d = decide_cs(st, rng);
    CHECK(d.attack == (d.l1 <= d.l0));
  }
}
