#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "rtia/nn/checkpoint.hpp"
#include "rtia/nn/modules.hpp"
#include "rtia/nn/tape.hpp"

using namespace rtia::nn;

namespace {

Tensor random_tensor(std::vector<int> shape, RngStream& rng, double scale = 1.0) {
  Tensor t(std::move(shape));
  for (int64_t i = 0; i < t.size(); ++i) t[i] = rng.normal(0.0, scale);
  return t;
}

}  // namespace

TEST_CASE("forward: identity graph returns the input") {
  Tape t;
  Tensor x = Tensor::from({3}, {1.0, -2.0, 0.5});
  Value v = t.input(x);
  for (int i = 0; i < 3; ++i) CHECK(v.val()[i] == x[i]);
}

TEST_CASE("forward: zero dense layer maps anything to zero") {
  RngStream rng(3);
  ParamGroup g("net");
  Dense d(g, "fc", 5, 4, rng, /*zero_init=*/true);
  Tape t;
  Value y = d(t, t.input(random_tensor({5}, rng)));
  for (int i = 0; i < 4; ++i) CHECK(y.val()[i] == 0.0);
}

TEST_CASE("forward: 2-layer net equals hand-rolled matrix arithmetic") {
  RngStream rng(7);
  ParamGroup g("net");
  Dense d1(g, "fc1", 6, 5, rng);
  Dense d2(g, "fc2", 5, 3, rng);
  Tensor x = random_tensor({6}, rng);

  Tape t;
  Value y = d2(t, tanh_(d1(t, t.input(x))));

  // independent oracle: explicit matrix-vector products
  std::vector<double> h1(5, 0.0);
  for (int o = 0; o < 5; ++o) {
    double acc = d1.b->value[o];
    for (int i = 0; i < 6; ++i) acc += d1.w->value[o * 6 + i] * x[i];
    h1[static_cast<std::size_t>(o)] = std::tanh(acc);
  }
  for (int o = 0; o < 3; ++o) {
    double acc = d2.b->value[o];
    for (int i = 0; i < 5; ++i) acc += d2.w->value[o * 5 + i] * h1[static_cast<std::size_t>(i)];
    CHECK(std::abs(y.val()[o] - acc) < 1e-12);
  }
}

TEST_CASE("forward: shape mismatch is rejected naming the op") {
  Tape t;
  Value a = t.input(Tensor({3}));
  Value b = t.input(Tensor({4}));
  CHECK_THROWS_WITH_AS(add(a, b), doctest::Contains("add"), std::invalid_argument);
}

TEST_CASE("backward: loss = sum(x) gives all-ones gradient") {
  ParamGroup g("net");
  Param& p = g.add("x", {4});
  p.value.fill(2.5);
  Tape t;
  Value loss = sum(t.param(p));
  t.backward(loss);
  for (int i = 0; i < 4; ++i) CHECK(p.grad[i] == 1.0);
}

TEST_CASE("backward: constant loss gives zero gradients") {
  ParamGroup g("net");
  Param& p = g.add("x", {4});
  p.value.fill(1.0);
  Tape t;
  Value loss = affine(sum(t.param(p)), 0.0, 5.0);
  t.backward(loss);
  CHECK(loss.val().item() == 5.0);
  for (int i = 0; i < 4; ++i) CHECK(p.grad[i] == 0.0);
}

TEST_CASE("backward: non-scalar loss is rejected") {
  ParamGroup g("net");
  Param& p = g.add("x", {4});
  Tape t;
  Value v = t.param(p);
  CHECK_THROWS_AS(t.backward(v), std::invalid_argument);
}

TEST_CASE("backward: ||Wx||^2 matches central finite differences at h=1e-4") {
  RngStream rng(11);
  RngStream pick(12);
  ParamGroup g("net");
  Dense d(g, "fc", 4, 3, rng);
  Tensor x = random_tensor({4}, rng);
  auto build = [&](Tape& t) { return sum_squares(d(t, t.input(x))); };
  const double err = oracles::fd_max_rel_err(g, build, 1e-4, pick, 200);
  CHECK(err < 1e-4);
}

TEST_CASE("backward: untouched parameters keep zero gradient") {
  RngStream rng(5);
  ParamGroup g("net");
  Dense used(g, "used", 3, 2, rng);
  Dense unused(g, "unused", 3, 2, rng);
  g.zero_grad();
  Tape t;
  Value loss = sum(used(t, t.input(random_tensor({3}, rng))));
  t.backward(loss);
  for (int64_t i = 0; i < unused.w->grad.size(); ++i) CHECK(unused.w->grad[i] == 0.0);
  bool any = false;
  for (int64_t i = 0; i < used.w->grad.size(); ++i) any = any || used.w->grad[i] != 0.0;
  CHECK(any);
}

TEST_CASE("every layer type matches finite differences over 10 seeds") {
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    RngStream rng(seed);
    RngStream pick(seed + 100);

    {  // dense + activations chain
      ParamGroup g("net");
      Dense d1(g, "fc1", 5, 6, rng);
      Dense d2(g, "fc2", 6, 1, rng);
      Tensor x = random_tensor({5}, rng);
      auto build = [&](Tape& t) {
        Value h = tanh_(d1(t, t.input(x)));
        h = sigmoid(h);
        h = softplus(h);
        return sum(d2(t, h));
      };
      CHECK(oracles::fd_max_rel_err(g, build, 1e-5, pick, 80) < 1e-4);
    }
    {  // conv stride 1 and 2, relu, upsample, slice, broadcast, concat
      ParamGroup g("net");
      Conv3x3 c1(g, "c1", 2, 3, 2, rng);
      Conv3x3 c2(g, "c2", 4, 2, 1, rng);
      Param& vec = g.add("vec", {1});
      vec.value[0] = 0.3;
      Tensor x = random_tensor({2, 8, 8}, rng, 0.5);
      auto build = [&](Tape& t) {
        Value f = relu(c1(t, t.input(x)));              // [3,4,4]
        Value b = broadcast_hw(t.param(vec), 4, 4);     // [1,4,4]
        f = concat_channels(f, b);                      // [4,4,4]
        f = c2(t, f);                                   // [2,4,4]
        f = upsample2x(f);                              // [2,8,8]
        f = slice_channels(f, 1, 1);                    // [1,8,8]
        return mean(square(f));
      };
      CHECK(oracles::fd_max_rel_err(g, build, 1e-5, pick, 80) < 1e-4);
    }
    {  // gru step
      ParamGroup g("net");
      GruCell gru(g, "gru", 3, 4, rng);
      Tensor x = random_tensor({3}, rng);
      Tensor h0 = random_tensor({4}, rng, 0.5);
      auto build = [&](Tape& t) {
        Value h = gru(t, t.input(x), t.input(h0));
        h = gru(t, t.input(x), h);
        return sum_squares(h);
      };
      CHECK(oracles::fd_max_rel_err(g, build, 1e-5, pick, 80) < 1e-4);
    }
    {  // losses: mse, bce-with-logits, sq_err_sum, gather, sqrt, clamp interior
      ParamGroup g("net");
      Dense d(g, "fc", 4, 6, rng);
      Tensor x = random_tensor({4}, rng);
      Tensor target({6});
      for (int i = 0; i < 6; ++i) target[i] = 0.1 + 0.13 * i;
      auto build = [&](Tape& t) {
        Value y = d(t, t.input(x));
        Value a = mse(sigmoid(y), target);
        Value b = bce_with_logits(y, target);
        Value c = sq_err_sum(sqrt_(softplus(y)), target);
        Value dd = square(gather(y, 2));
        Value e = mean(clamp01(affine(sigmoid(y), 0.8, 0.1)));
        return add(add(add(a, b), add(c, dd)), e);
      };
      CHECK(oracles::fd_max_rel_err(g, build, 1e-5, pick, 80) < 1e-4);
    }
    {  // dropout with a fixed mask stream
      ParamGroup g("net");
      Dense d(g, "fc", 4, 8, rng);
      Tensor x = random_tensor({4}, rng);
      const uint64_t mask_seed = seed * 77 + 5;
      auto build = [&](Tape& t) {
        RngStream mask(mask_seed);
        Value y = dropout(relu(d(t, t.input(x))), 0.4, mask);
        return sum_squares(y);
      };
      CHECK(oracles::fd_max_rel_err(g, build, 1e-5, pick, 80) < 1e-4);
    }
  }
}

TEST_CASE("sgd_step: scalar arithmetic, zero step, additivity, refusal") {
  ParamGroup g("net");
  Param& p = g.add("x", {1});

  p.value[0] = 1.0;
  p.grad[0] = 1.0;  // S = -1 via direction sign
  CHECK(sgd_step(g, 0.1, -1.0));
  CHECK(p.value[0] == doctest::Approx(0.9).epsilon(1e-12));

  const double before = p.value[0];
  CHECK(sgd_step(g, 0.0, -1.0));
  CHECK(p.value[0] == before);

  // two sequential steps equal one step with summed updates for fixed S
  ParamGroup g2("net2");
  Param& q = g2.add("x", {1});
  q.value[0] = 2.0;
  q.grad[0] = 0.5;
  CHECK(sgd_step(g2, 0.1, -1.0));
  CHECK(sgd_step(g2, 0.2, -1.0));
  ParamGroup g3("net3");
  Param& r = g3.add("x", {1});
  r.value[0] = 2.0;
  r.grad[0] = 0.5;
  CHECK(sgd_step(g3, 0.3, -1.0));
  CHECK(q.value[0] == doctest::Approx(r.value[0]).epsilon(1e-15));

  // non-finite gradient refuses the whole step
  ParamGroup g4("net4");
  Param& s = g4.add("x", {2});
  s.value[0] = 1.0;
  s.value[1] = 1.0;
  s.grad[0] = 0.1;
  s.grad[1] = std::nan("");
  CHECK_FALSE(sgd_step(g4, 0.1, -1.0));
  CHECK(s.value[0] == 1.0);
  CHECK(s.value[1] == 1.0);
}

TEST_CASE("dropout: no-drop case, determinism, empirical rate, rejection") {
  RngStream rng(21);
  Tensor x = random_tensor({1000}, rng);

  {
    Tape t;
    RngStream mask(5);
    Value y = dropout(t.input(x), 0.0, mask);
    for (int64_t i = 0; i < x.size(); ++i) CHECK(y.val()[i] == x[i]);
  }
  {
    Tape t1, t2;
    RngStream m1(9), m2(9);
    Value y1 = dropout(t1.input(x), 0.5, m1);
    Value y2 = dropout(t2.input(x), 0.5, m2);
    for (int64_t i = 0; i < x.size(); ++i) CHECK(y1.val()[i] == y2.val()[i]);
  }
  {
    Tensor big = Tensor::full({100000}, 1.0);
    Tape t;
    RngStream mask(123);
    const double rate = 0.3;
    Value y = dropout(t.input(big), rate, mask);
    int64_t dropped = 0;
    for (int64_t i = 0; i < big.size(); ++i)
      if (y.val()[i] == 0.0) ++dropped;
    const double frac = static_cast<double>(dropped) / static_cast<double>(big.size());
    CHECK(std::abs(frac - rate) < 0.01);
  }
  {
    Tape t;
    RngStream mask(1);
    CHECK_THROWS_AS(dropout(t.input(x), 1.0, mask), std::invalid_argument);
  }
}

TEST_CASE("forward/backward deterministic in (inputs, parameters, seed)") {
  auto run = [](uint64_t seed) {
    RngStream rng(seed);
    ParamGroup g("net");
    Dense d(g, "fc", 4, 4, rng);
    Tensor x = random_tensor({4}, rng);
    g.zero_grad();
    Tape t;
    RngStream mask(seed + 1);
    Value loss = sum_squares(dropout(d(t, t.input(x)), 0.2, mask));
    t.backward(loss);
    return std::make_pair(loss.val().item(), d.w->grad[0]);
  };
  auto [l1, g1] = run(42);
  auto [l2, g2] = run(42);
  CHECK(l1 == l2);
  CHECK(g1 == g2);
}

TEST_CASE("checkpoint: byte-identical writes and faithful restore") {
  RngStream rng(31);
  ParamGroup g("net");
  Dense d(g, "fc", 3, 2, rng);
  (void)d;

  const std::string dir = "/tmp/rtia_test_ckpt";
  std::filesystem::create_directories(dir);
  const std::string p1 = dir + "/a.bin", p2 = dir + "/b.bin";
  save_checkpoint(p1, {&g});
  save_checkpoint(p2, {&g});
  std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
  std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(s1 == s2);
  CHECK(!s1.empty());

  ParamGroup g2("net");
  Dense d2(g2, "fc", 3, 2, rng);  // different random init
  (void)d2;
  restore_groups(load_checkpoint(p1), {&g2});
  auto it1 = g.params().begin();
  auto it2 = g2.params().begin();
  for (; it1 != g.params().end(); ++it1, ++it2)
    for (int64_t i = 0; i < it1->value.size(); ++i) CHECK(it1->value[i] == it2->value[i]);

  // shape mismatch and missing tensors are rejected
  ParamGroup g3("net");
  g3.add("fc.w", {2, 2});
  CHECK_THROWS_AS(restore_groups(load_checkpoint(p1), {&g3}), std::runtime_error);
}

TEST_CASE("gru keeps components bounded over 500 constant-input steps") {
  RngStream rng(77);
  ParamGroup g("net");
  GruCell gru(g, "gru", 3, 8, rng);
  Tensor x = random_tensor({3}, rng);
  Tensor h = random_tensor({8}, rng, 2.0);  // start outside (-1,1)
  for (int step = 0; step < 500; ++step) {
    Tape t;
    h = gru(t, t.input(x), t.input(h)).val();
  }
  for (int i = 0; i < 8; ++i) {
    CHECK(h[i] > -1.0);
    CHECK(h[i] < 1.0);
  }
}
