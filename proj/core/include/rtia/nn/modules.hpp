#pragma once

#include <cmath>
#include <deque>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "rtia/nn/tape.hpp"

namespace rtia::nn {

// A named set of parameters updated together on one time scale.
class ParamGroup {
 public:
  explicit ParamGroup(std::string name) : name_(std::move(name)) {}

  Param& add(const std::string& name, std::vector<int> shape) {
    params_.emplace_back(name_ + "/" + name, std::move(shape));
    return params_.back();
  }

  const std::string& name() const { return name_; }
  std::deque<Param>& params() { return params_; }
  const std::deque<Param>& params() const { return params_; }

  void zero_grad() {
    for (auto& p : params_) p.zero_grad();
  }

  bool grads_finite() const {
    for (const auto& p : params_)
      if (!p.grad.all_finite()) return false;
    return true;
  }

  int64_t num_values() const {
    int64_t n = 0;
    for (const auto& p : params_) n += p.value.size();
    return n;
  }

  double grad_norm() const {
    double acc = 0.0;
    for (const auto& p : params_)
      for (int64_t i = 0; i < p.grad.size(); ++i) acc += p.grad[i] * p.grad[i];
    return std::sqrt(acc);
  }

  void scale_grads(double s) {
    for (auto& p : params_)
      for (int64_t i = 0; i < p.grad.size(); ++i) p.grad[i] *= s;
  }

 private:
  std::string name_;
  std::deque<Param> params_;  // deque: Param& stays valid across add()
};

// theta <- theta + eps * S with S = direction_sign * stored gradients.
// Refuses the whole step (no parameter touched) if any entry of S is
// non-finite; returns whether the step was applied. eps is owned by the
// caller's schedule and left unchanged here.
inline bool sgd_step(ParamGroup& group, double eps, double direction_sign) {
  if (!group.grads_finite()) return false;
  for (auto& p : group.params())
    for (int64_t i = 0; i < p.value.size(); ++i)
      p.value[i] += eps * direction_sign * p.grad[i];
  return true;
}

// --- initializers -----------------------------------------------------------

inline void init_uniform(Param& p, double bound, RngStream& rng) {
  for (int64_t i = 0; i < p.value.size(); ++i) p.value[i] = rng.uniform(-bound, bound);
}

inline void init_dense(Param& w, RngStream& rng) {
  const int fan_in = w.value.shape()[1];
  init_uniform(w, std::sqrt(1.0 / fan_in), rng);
}

inline void init_conv(Param& w, RngStream& rng) {
  const int fan_in = w.value.shape()[1] * 9;
  init_uniform(w, std::sqrt(2.0 / fan_in), rng);
}

// --- layer modules ----------------------------------------------------------

struct Dense {
  Param* w = nullptr;
  Param* b = nullptr;

  Dense() = default;
  Dense(ParamGroup& g, const std::string& name, int in, int out, RngStream& rng,
        bool zero_init = false) {
    w = &g.add(name + ".w", {out, in});
    b = &g.add(name + ".b", {out});
    if (!zero_init) init_dense(*w, rng);
  }

  Value operator()(Tape& t, Value x, bool frozen = false) const {
    Value wv = frozen ? t.frozen(*w) : t.param(*w);
    Value bv = frozen ? t.frozen(*b) : t.param(*b);
    return linear(x, wv, bv);
  }
};

struct Conv3x3 {
  Param* w = nullptr;
  Param* b = nullptr;
  int stride = 1;

  Conv3x3() = default;
  Conv3x3(ParamGroup& g, const std::string& name, int cin, int cout, int stride_, RngStream& rng,
          bool zero_init = false)
      : stride(stride_) {
    w = &g.add(name + ".w", {cout, cin, 3, 3});
    b = &g.add(name + ".b", {cout});
    if (!zero_init) init_conv(*w, rng);
  }

  Value operator()(Tape& t, Value x, bool frozen = false) const {
    Value wv = frozen ? t.frozen(*w) : t.param(*w);
    Value bv = frozen ? t.frozen(*b) : t.param(*b);
    return conv3x3(x, wv, bv, stride);
  }
};

// Gated recurrent unit, reset/update-gate formulation:
//   r = sigmoid(Wr [x;h] + br), z = sigmoid(Wz [x;h] + bz)
//   c = tanh(Wc [x; r*h] + bc)
//   h' = z*h + (1-z)*c
struct GruCell {
  Dense wr, wz, wc;
  int hidden = 0;

  GruCell() = default;
  GruCell(ParamGroup& g, const std::string& name, int input, int hidden_, RngStream& rng)
      : wr(g, name + ".r", input + hidden_, hidden_, rng),
        wz(g, name + ".z", input + hidden_, hidden_, rng),
        wc(g, name + ".c", input + hidden_, hidden_, rng),
        hidden(hidden_) {}

  Value operator()(Tape& t, Value x, Value h, bool frozen = false) const {
    Value xh = concat(x, h);
    Value r = sigmoid(wr(t, xh, frozen));
    Value z = sigmoid(wz(t, xh, frozen));
    Value c = tanh_(wc(t, concat(x, mul(r, h)), frozen));
    // z*h + (1-z)*c
    return add(mul(z, h), mul(affine(z, -1.0, 1.0), c));
  }
};

}  // namespace rtia::nn
