#pragma once

#include <array>

#include "rtia/attack/attack_loss.hpp"
#include "rtia/attack/nets.hpp"

namespace rtia::attack {

struct AttackAction {
  std::array<double, 4> a = {0.5, 0.5, 0.5, 0.5};  // in [0,1]^4

  nn::Tensor tensor() const { return nn::Tensor::from({4}, {a[0], a[1], a[2], a[3]}); }
};

// a = clamp(Actor(h) + N(0, sigma^2), 0, 1); sigma = 0 for evaluation.
AttackAction act(const AttackerNets& nets, const nn::Tensor& h, double explore_sigma,
                 nn::RngStream& rng);

// (x, y, w, h) of the fabricated box: centers pass through, sizes map
// linearly onto [w_min, w_max] x [h_min, h_max].
TargetBox action_to_box(const AttackAction& a, const AttackerConfig& cfg);

// w = Dec1(Enc1(x), a), values in [-1,1].
nn::Tensor generate(const AttackerNets& nets, const nn::Tensor& frame, const AttackAction& a);

// z=1: clamp(x + alpha*w, 0, 1); z=0: x unchanged (bitwise).
nn::Tensor apply(const nn::Tensor& frame, const nn::Tensor& w, double alpha, bool z);

// h' = GRU(h, Enc0(x_next), a)
nn::Tensor update_state(const AttackerNets& nets, const nn::Tensor& h, const nn::Tensor& x_next,
                        const AttackAction& a);

// h0 ~ N(0, I) at episode start.
nn::Tensor initial_hidden(const AttackerConfig& cfg, nn::RngStream& rng);

// l_t of the candidate attacked frame against the frozen proxy detector:
// attack_loss(detect(clamp(x + alpha*w)), box(a)). Computed every step,
// independent of whether the attack is applied.
double eval_attack_loss(const AttackerNets& nets, const victim::DetectorNet& detector,
                        const nn::Tensor& frame, const AttackAction& a, const nn::Tensor& w);

}  // namespace rtia::attack
