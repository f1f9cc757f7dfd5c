#include "rtia/attack/attacker.hpp"

#include <algorithm>
#include <cmath>

namespace rtia::attack {

using namespace rtia::nn;

AttackAction act(const AttackerNets& nets, const Tensor& h, double explore_sigma,
                 RngStream& rng) {
  Tape t;
  Value a = nets.actor_graph(t, t.input(h), /*frozen=*/true);
  AttackAction out;
  for (int i = 0; i < 4; ++i) {
    double v = a.val()[i];
    if (explore_sigma > 0.0) v += rng.normal(0.0, explore_sigma);
    out.a[static_cast<std::size_t>(i)] = std::clamp(v, 0.0, 1.0);
  }
  return out;
}

TargetBox action_to_box(const AttackAction& a, const AttackerConfig& cfg) {
  TargetBox box;
  box.x = a.a[0];
  box.y = a.a[1];
  box.w = cfg.w_min + a.a[2] * (cfg.w_max - cfg.w_min);
  box.h = cfg.h_min + a.a[3] * (cfg.h_max - cfg.h_min);
  box.class_id = cfg.target_class;
  return box;
}

Tensor generate(const AttackerNets& nets, const Tensor& frame, const AttackAction& a) {
  Tape t;
  Value zeta = nets.encode1(t, t.input(frame), /*frozen=*/true);
  Value w = nets.generate_graph(t, zeta, t.input(a.tensor()), /*frozen=*/true);
  return w.val();
}

Tensor apply(const Tensor& frame, const Tensor& w, double alpha, bool z) {
  if (!z) return frame;
  Tensor out = frame;
  for (int64_t i = 0; i < out.size(); ++i)
    out[i] = std::min(1.0, std::max(0.0, out[i] + alpha * w[i]));
  return out;
}

Tensor update_state(const AttackerNets& nets, const Tensor& h, const Tensor& x_next,
                    const AttackAction& a) {
  Tape t;
  Value enc = nets.encode0(t, t.input(x_next), /*frozen=*/true);
  Value h2 = nets.gru_step(t, t.input(h), enc, t.input(a.tensor()), /*frozen=*/true);
  return h2.val();
}

Tensor initial_hidden(const AttackerConfig& cfg, RngStream& rng) {
  Tensor h({cfg.latent});
  for (int64_t i = 0; i < h.size(); ++i) h[i] = rng.normal();
  return h;
}

double eval_attack_loss(const AttackerNets& nets, const victim::DetectorNet& detector,
                        const Tensor& frame, const AttackAction& a, const Tensor& w) {
  const Tensor candidate = apply(frame, w, nets.config().alpha, /*z=*/true);
  const TargetBox box = action_to_box(a, nets.config());
  const AnchorAssignment assign = assign_anchor(box, detector.config().anchors);
  return attack_loss(detector.detect(candidate), box, assign, detector.config());
}

}  // namespace rtia::attack
