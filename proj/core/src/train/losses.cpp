#include "rtia/train/losses.hpp"

#include <stdexcept>

#include "rtia/attack/attack_loss.hpp"
#include "rtia/attack/attacker.hpp"

namespace rtia::train {

using namespace rtia::nn;
using attack::AttackerNets;
using attack::DecisionTuple;
using attack::TrajectoryBuffer;
using attack::Transition;

Tensor to_tensor(const std::vector<float>& v) {
  Tensor t({static_cast<int>(v.size())});
  for (std::size_t i = 0; i < v.size(); ++i) t[static_cast<int64_t>(i)] = v[i];
  return t;
}

Value loss_sys(Tape& t, AttackerNets& nets, const std::vector<TrajectoryBuffer::Window>& windows,
               bool recurrent, RngStream& h0_rng) {
  if (windows.empty()) throw std::invalid_argument("loss_sys: empty batch");
  Value total;
  bool first_window = true;
  for (const auto& win : windows) {
    const int t_len = static_cast<int>(win.actions.size());
    Value stream_loss;
    bool first_step = true;
    if (recurrent) {
      Value h = t.input(attack::initial_hidden(nets.config(), h0_rng));
      for (int step = 0; step < t_len; ++step) {
        Value enc = nets.encode0(t, t.input(win.frames[static_cast<std::size_t>(step)]));
        h = nets.gru_step(t, h, enc, t.input(win.actions[static_cast<std::size_t>(step)].tensor()));
        Value logits = nets.decode0_logits(t, h);
        Value bce = bce_with_logits(logits, win.frames[static_cast<std::size_t>(step) + 1]);
        stream_loss = first_step ? bce : add(stream_loss, bce);
        first_step = false;
      }
    } else {
      for (int step = 0; step < t_len; ++step) {
        Value enc = nets.encode0(t, t.input(win.frames[static_cast<std::size_t>(step)]));
        Value logits = nets.decode0_logits(t, enc);
        Value bce = bce_with_logits(logits, win.frames[static_cast<std::size_t>(step)]);
        stream_loss = first_step ? bce : add(stream_loss, bce);
        first_step = false;
      }
    }
    stream_loss = affine(stream_loss, 1.0 / t_len, 0.0);
    total = first_window ? stream_loss : add(total, stream_loss);
    first_window = false;
  }
  return affine(total, 1.0 / static_cast<double>(windows.size()), 0.0);
}

Value loss_critic(Tape& t, AttackerNets& nets, const std::vector<Transition>& batch,
                  double gamma) {
  if (batch.empty()) throw std::invalid_argument("loss_critic: empty batch");

  // bootstrapped targets, held constant (computed off-graph)
  std::vector<double> targets;
  targets.reserve(batch.size());
  for (const auto& tr : batch) {
    Tape scratch;
    Value h2 = scratch.input(to_tensor(tr.h_next));
    Value a2 = nets.actor_graph(scratch, h2, /*frozen=*/true);
    Value q2 = nets.critic_graph(scratch, h2, a2, /*frozen=*/true);
    targets.push_back(tr.reward + gamma * q2.val().item());
  }

  Value total;
  for (std::size_t m = 0; m < batch.size(); ++m) {
    Value h = t.input(to_tensor(batch[m].h));
    Value a = t.input(batch[m].action.tensor());
    Value q = nets.critic_graph(t, h, a, /*frozen=*/false);
    Value sq = square(affine(q, 1.0, -targets[m]));
    total = m == 0 ? sq : add(total, sq);
  }
  return affine(total, 1.0 / static_cast<double>(batch.size()), 0.0);
}

Value objective_actor(Tape& t, AttackerNets& nets, const std::vector<Transition>& batch) {
  if (batch.empty()) throw std::invalid_argument("objective_actor: empty batch");
  Value total;
  for (std::size_t m = 0; m < batch.size(); ++m) {
    Value h = t.input(to_tensor(batch[m].h));
    Value a = nets.actor_graph(t, h, /*frozen=*/false);
    Value q = nets.critic_graph(t, h, a, /*frozen=*/true);
    total = m == 0 ? q : add(total, q);
  }
  return affine(total, 1.0 / static_cast<double>(batch.size()), 0.0);
}

DecLosses loss_dec(Tape& t, AttackerNets& nets, const std::vector<DecisionTuple>& batch,
                   bool bandit_mask, double dropout_rate, RngStream& rng) {
  if (batch.empty()) throw std::invalid_argument("loss_dec: empty batch");
  DecLosses out;
  Value sum0, sum1;
  for (const auto& d : batch) {
    const bool fit0 = !bandit_mask || !d.attacked;
    const bool fit1 = !bandit_mask || d.attacked;
    Value h = t.input(to_tensor(d.h));
    if (fit0) {
      Value p0 = nets.loss_pred0(t, h, dropout_rate, rng, /*frozen=*/false);
      Value sq = sq_err_sum(p0, Tensor::scalar(d.loss));
      sum0 = out.n0 == 0 ? sq : add(sum0, sq);
      ++out.n0;
    }
    if (fit1) {
      Value a = t.input(d.action.tensor());
      Value p1 = nets.loss_pred1(t, h, a, dropout_rate, rng, /*frozen=*/false);
      Value sq = sq_err_sum(p1, Tensor::scalar(d.loss));
      sum1 = out.n1 == 0 ? sq : add(sum1, sq);
      ++out.n1;
    }
  }
  Value combined;
  bool have = false;
  if (out.n0 > 0) {
    sum0 = affine(sum0, 1.0 / out.n0, 0.0);
    out.mse0 = sum0.val().item();
    combined = sum0;
    have = true;
  }
  if (out.n1 > 0) {
    sum1 = affine(sum1, 1.0 / out.n1, 0.0);
    out.mse1 = sum1.val().item();
    combined = have ? add(combined, sum1) : sum1;
    have = true;
  }
  if (!have) throw std::invalid_argument("loss_dec: mask selected no tuples");
  out.combined = combined;
  return out;
}

Value loss_img(Tape& t, AttackerNets& nets, const victim::DetectorNet& detector,
               const std::vector<TrajectoryBuffer::Pair>& batch) {
  if (batch.empty()) throw std::invalid_argument("loss_img: empty batch");
  const auto& cfg = nets.config();
  Value total;
  for (std::size_t m = 0; m < batch.size(); ++m) {
    Value x = t.input(batch[m].frame);
    Value zeta = nets.encode1(t, x, /*frozen=*/false);
    Value w = nets.generate_graph(t, zeta, t.input(batch[m].action.tensor()), /*frozen=*/false);
    Value attacked = clamp01(add(x, affine(w, cfg.alpha, 0.0)));
    auto scales = detector.forward(t, attacked, /*frozen=*/true);
    const attack::TargetBox box = attack::action_to_box(batch[m].action, cfg);
    const auto assign = attack::assign_anchor(box, detector.config().anchors);
    Value l = attack::attack_loss_graph(scales, box, assign, detector.config());
    total = m == 0 ? l : add(total, l);
  }
  return affine(total, 1.0 / static_cast<double>(batch.size()), 0.0);
}

}  // namespace rtia::train
