#include "rtia/train/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <stdexcept>

#include "rtia/eval/metrics.hpp"
#include "rtia/nn/checkpoint.hpp"
#include "rtia/train/losses.hpp"
#include "rtia/world/render.hpp"

namespace rtia::train {

namespace fs = std::filesystem;
using namespace rtia::nn;
using attack::AttackAction;
using attack::AttackerNets;
using eval::EpisodeRow;
using eval::StepRow;

Method method_from_string(const std::string& s) {
  if (s == "normal") return Method::kNormal;
  if (s == "iterative") return Method::kIterative;
  if (s == "generative") return Method::kGenerative;
  if (s == "recursive") return Method::kRecursive;
  if (s == "nts") return Method::kNts;
  if (s == "cs") return Method::kCs;
  throw std::invalid_argument("unknown method: " + s);
}

std::string to_string(Method m) {
  switch (m) {
    case Method::kNormal: return "normal";
    case Method::kIterative: return "iterative";
    case Method::kGenerative: return "generative";
    case Method::kRecursive: return "recursive";
    case Method::kNts: return "nts";
    case Method::kCs: return "cs";
  }
  return "?";
}

namespace {

Tensor encode_frame_plain(const AttackerNets& nets, const Tensor& frame) {
  Tape t;
  return nets.encode0(t, t.input(frame), /*frozen=*/true).val();
}

std::vector<float> to_f32(const Tensor& t) {
  std::vector<float> v(static_cast<std::size_t>(t.size()));
  for (int64_t i = 0; i < t.size(); ++i) v[static_cast<std::size_t>(i)] = static_cast<float>(t[i]);
  return v;
}

struct EpisodeAccum {
  double reward_sum = 0.0;
  double loss_sum = 0.0;
  double ssim_sum = 0.0;
  double l2_sum = 0.0;
  int attacked = 0;
  int decision_steps = 0;
  int steps = 0;

  EpisodeRow finalize(int episode, double terminal_reward, bool collided,
                      world::DoneCause cause) const {
    EpisodeRow row;
    row.episode = episode;
    row.steps = steps;
    row.terminal_reward = terminal_reward;
    row.time_avg_reward = steps ? reward_sum / steps : 0.0;
    row.attack_rate = decision_steps ? static_cast<double>(attacked) / decision_steps : 0.0;
    row.collision = collided ? 1 : 0;
    row.mean_loss = steps ? loss_sum / steps : 0.0;
    row.mean_ssim = steps ? ssim_sum / steps : 0.0;
    row.mean_l2 = steps ? l2_sum / steps : 0.0;
    row.done_cause = world::to_string(cause);
    return row;
  }
};

void save_attacker_checkpoint(AttackerNets& nets, const std::string& path, int64_t episode,
                              int64_t env_steps) {
  std::vector<const ParamGroup*> groups;
  for (auto* g : nets.groups()) groups.push_back(g);
  std::vector<NamedTensor> meta;
  meta.push_back({"meta/episode", Tensor::scalar(static_cast<double>(episode))});
  meta.push_back({"meta/env_steps", Tensor::scalar(static_cast<double>(env_steps))});
  save_checkpoint(path, groups, meta);
}

}  // namespace

TrainResult train(AttackerNets& nets, const victim::DetectorNet& detector,
                  const TrainConfig& cfg) {
  if (!method_trains(cfg.method))
    throw std::invalid_argument("train: method " + to_string(cfg.method) + " is not trainable");

  TrainResult res;
  const bool recurrent = method_recurrent(cfg.method);
  const bool has_switch = method_has_switch(cfg.method);
  const bool bandit_mask = cfg.method == Method::kNts;
  const double alpha = cfg.attacker.alpha;

  RngStream master(cfg.seed);
  RngStream env_seeds = master.child("env");
  RngStream explore_rng = master.child("explore");
  RngStream h0_rng = master.child("h0");
  RngStream decide_rng = master.child("decide");
  RngStream predict_seeds = master.child("predict");
  RngStream sys_rng = master.child("sample_sys");
  RngStream sys_h0_rng = master.child("sys_h0");
  RngStream critic_rng = master.child("sample_critic");
  RngStream actor_rng = master.child("sample_actor");
  RngStream dec_rng = master.child("sample_dec");
  RngStream dec_drop_rng = master.child("dec_dropout");
  RngStream img_rng = master.child("sample_img");

  attack::ReplayBuffers buffers(cfg.traj_capacity, cfg.transition_capacity, cfg.decision_capacity,
                                cfg.world.frame_size);

  world::World env(cfg.world);
  victim::GuidancePipeline pipeline(detector, cfg.scenario, cfg.world.dt, cfg.attacker.target_class);

  if (!cfg.out_dir.empty()) fs::create_directories(cfg.out_dir);
  auto maybe_checkpoint = [&](int episode, int64_t n, const std::string& name) {
    if (cfg.out_dir.empty()) return;
    save_attacker_checkpoint(nets, (fs::path(cfg.out_dir) / name).string(), episode, n);
  };
  maybe_checkpoint(0, 0, "attacker_init.bin");

  int64_t n = 0;  // update-iteration counter (one per environment step)
  int consecutive_skips = 0;

  for (int episode = 0; episode < cfg.episodes && !res.aborted; ++episode) {
    auto out = env.reset(cfg.scenario, env_seeds.next_u64());
    pipeline.reset();
    Tensor x = out.frame;
    Tensor h = recurrent ? attack::initial_hidden(cfg.attacker, h0_rng)
                         : encode_frame_plain(nets, x);
    const double sigma =
        cfg.episodes > 1
            ? cfg.sigma0 + (cfg.sigma_final - cfg.sigma0) * episode / (cfg.episodes - 1)
            : cfg.sigma0;

    EpisodeAccum accum;
    double terminal_reward = 0.0;
    world::DoneCause cause = world::DoneCause::kNone;

    while (!env.done() && !res.aborted) {
      // --- act
      const AttackAction a = attack::act(nets, h, sigma, explore_rng);
      const Tensor w = attack::generate(nets, x, a);
      const double l_t = attack::eval_attack_loss(nets, detector, x, a, w);

      attack::LossStats stats;
      bool z = true;
      if (has_switch) {
        stats = attack::predict_losses(nets, h, a, cfg.attacker.n_loss_samples,
                                       cfg.attacker.dropout_rate, predict_seeds.next_u64());
        const auto d = cfg.method == Method::kCs ? attack::decide_cs(stats, decide_rng)
                                                 : attack::decide_nts(stats, decide_rng);
        z = d.attack;
      }

      const Tensor x_att = attack::apply(x, w, alpha, z);
      const auto box = pipeline.process(x_att);
      const auto cmd = world::guidance(box, cfg.world);
      out = env.step(cmd);

      const Tensor h_next = recurrent ? attack::update_state(nets, h, out.frame, a)
                                      : encode_frame_plain(nets, out.frame);

      // --- buffers
      buffers.trajectory.push(x, a);
      attack::Transition tr;
      tr.h = to_f32(h);
      tr.action = a;
      tr.reward = out.reward * cfg.reward_scale;
      tr.h_next = to_f32(h_next);
      buffers.transition.push(std::move(tr));
      attack::DecisionTuple dtuple;
      dtuple.h = to_f32(h);
      dtuple.action = a;
      dtuple.loss = l_t;
      dtuple.attacked = z;
      buffers.decision.push(std::move(dtuple));

      // --- bookkeeping
      accum.reward_sum += out.reward;
      accum.loss_sum += l_t;
      ++accum.decision_steps;
      if (z) {
        ++accum.attacked;
        accum.ssim_sum += eval::ssim_loss(x, x_att);
        accum.l2_sum += eval::l2_loss(x, x_att);
      }
      ++accum.steps;
      if (cfg.write_step_log) {
        StepRow sr;
        sr.t = static_cast<int>(n);
        sr.a1 = a.a[0];
        sr.a2 = a.a[1];
        sr.a3 = a.a[2];
        sr.a4 = a.a[3];
        sr.z = z ? 1 : 0;
        sr.loss = l_t;
        sr.mean0 = stats.mean0;
        sr.mean1 = stats.mean1;
        sr.alpha = alpha;
        sr.lat = out.state.lat;
        sr.fwd = out.state.fwd;
        sr.v_lat = out.state.v_lat;
        sr.v_fwd = out.state.v_fwd;
        sr.collided = out.state.collided ? 1 : 0;
        sr.reward = out.reward;
        sr.done_cause = world::to_string(out.done_cause);
        res.steps.push_back(std::move(sr));
      }

      // --- one update per group per step, fast tiers first
      const StepSizes eps = cfg.schedule.at(n);
      if (!StepSizeSchedule::tier_ordered(eps))
        throw std::logic_error("train: step-size tier ordering violated");

      auto update = [&](ParamGroup& g, double eps_g, double sign, auto&& build) {
        g.zero_grad();
        Tape t(1024);
        Value loss = build(t);
        bool ok = std::isfinite(loss.val().item());
        if (ok) {
          t.backward(loss);
          if (cfg.grad_clip > 0.0) {
            const double nrm = g.grad_norm();
            if (nrm > cfg.grad_clip) g.scale_grads(cfg.grad_clip / nrm);
          }
          ok = sgd_step(g, eps_g, sign);
        }
        if (!ok) {
          ++res.skipped_updates;
          ++consecutive_skips;
          std::fprintf(stderr, "train: skipped %s update at n=%lld (non-finite)\n",
                       g.name().c_str(), static_cast<long long>(n));
          if (consecutive_skips >= cfg.max_consecutive_skips) {
            res.aborted = true;
            res.abort_reason = "too many consecutive non-finite updates";
          }
        } else {
          consecutive_skips = 0;
        }
      };

      if (buffers.trajectory.num_windows(cfg.t_window) >= cfg.batch_sys) {
        update(nets.sys(), eps.sys, -1.0, [&](Tape& t) {
          std::vector<attack::TrajectoryBuffer::Window> wins;
          for (int i = 0; i < cfg.batch_sys; ++i)
            wins.push_back(buffers.trajectory.sample_window(cfg.t_window, sys_rng));
          return loss_sys(t, nets, wins, recurrent, sys_h0_rng);
        });
      }
      if (buffers.transition.size() >= static_cast<std::size_t>(cfg.batch)) {
        update(nets.critic(), eps.critic, -1.0, [&](Tape& t) {
          std::vector<attack::Transition> batch;
          for (int i = 0; i < cfg.batch; ++i) batch.push_back(buffers.transition.sample(critic_rng));
          return loss_critic(t, nets, batch, cfg.gamma);
        });
        update(nets.actor(), eps.actor, +1.0, [&](Tape& t) {
          std::vector<attack::Transition> batch;
          for (int i = 0; i < cfg.batch; ++i) batch.push_back(buffers.transition.sample(actor_rng));
          return objective_actor(t, nets, batch);
        });
      }
      if (buffers.decision.size() >= static_cast<std::size_t>(cfg.batch)) {
        update(nets.dec(), eps.dec, -1.0, [&](Tape& t) {
          std::vector<attack::DecisionTuple> batch;
          for (int i = 0; i < cfg.batch; ++i) batch.push_back(buffers.decision.sample(dec_rng));
          return loss_dec(t, nets, batch, bandit_mask, cfg.attacker.dropout_rate, dec_drop_rng)
              .combined;
        });
      }
      if (buffers.trajectory.num_pairs() >= cfg.batch_img) {
        update(nets.img(), eps.img, -1.0, [&](Tape& t) {
          std::vector<attack::TrajectoryBuffer::Pair> batch;
          for (int i = 0; i < cfg.batch_img; ++i)
            batch.push_back(buffers.trajectory.sample_pair(img_rng));
          return loss_img(t, nets, detector, batch);
        });
      }

      ++n;
      ++res.env_steps;
      h = h_next;
      x = out.frame;
      if (out.done) {
        terminal_reward = out.reward;
        cause = out.done_cause;
      }
    }

    buffers.trajectory.end_episode();
    res.episodes.push_back(
        accum.finalize(episode, terminal_reward, out.state.collided, cause));

    if (!cfg.out_dir.empty()) {
      eval::write_episode_csv((fs::path(cfg.out_dir) / "episodes.csv").string(), res.episodes);
      if (cfg.checkpoint_every > 0 && (episode + 1) % cfg.checkpoint_every == 0) {
        char name[64];
        std::snprintf(name, sizeof(name), "ckpt_ep%04d.bin", episode + 1);
        maybe_checkpoint(episode + 1, n, name);
      }
    }
  }

  if (!cfg.out_dir.empty()) {
    eval::write_episode_csv((fs::path(cfg.out_dir) / "episodes.csv").string(), res.episodes);
    if (cfg.write_step_log)
      eval::write_steps_csv((fs::path(cfg.out_dir) / "steps.csv").string(), res.steps);
    maybe_checkpoint(cfg.episodes, n, "attacker.bin");
  }
  return res;
}

EvalEpisode run_eval_episode(const AttackerNets* nets, const victim::DetectorNet& detector,
                             const TrainConfig& cfg, const EvalOptions& opt) {
  EvalEpisode ep;
  if (opt.method == Method::kIterative)
    throw std::invalid_argument("run_eval_episode: the iterative baseline has its own runner");
  const bool is_normal = opt.method == Method::kNormal;
  const bool recurrent = method_recurrent(opt.method);
  const bool has_switch = method_has_switch(opt.method);
  if (!is_normal && nets == nullptr)
    throw std::invalid_argument("run_eval_episode: nets required for attack methods");

  RngStream master(opt.seed);
  RngStream h0_rng = master.child("h0");
  RngStream decide_rng = master.child("decide");
  RngStream predict_seeds = master.child("predict");

  world::World env(cfg.world);
  victim::GuidancePipeline pipeline(detector, cfg.scenario, cfg.world.dt, cfg.attacker.target_class);
  auto out = env.reset(cfg.scenario, master.child("env").next_u64());
  pipeline.reset();

  Tensor x = out.frame;
  Tensor h;
  if (!is_normal)
    h = recurrent ? attack::initial_hidden(cfg.attacker, h0_rng) : encode_frame_plain(*nets, x);

  EpisodeAccum accum;
  double terminal_reward = 0.0;
  world::DoneCause cause = world::DoneCause::kNone;
  RngStream null_rng(0);

  while (!env.done()) {
    Tensor x_att = x;
    bool z = false;
    double l_t = 0.0;
    attack::LossStats stats;
    AttackAction a;

    if (!is_normal) {
      const auto t0 = std::chrono::steady_clock::now();
      a = attack::act(*nets, h, 0.0, null_rng);
      const Tensor w = attack::generate(*nets, x, a);
      ++ep.counters.generator_forwards;
      z = true;
      if (has_switch) {
        stats = attack::predict_losses(*nets, h, a, cfg.attacker.n_loss_samples,
                                       cfg.attacker.dropout_rate, predict_seeds.next_u64());
        const auto d = opt.method == Method::kCs ? attack::decide_cs(stats, decide_rng)
                                                 : attack::decide_nts(stats, decide_rng);
        z = d.attack;
        ++ep.counters.decisions;
      }
      x_att = attack::apply(x, w, cfg.attacker.alpha, z);
      if (opt.time_attacker) {
        // close the timed section after the state update below; split here to
        // keep the victim pipeline out of the attacker's budget
        const auto t1 = std::chrono::steady_clock::now();
        ep.attacker_seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
      }
      if (opt.compute_loss) l_t = attack::eval_attack_loss(*nets, detector, x, a, w);
    }

    const auto box = pipeline.process(x_att);
    const auto cmd = world::guidance(box, cfg.world);
    out = env.step(cmd);

    if (!is_normal) {
      const auto t2 = std::chrono::steady_clock::now();
      if (recurrent) {
        h = attack::update_state(*nets, h, out.frame, a);
        ++ep.counters.gru_steps;
      } else {
        h = encode_frame_plain(*nets, out.frame);
      }
      if (opt.time_attacker && !ep.attacker_seconds.empty()) {
        const auto t3 = std::chrono::steady_clock::now();
        ep.attacker_seconds.back() += std::chrono::duration<double>(t3 - t2).count();
      }
    }

    accum.reward_sum += out.reward;
    accum.loss_sum += l_t;
    if (!is_normal) {
      ++accum.decision_steps;
      if (z) {
        ++accum.attacked;
        accum.ssim_sum += eval::ssim_loss(x, x_att);
        accum.l2_sum += eval::l2_loss(x, x_att);
      }
    }
    ++accum.steps;

    StepRow sr;
    sr.t = accum.steps - 1;
    sr.a1 = a.a[0];
    sr.a2 = a.a[1];
    sr.a3 = a.a[2];
    sr.a4 = a.a[3];
    sr.z = z ? 1 : 0;
    sr.loss = l_t;
    sr.mean0 = stats.mean0;
    sr.mean1 = stats.mean1;
    sr.alpha = is_normal ? 0.0 : cfg.attacker.alpha;
    sr.lat = out.state.lat;
    sr.fwd = out.state.fwd;
    sr.v_lat = out.state.v_lat;
    sr.v_fwd = out.state.v_fwd;
    sr.collided = out.state.collided ? 1 : 0;
    sr.reward = out.reward;
    sr.done_cause = world::to_string(out.done_cause);
    ep.steps.push_back(std::move(sr));

    x = out.frame;
    if (out.done) {
      terminal_reward = out.reward;
      cause = out.done_cause;
    }
  }

  ep.counters.victim_detector_forwards = pipeline.detector_forwards();
  ep.row = accum.finalize(0, terminal_reward, out.state.collided, cause);
  if (is_normal) ep.row.attack_rate = 0.0;
  return ep;
}

}  // namespace rtia::train
