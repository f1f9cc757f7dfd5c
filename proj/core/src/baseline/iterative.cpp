#include "rtia/baseline/iterative.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <stdexcept>

#include "rtia/eval/metrics.hpp"
#include "rtia/util/csv.hpp"

namespace rtia::baseline {

using namespace rtia::nn;
using attack::AnchorAssignment;
using attack::TargetBox;

IterativeResult iterative_attack(const Tensor& frame, const TargetBox& target,
                                 const victim::DetectorNet& detector,
                                 const IterativeAttackConfig& cfg) {
  if (cfg.iterations < 1) throw std::invalid_argument("iterative_attack: iterations must be >= 1");
  IterativeResult res;
  res.perturbation = Tensor(frame.shape());
  const AnchorAssignment assign = assign_anchor(target, detector.config().anchors);

  for (int it = 0; it < cfg.iterations; ++it) {
    Tape t(512);
    Value w = t.variable(res.perturbation);
    Value x_att = clamp01(add(t.input(frame), affine(w, cfg.alpha, 0.0)));
    auto scales = detector.forward(t, x_att, /*frozen=*/true);
    Value loss = attack::attack_loss_graph(scales, target, assign, detector.config());
    res.trace.push_back(loss.val().item());
    t.backward(loss);
    Tensor g = t.grad(w);
    double sup = 0.0;
    for (int64_t i = 0; i < g.size(); ++i) sup = std::max(sup, std::abs(g[i]));
    if (!std::isfinite(sup)) break;  // keep the trace so far
    const double scale = cfg.eta / (sup + 1e-12);
    for (int64_t i = 0; i < g.size(); ++i)
      res.perturbation[i] =
          std::clamp(res.perturbation[i] - scale * g[i], -1.0, 1.0);
  }

  res.attacked = frame;
  for (int64_t i = 0; i < frame.size(); ++i)
    res.attacked[i] = std::min(1.0, std::max(0.0, frame[i] + cfg.alpha * res.perturbation[i]));
  return res;
}

TargetBox fixed_offset_target(const std::optional<victim::BBox>& tracked, world::Scenario scenario,
                              double e2_sign, int target_class) {
  victim::BBox base;
  if (tracked) {
    base = *tracked;
  } else {
    base = victim::BBox{0.5, 0.5, 0.25, 0.2, 1.0, target_class};
  }
  TargetBox t;
  t.w = std::clamp(base.w, 0.05, 0.6);
  t.h = std::clamp(base.h, 0.05, 0.6);
  t.y = std::clamp(base.cy, 0.1, 0.9);
  t.class_id = target_class;
  double dx = 0.0;
  switch (scenario) {
    case world::Scenario::kE1:
      // push the vehicle off the target: drag the box a full width sideways
      dx = base.w;
      break;
    case world::Scenario::kE2:
      dx = -e2_sign * base.w;  // recentering on a shifted box strafes the vehicle
      break;
    case world::Scenario::kE3:
    case world::Scenario::kE4:
      dx = base.w;  // lateral pull breaks the following lock
      break;
  }
  t.x = std::clamp(base.cx + dx, 0.05, 0.95);
  return t;
}

train::EvalEpisode run_iterative_episode(const victim::DetectorNet& detector,
                                         const train::TrainConfig& cfg,
                                         const IterativeAttackConfig& atk, uint64_t seed) {
  train::EvalEpisode ep;
  RngStream master(seed);
  world::World env(cfg.world);
  victim::GuidancePipeline pipeline(detector, cfg.scenario, cfg.world.dt,
                                    cfg.attacker.target_class);
  auto out = env.reset(cfg.scenario, master.child("env").next_u64());
  pipeline.reset();

  const int stale = atk.staleness_frames > 0 ? atk.staleness_frames
                                             : std::max(1, (atk.iterations + 1) / 2);
  Tensor x = out.frame;
  Tensor w;
  std::optional<victim::BBox> last_box;
  int frames_since_opt = stale;  // force an optimization on the first frame

  double reward_sum = 0, loss_sum = 0, ssim_sum = 0, l2_sum = 0;
  int steps = 0;
  double terminal_reward = 0.0;
  world::DoneCause cause = world::DoneCause::kNone;

  while (!env.done()) {
    if (frames_since_opt >= stale) {
      const TargetBox target = fixed_offset_target(last_box, cfg.scenario,
                                                   cfg.world.e2_reward_sign,
                                                   cfg.attacker.target_class);
      auto res = iterative_attack(x, target, detector, atk);
      w = res.perturbation;
      loss_sum += res.trace.empty() ? 0.0 : res.trace.back();
      frames_since_opt = 0;
    }
    ++frames_since_opt;

    Tensor x_att = x;
    for (int64_t i = 0; i < x.size(); ++i)
      x_att[i] = std::min(1.0, std::max(0.0, x[i] + atk.alpha * w[i]));

    last_box = pipeline.process(x_att);
    const auto cmd = world::guidance(last_box, cfg.world);
    out = env.step(cmd);

    reward_sum += out.reward;
    ssim_sum += eval::ssim_loss(x, x_att);
    l2_sum += eval::l2_loss(x, x_att);
    ++steps;

    eval::StepRow sr;
    sr.t = steps - 1;
    sr.z = 1;
    sr.alpha = atk.alpha;
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

  ep.row.steps = steps;
  ep.row.terminal_reward = terminal_reward;
  ep.row.time_avg_reward = steps ? reward_sum / steps : 0.0;
  ep.row.attack_rate = 1.0;
  ep.row.collision = out.state.collided ? 1 : 0;
  ep.row.mean_loss = 0.0;
  ep.row.mean_ssim = steps ? ssim_sum / steps : 0.0;
  ep.row.mean_l2 = steps ? l2_sum / steps : 0.0;
  ep.row.done_cause = world::to_string(cause);
  return ep;
}

std::vector<SweepCell> sweep(const victim::DetectorNet& detector, const train::TrainConfig& cfg,
                             const std::vector<double>& alphas,
                             const std::vector<int>& iteration_counts, int episodes_per_cell,
                             uint64_t seed, int jobs) {
  struct CellSpec {
    double alpha;
    int iterations;
    uint64_t seed;
  };
  std::vector<CellSpec> specs;
  RngStream seeds(seed);
  for (double a : alphas)
    for (int it : iteration_counts) specs.push_back({a, it, seeds.next_u64()});

  auto run_cell = [&](const CellSpec& spec) {
    SweepCell cell;
    cell.alpha = spec.alpha;
    cell.iterations = spec.iterations;
    cell.episodes = episodes_per_cell;
    IterativeAttackConfig atk;
    atk.alpha = spec.alpha;
    atk.iterations = spec.iterations;
    RngStream ep_seeds(spec.seed);
    std::vector<double> rewards;
    for (int e = 0; e < episodes_per_cell; ++e) {
      auto ep = run_iterative_episode(detector, cfg, atk, ep_seeds.next_u64());
      rewards.push_back(ep.row.terminal_reward);
    }
    double m = 0;
    for (double r : rewards) m += r;
    m /= rewards.empty() ? 1 : static_cast<double>(rewards.size());
    double var = 0;
    for (double r : rewards) var += (r - m) * (r - m);
    cell.mean_terminal_reward = m;
    cell.std_terminal_reward =
        rewards.size() > 1 ? std::sqrt(var / (static_cast<double>(rewards.size()) - 1)) : 0.0;
    return cell;
  };

  std::vector<SweepCell> cells(specs.size());
  if (jobs <= 1) {
    for (std::size_t i = 0; i < specs.size(); ++i) cells[i] = run_cell(specs[i]);
  } else {
    std::size_t next = 0;
    while (next < specs.size()) {
      const std::size_t batch = std::min<std::size_t>(static_cast<std::size_t>(jobs),
                                                      specs.size() - next);
      std::vector<std::future<SweepCell>> futs;
      for (std::size_t j = 0; j < batch; ++j)
        futs.push_back(std::async(std::launch::async, run_cell, specs[next + j]));
      for (std::size_t j = 0; j < batch; ++j) cells[next + j] = futs[j].get();
      next += batch;
    }
  }
  return cells;
}

void write_sweep_csv(const std::string& path, const std::vector<SweepCell>& cells) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << "alpha,iterations,mean_terminal_reward,std_terminal_reward,episodes\n";
  for (const auto& c : cells)
    os << util::fmt(c.alpha) << ',' << c.iterations << ',' << util::fmt(c.mean_terminal_reward)
       << ',' << util::fmt(c.std_terminal_reward) << ',' << c.episodes << "\n";
}

}  // namespace rtia::baseline
