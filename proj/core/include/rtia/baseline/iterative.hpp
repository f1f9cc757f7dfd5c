#pragma once

#include <string>
#include <vector>

#include "rtia/attack/attack_loss.hpp"
#include "rtia/train/trainer.hpp"

namespace rtia::baseline {

enum class TargetRule { kManual, kFixedOffset };

struct IterativeAttackConfig {
  double alpha = 0.8;
  int iterations = 20;
  double eta = 0.05;        // inner step on w, sup-norm-normalized gradient
  TargetRule target_rule = TargetRule::kFixedOffset;
  // frames a computed perturbation stays in use before re-optimizing,
  // modelling the optimizer running slower than the control loop
  int staleness_frames = 0;  // 0: derived as ceil(iterations / 2)
};

struct IterativeResult {
  nn::Tensor attacked;       // clamp(x + alpha * w)
  nn::Tensor perturbation;   // final w in [-1,1]
  std::vector<double> trace;  // loss before each iteration's step
};

// Per-frame white-box attack: gradient descent on the perturbation itself,
// loss evaluated through the frozen detector. Stops early (keeping the trace
// so far) if the gradient goes non-finite.
IterativeResult iterative_attack(const nn::Tensor& frame, const attack::TargetBox& target,
                                 const victim::DetectorNet& detector,
                                 const IterativeAttackConfig& cfg);

// The per-scenario fabrication rule standing in for manual annotation: the
// target box sits one box-width toward the scenario's adversarial direction
// from the current tracked box (or frame center when nothing is tracked).
attack::TargetBox fixed_offset_target(const std::optional<victim::BBox>& tracked,
                                      world::Scenario scenario, double e2_sign, int target_class);

// One episode driven by the per-frame iterative attack (staleness applied).
train::EvalEpisode run_iterative_episode(const victim::DetectorNet& detector,
                                         const train::TrainConfig& cfg,
                                         const IterativeAttackConfig& atk, uint64_t seed);

struct SweepCell {
  double alpha = 0.0;
  int iterations = 0;
  double mean_terminal_reward = 0.0;
  double std_terminal_reward = 0.0;
  int episodes = 0;
};

// alpha x iterations grid of mean terminal rewards on the given scenario.
std::vector<SweepCell> sweep(const victim::DetectorNet& detector, const train::TrainConfig& cfg,
                             const std::vector<double>& alphas,
                             const std::vector<int>& iteration_counts, int episodes_per_cell,
                             uint64_t seed, int jobs = 1);

void write_sweep_csv(const std::string& path, const std::vector<SweepCell>& cells);

}  // namespace rtia::baseline
