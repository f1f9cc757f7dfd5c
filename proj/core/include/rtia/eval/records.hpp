#pragma once

#include <string>
#include <vector>

#include "rtia/world/world.hpp"

namespace rtia::eval {

// One training/evaluation episode's bookkeeping. Attack rate counts steps
// where the decision came out z=1; stealth metrics average over all steps
// (unattacked steps contribute zero difference).
struct EpisodeRow {
  int episode = 0;
  int steps = 0;
  double terminal_reward = 0.0;
  double time_avg_reward = 0.0;
  double attack_rate = 0.0;
  int collision = 0;
  double mean_loss = 0.0;
  double mean_ssim = 0.0;
  double mean_l2 = 0.0;
  std::string done_cause = "none";
};

// Per-step log: attack fields plus the vehicle state they acted on.
struct StepRow {
  int t = 0;
  double a1 = 0, a2 = 0, a3 = 0, a4 = 0;
  int z = 0;
  double loss = 0.0;
  double mean0 = 0.0, mean1 = 0.0;
  double alpha = 0.0;
  double lat = 0, fwd = 0, v_lat = 0, v_fwd = 0;
  int collided = 0;
  double reward = 0.0;
  std::string done_cause = "none";
};

inline constexpr const char* kEpisodeSchema = "episodes.csv schema v1";
inline constexpr const char* kStepSchema = "steps.csv schema v1";

void write_episode_csv(const std::string& path, const std::vector<EpisodeRow>& rows);
std::vector<EpisodeRow> read_episode_csv(const std::string& path);

void write_steps_csv(const std::string& path, const std::vector<StepRow>& rows);
std::vector<StepRow> read_steps_csv(const std::string& path);

// A fully-qualified episode record, as aggregated by the ablation table.
struct EpisodeRecord {
  std::string method;
  std::string scenario;
  uint64_t seed = 0;
  EpisodeRow row;
};

}  // namespace rtia::eval
