#pragma once

#include <string>
#include <vector>

#include "rtia/eval/records.hpp"

namespace rtia::eval {

struct AblateConfig {
  std::string runs_dir;  // runs_dir/<scenario>/<method>/seed<k>/episodes.csv
  std::vector<std::string> scenarios = {"E1"};
  std::vector<std::string> methods = {"normal", "iterative", "generative",
                                      "recursive", "nts", "cs"};
  int last_episodes = 10;  // reporting window per run
};

struct AblateCell {
  std::string scenario;
  std::string method;
  bool present = false;
  int seeds = 0;
  int n = 0;  // seeds * last_episodes actually aggregated
  double attack_rate_pct = 0.0;
  double ssim_loss = 0.0;   // raw; scaled at render time
  double l2_loss = 0.0;     // raw
  double collision_pct = 0.0;
  double terminal_mean = 0.0;
  double terminal_std = 0.0;
  double time_avg_mean = 0.0;
  double time_avg_std = 0.0;
  double mean_attack_loss = 0.0;
};

// Pure aggregation over the episode logs found on disk; cells without any
// run directory are marked absent and the scan continues.
std::vector<AblateCell> ablate(const AblateConfig& cfg);

// Fixed column order following the comparison-table convention (attack rate %,
// SSIM loss x1e2, L2 loss x1e4, collision rate %, terminal reward, time-avg
// reward). The attack columns of the no-attack method render as "-".
void write_ablation_csv(const std::string& path, const std::vector<AblateCell>& cells,
                        int last_episodes);

}  // namespace rtia::eval
