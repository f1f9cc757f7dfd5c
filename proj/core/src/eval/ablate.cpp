#include "rtia/eval/ablate.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "rtia/util/csv.hpp"

namespace rtia::eval {

namespace fs = std::filesystem;

std::vector<AblateCell> ablate(const AblateConfig& cfg) {
  std::vector<AblateCell> cells;
  for (const auto& scenario : cfg.scenarios) {
    for (const auto& method : cfg.methods) {
      AblateCell cell;
      cell.scenario = scenario;
      cell.method = method;
      const fs::path mdir = fs::path(cfg.runs_dir) / scenario / method;
      std::vector<EpisodeRow> pool;
      if (fs::is_directory(mdir)) {
        // deterministic order regardless of directory enumeration
        std::vector<fs::path> seed_dirs;
        for (const auto& e : fs::directory_iterator(mdir))
          if (e.is_directory() && e.path().filename().string().rfind("seed", 0) == 0)
            seed_dirs.push_back(e.path());
        std::sort(seed_dirs.begin(), seed_dirs.end());
        for (const auto& sd : seed_dirs) {
          const fs::path csv = sd / "episodes.csv";
          if (!fs::exists(csv)) continue;
          auto rows = read_episode_csv(csv.string());
          const std::size_t take = std::min<std::size_t>(rows.size(),
                                                         static_cast<std::size_t>(cfg.last_episodes));
          for (std::size_t i = rows.size() - take; i < rows.size(); ++i) pool.push_back(rows[i]);
          ++cell.seeds;
        }
      }
      if (!pool.empty()) {
        cell.present = true;
        cell.n = static_cast<int>(pool.size());
        double tr = 0, ta = 0, ar = 0, ss = 0, l2 = 0, col = 0, ml = 0;
        for (const auto& r : pool) {
          tr += r.terminal_reward;
          ta += r.time_avg_reward;
          ar += r.attack_rate;
          ss += r.mean_ssim;
          l2 += r.mean_l2;
          col += r.collision;
          ml += r.mean_loss;
        }
        const double n = static_cast<double>(pool.size());
        cell.terminal_mean = tr / n;
        cell.time_avg_mean = ta / n;
        cell.attack_rate_pct = 100.0 * ar / n;
        cell.ssim_loss = ss / n;
        cell.l2_loss = l2 / n;
        cell.collision_pct = 100.0 * col / n;
        cell.mean_attack_loss = ml / n;
        double vtr = 0, vta = 0;
        for (const auto& r : pool) {
          vtr += (r.terminal_reward - cell.terminal_mean) * (r.terminal_reward - cell.terminal_mean);
          vta += (r.time_avg_reward - cell.time_avg_mean) * (r.time_avg_reward - cell.time_avg_mean);
        }
        cell.terminal_std = n > 1 ? std::sqrt(vtr / (n - 1)) : 0.0;
        cell.time_avg_std = n > 1 ? std::sqrt(vta / (n - 1)) : 0.0;
      }
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

void write_ablation_csv(const std::string& path, const std::vector<AblateCell>& cells,
                        int last_episodes) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + path);
  int max_seeds = 0;
  for (const auto& c : cells) max_seeds = std::max(max_seeds, c.seeds);
  os << "# ablation table: last " << last_episodes << " episodes per run, seeds=" << max_seeds
     << ", N=" << max_seeds * last_episodes << " per full cell\n";
  os << "scenario,method,seeds,n,attack_rate_pct,ssim_loss_1e2,l2_loss_1e4,collision_rate_pct,"
        "terminal_reward_avg,terminal_reward_std,time_avg_reward_avg,time_avg_reward_std,"
        "mean_attack_loss\n";
  for (const auto& c : cells) {
    os << c.scenario << ',' << c.method << ',' << c.seeds << ',' << c.n << ',';
    if (!c.present) {
      os << "-,-,-,-,-,-,-,-,-\n";
      continue;
    }
    const bool attackless = c.method == "normal";
    if (attackless)
      os << "-,-,-,";
    else
      os << util::fmt(c.attack_rate_pct) << ',' << util::fmt(c.ssim_loss * 1e2) << ','
         << util::fmt(c.l2_loss * 1e4) << ',';
    os << util::fmt(c.collision_pct) << ',' << util::fmt(c.terminal_mean) << ','
       << util::fmt(c.terminal_std) << ',' << util::fmt(c.time_avg_mean) << ','
       << util::fmt(c.time_avg_std) << ',';
    if (attackless)
      os << "-\n";
    else
      os << util::fmt(c.mean_attack_loss) << "\n";
  }
}

}  // namespace rtia::eval
