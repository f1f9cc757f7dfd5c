#include "rtia/eval/records.hpp"

#include <fstream>
#include <stdexcept>

#include "rtia/util/csv.hpp"

namespace rtia::eval {

using util::fmt;

void write_episode_csv(const std::string& path, const std::vector<EpisodeRow>& rows) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << "# " << kEpisodeSchema << "\n";
  os << "episode,steps,terminal_reward,time_avg_reward,attack_rate,collision,mean_loss,"
        "mean_ssim,mean_l2,done_cause\n";
  for (const auto& r : rows) {
    os << r.episode << ',' << r.steps << ',' << fmt(r.terminal_reward) << ','
       << fmt(r.time_avg_reward) << ',' << fmt(r.attack_rate) << ',' << r.collision << ','
       << fmt(r.mean_loss) << ',' << fmt(r.mean_ssim) << ',' << fmt(r.mean_l2) << ','
       << r.done_cause << "\n";
  }
}

std::vector<EpisodeRow> read_episode_csv(const std::string& path) {
  auto table = util::read_csv(path);
  std::vector<EpisodeRow> rows;
  rows.reserve(table.rows.size());
  for (const auto& f : table.rows) {
    if (f.size() < 10) throw std::runtime_error("episode csv: short row in " + path);
    EpisodeRow r;
    r.episode = std::stoi(f[0]);
    r.steps = std::stoi(f[1]);
    r.terminal_reward = std::stod(f[2]);
    r.time_avg_reward = std::stod(f[3]);
    r.attack_rate = std::stod(f[4]);
    r.collision = std::stoi(f[5]);
    r.mean_loss = std::stod(f[6]);
    r.mean_ssim = std::stod(f[7]);
    r.mean_l2 = std::stod(f[8]);
    r.done_cause = f[9];
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_steps_csv(const std::string& path, const std::vector<StepRow>& rows) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << "# " << kStepSchema << "\n";
  os << "t,a1,a2,a3,a4,z,loss,mean0,mean1,alpha,lat,fwd,v_lat,v_fwd,collided,reward,done_cause\n";
  for (const auto& r : rows) {
    os << r.t << ',' << fmt(r.a1) << ',' << fmt(r.a2) << ',' << fmt(r.a3) << ',' << fmt(r.a4)
       << ',' << r.z << ',' << fmt(r.loss) << ',' << fmt(r.mean0) << ',' << fmt(r.mean1) << ','
       << fmt(r.alpha) << ',' << fmt(r.lat) << ',' << fmt(r.fwd) << ',' << fmt(r.v_lat) << ','
       << fmt(r.v_fwd) << ',' << r.collided << ',' << fmt(r.reward) << ',' << r.done_cause
       << "\n";
  }
}

std::vector<StepRow> read_steps_csv(const std::string& path) {
  auto table = util::read_csv(path);
  std::vector<StepRow> rows;
  rows.reserve(table.rows.size());
  for (const auto& f : table.rows) {
    if (f.size() < 17) throw std::runtime_error("steps csv: short row in " + path);
    StepRow r;
    r.t = std::stoi(f[0]);
    r.a1 = std::stod(f[1]);
    r.a2 = std::stod(f[2]);
    r.a3 = std::stod(f[3]);
    r.a4 = std::stod(f[4]);
    r.z = std::stoi(f[5]);
    r.loss = std::stod(f[6]);
    r.mean0 = std::stod(f[7]);
    r.mean1 = std::stod(f[8]);
    r.alpha = std::stod(f[9]);
    r.lat = std::stod(f[10]);
    r.fwd = std::stod(f[11]);
    r.v_lat = std::stod(f[12]);
    r.v_fwd = std::stod(f[13]);
    r.collided = std::stoi(f[14]);
    r.reward = std::stod(f[15]);
    r.done_cause = f[16];
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace rtia::eval
