#pragma once

#include <string>
#include <vector>

#include "rtia/attack/buffers.hpp"
#include "rtia/attack/decision.hpp"
#include "rtia/eval/records.hpp"
#include "rtia/train/schedule.hpp"
#include "rtia/victim/pipeline.hpp"

namespace rtia::train {

enum class Method { kNormal, kIterative, kGenerative, kRecursive, kNts, kCs };

Method method_from_string(const std::string& s);
std::string to_string(Method m);

inline bool method_trains(Method m) {
  return m == Method::kGenerative || m == Method::kRecursive || m == Method::kNts ||
         m == Method::kCs;
}
inline bool method_has_switch(Method m) { return m == Method::kNts || m == Method::kCs; }
// generative replaces the recurrent state with the frame encoding alone
inline bool method_recurrent(Method m) { return method_trains(m) && m != Method::kGenerative; }

struct TrainConfig {
  world::WorldConfig world;
  attack::AttackerConfig attacker;
  world::Scenario scenario = world::Scenario::kE1;
  Method method = Method::kRecursive;
  int episodes = 200;
  int batch = 32;      // M: transition/decision minibatches
  int batch_sys = 2;   // trajectory windows per sys update
  int batch_img = 4;   // (x, a) pairs per generator update
  int t_window = 16;   // T: trajectory window length
  double gamma = 0.99;
  StepSizeSchedule schedule = StepSizeSchedule::defaults();
  int traj_capacity = 64;
  std::size_t transition_capacity = 50000;
  std::size_t decision_capacity = 50000;
  double sigma0 = 0.1;        // exploration noise, linear decay per episode
  double sigma_final = 0.01;
  double reward_scale = 1.0;  // applied to rewards entering the transition buffer
  double grad_clip = 0.0;     // L2 cap per group; 0 disables
  uint64_t seed = 1;
  int checkpoint_every = 25;
  int max_consecutive_skips = 100;
  std::string out_dir;        // empty: no artifacts written
  bool write_step_log = true;
};

struct TrainResult {
  std::vector<eval::EpisodeRow> episodes;
  std::vector<eval::StepRow> steps;
  bool aborted = false;
  std::string abort_reason;
  int64_t env_steps = 0;
  int skipped_updates = 0;
};

// Algorithm: act -> generate -> decide -> apply -> victim/guidance -> world
// step -> recurrent state update -> push all three buffers -> one update per
// parameter group on its own step size, every environment step once the
// relevant buffer holds a full batch.
TrainResult train(attack::AttackerNets& nets, const victim::DetectorNet& detector,
                  const TrainConfig& cfg);

// --- evaluation (frozen parameters) ----------------------------------------

struct EvalCounters {
  int generator_forwards = 0;
  int victim_detector_forwards = 0;
  int gru_steps = 0;
  int decisions = 0;
};

struct EvalOptions {
  Method method = Method::kRecursive;
  uint64_t seed = 7;
  bool compute_loss = true;     // attacker-side l_t bookkeeping (extra detector pass)
  bool time_attacker = false;   // per-step wall time of the attacker computation
};

struct EvalEpisode {
  eval::EpisodeRow row;
  std::vector<eval::StepRow> steps;
  EvalCounters counters;
  std::vector<double> attacker_seconds;  // per step, when time_attacker
};

// One episode with frozen parameters (nets may be null for Method::kNormal).
EvalEpisode run_eval_episode(const attack::AttackerNets* nets,
                             const victim::DetectorNet& detector, const TrainConfig& cfg,
                             const EvalOptions& opt);

}  // namespace rtia::train
