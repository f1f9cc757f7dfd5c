#pragma once

#include <cstdint>
#include <deque>
#include <vector>

#include "rtia/attack/attacker.hpp"

namespace rtia::attack {

// Trajectory store: whole episodes of (frame, action) pairs, FIFO at episode
// granularity. Frames are quantized to u8 for capacity; dequantized on
// sampling.
class TrajectoryBuffer {
 public:
  TrajectoryBuffer(int capacity_episodes, int frame_size)
      : capacity_(capacity_episodes), frame_size_(frame_size) {
    episodes_.emplace_back();
  }

  void push(const nn::Tensor& frame, const AttackAction& a);
  // Seals the in-progress episode and starts the next row, evicting the
  // oldest episode beyond capacity. Empty in-progress rows are reused.
  void end_episode();

  int64_t num_pairs() const;
  int64_t num_windows(int t_len) const;  // contiguous windows of t_len transitions
  std::size_t num_episodes() const { return episodes_.size(); }

  struct Pair {
    nn::Tensor frame;
    AttackAction action;
  };
  // Uniform-with-replacement over all stored pairs. Throws on empty.
  Pair sample_pair(nn::RngStream& rng) const;

  struct Window {
    std::vector<nn::Tensor> frames;       // t_len + 1
    std::vector<AttackAction> actions;    // t_len
  };
  // Uniform over all valid (episode, start) windows. Throws if none exist.
  Window sample_window(int t_len, nn::RngStream& rng) const;

  void clear() {
    episodes_.clear();
    episodes_.emplace_back();
  }

 private:
  struct Episode {
    std::vector<uint8_t> frames;  // concatenated quantized frames
    std::vector<AttackAction> actions;
  };

  nn::Tensor frame_at(const Episode& ep, std::size_t idx) const;

  int capacity_;
  int frame_size_;
  std::deque<Episode> episodes_;  // back() is in progress
};

struct Transition {
  std::vector<float> h;
  AttackAction action;
  double reward = 0.0;
  std::vector<float> h_next;
};

struct DecisionTuple {
  std::vector<float> h;
  AttackAction action;
  double loss = 0.0;
  bool attacked = false;  // which arm produced this tuple (bandit-style training)
};

template <typename T>
class RingBuffer {
 public:
  explicit RingBuffer(std::size_t capacity) : capacity_(capacity) {}

  void push(T item) {
    if (items_.size() == capacity_) {
      items_[head_] = std::move(item);
      head_ = (head_ + 1) % capacity_;
    } else {
      items_.push_back(std::move(item));
    }
  }

  const T& sample(nn::RngStream& rng) const {
    if (items_.empty()) throw std::logic_error("replay buffer: sample from empty buffer");
    return items_[static_cast<std::size_t>(rng.uniform_index(items_.size()))];
  }

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  const T& at(std::size_t i) const { return items_[i]; }  // insertion-order agnostic
  void clear() {
    items_.clear();
    head_ = 0;
  }

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;
  std::vector<T> items_;
};

struct ReplayBuffers {
  TrajectoryBuffer trajectory;
  RingBuffer<Transition> transition;
  RingBuffer<DecisionTuple> decision;

  ReplayBuffers(int traj_episodes, std::size_t transition_cap, std::size_t decision_cap,
                int frame_size)
      : trajectory(traj_episodes, frame_size),
        transition(transition_cap),
        decision(decision_cap) {}
};

}  // namespace rtia::attack
