#include "rtia/attack/buffers.hpp"

#include <cmath>
#include <stdexcept>

namespace rtia::attack {

using nn::RngStream;
using nn::Tensor;

void TrajectoryBuffer::push(const Tensor& frame, const AttackAction& a) {
  Episode& ep = episodes_.back();
  const std::size_t old = ep.frames.size();
  ep.frames.resize(old + static_cast<std::size_t>(frame.size()));
  for (int64_t i = 0; i < frame.size(); ++i)
    ep.frames[old + static_cast<std::size_t>(i)] =
        static_cast<uint8_t>(std::lround(std::min(1.0, std::max(0.0, frame[i])) * 255.0));
  ep.actions.push_back(a);
}

void TrajectoryBuffer::end_episode() {
  if (episodes_.back().actions.empty()) return;  // nothing recorded; reuse the row
  episodes_.emplace_back();
  while (static_cast<int>(episodes_.size()) > capacity_ + 1) episodes_.pop_front();
}

int64_t TrajectoryBuffer::num_pairs() const {
  int64_t n = 0;
  for (const auto& ep : episodes_) n += static_cast<int64_t>(ep.actions.size());
  return n;
}

int64_t TrajectoryBuffer::num_windows(int t_len) const {
  int64_t n = 0;
  for (const auto& ep : episodes_) {
    const int64_t len = static_cast<int64_t>(ep.actions.size());
    if (len > t_len) n += len - t_len;
  }
  return n;
}

Tensor TrajectoryBuffer::frame_at(const Episode& ep, std::size_t idx) const {
  const std::size_t px = static_cast<std::size_t>(3) * frame_size_ * frame_size_;
  Tensor t({3, frame_size_, frame_size_});
  const uint8_t* src = ep.frames.data() + idx * px;
  for (std::size_t i = 0; i < px; ++i) t[static_cast<int64_t>(i)] = src[i] / 255.0;
  return t;
}

TrajectoryBuffer::Pair TrajectoryBuffer::sample_pair(RngStream& rng) const {
  const int64_t total = num_pairs();
  if (total == 0) throw std::logic_error("trajectory buffer: sample from empty buffer");
  int64_t pick = static_cast<int64_t>(rng.uniform_index(static_cast<uint64_t>(total)));
  for (const auto& ep : episodes_) {
    const int64_t len = static_cast<int64_t>(ep.actions.size());
    if (pick < len) {
      return {frame_at(ep, static_cast<std::size_t>(pick)),
              ep.actions[static_cast<std::size_t>(pick)]};
    }
    pick -= len;
  }
  throw std::logic_error("trajectory buffer: index walk failed");
}

TrajectoryBuffer::Window TrajectoryBuffer::sample_window(int t_len, RngStream& rng) const {
  const int64_t total = num_windows(t_len);
  if (total == 0) throw std::logic_error("trajectory buffer: no complete windows to sample");
  int64_t pick = static_cast<int64_t>(rng.uniform_index(static_cast<uint64_t>(total)));
  for (const auto& ep : episodes_) {
    const int64_t len = static_cast<int64_t>(ep.actions.size());
    const int64_t windows = len > t_len ? len - t_len : 0;
    if (pick < windows) {
      Window w;
      const std::size_t start = static_cast<std::size_t>(pick);
      for (int i = 0; i <= t_len; ++i) w.frames.push_back(frame_at(ep, start + static_cast<std::size_t>(i)));
      for (int i = 0; i < t_len; ++i)
        w.actions.push_back(ep.actions[start + static_cast<std::size_t>(i)]);
      return w;
    }
    pick -= windows;
  }
  throw std::logic_error("trajectory buffer: window walk failed");
}

}  // namespace rtia::attack
