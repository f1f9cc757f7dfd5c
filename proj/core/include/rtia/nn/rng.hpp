#pragma once

#include <cmath>
#include <cstdint>
#include <string>

namespace rtia::nn {

// Deterministic, platform-independent random stream (splitmix64 core with
// hand-rolled uniform/normal transforms, so no reliance on libstdc++
// distribution internals). Every consumer of randomness takes one of these
// explicitly; there is no global RNG state anywhere.
class RngStream {
 public:
  explicit RngStream(uint64_t seed) : state_(seed ^ 0x9e3779b97f4a7c15ull) {
    // decorrelate trivially related seeds
    next_u64();
    next_u64();
  }

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // 64-bit Box-Muller; one value per call (the pair's partner is discarded to
  // keep call counts independent of usage pattern).
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Uniform integer in [0, n).
  uint64_t uniform_index(uint64_t n) { return n ? next_u64() % n : 0; }

  bool bernoulli(double p) { return uniform() < p; }

  // Derive an independent child stream from a label; used to give each
  // component (env, dropout, exploration, ...) its own reproducible stream.
  RngStream child(const std::string& label) const {
    uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : label) {
      h ^= c;
      h *= 0x100000001b3ull;
    }
    return RngStream(state_ ^ h);
  }

  RngStream child(uint64_t salt) const { return RngStream(state_ ^ (salt * 0x9e3779b97f4a7c15ull + 0x2545f4914f6cdd1dull)); }

 private:
  uint64_t state_;
};

}  // namespace rtia::nn
