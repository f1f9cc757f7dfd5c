#pragma once

#include <cstdint>

namespace rtia::train {

// Per-group diminishing step sizes eps_g(n) = base_g / (1+n)^p_g. The tier
// ordering (img <= dec <= actor <= critic <= sys at every n) and the
// vanishing adjacent ratios are guaranteed by validating base ordering and
// strict exponent ordering at construction.
struct StepSizes {
  double img = 0.0, dec = 0.0, actor = 0.0, critic = 0.0, sys = 0.0;
};

class StepSizeSchedule {
 public:
  struct Tier {
    double base;
    double exponent;
  };

  // Throws std::invalid_argument unless base_img <= base_dec <= base_actor <=
  // base_critic <= base_sys and p_img > p_dec > p_actor > p_critic > p_sys >= 0.
  StepSizeSchedule(Tier img, Tier dec, Tier actor, Tier critic, Tier sys);

  static StepSizeSchedule defaults() {
    return StepSizeSchedule({2e-4, 0.9}, {5e-4, 0.8}, {5e-4, 0.7}, {1e-3, 0.6}, {1e-3, 0.5});
  }

  StepSizes at(int64_t n) const;

  static bool tier_ordered(const StepSizes& e) {
    return e.img <= e.dec && e.dec <= e.actor && e.actor <= e.critic && e.critic <= e.sys;
  }

  const Tier& img() const { return img_; }
  const Tier& dec() const { return dec_; }
  const Tier& actor() const { return actor_; }
  const Tier& critic() const { return critic_; }
  const Tier& sys() const { return sys_; }

 private:
  Tier img_, dec_, actor_, critic_, sys_;
};

}  // namespace rtia::train
