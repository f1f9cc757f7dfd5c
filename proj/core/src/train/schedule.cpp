#include "rtia/train/schedule.hpp"

#include <cmath>
#include <stdexcept>

namespace rtia::train {

StepSizeSchedule::StepSizeSchedule(Tier img, Tier dec, Tier actor, Tier critic, Tier sys)
    : img_(img), dec_(dec), actor_(actor), critic_(critic), sys_(sys) {
  const bool bases_ok = img.base > 0 && img.base <= dec.base && dec.base <= actor.base &&
                        actor.base <= critic.base && critic.base <= sys.base;
  const bool exps_ok = img.exponent > dec.exponent && dec.exponent > actor.exponent &&
                       actor.exponent > critic.exponent && critic.exponent > sys.exponent &&
                       sys.exponent >= 0.0;
  if (!bases_ok)
    throw std::invalid_argument("schedule: base step sizes must satisfy img<=dec<=actor<=critic<=sys");
  if (!exps_ok)
    throw std::invalid_argument(
        "schedule: decay exponents must satisfy img>dec>actor>critic>sys>=0");
}

StepSizes StepSizeSchedule::at(int64_t n) const {
  const double np1 = static_cast<double>(n) + 1.0;
  StepSizes e;
  e.img = img_.base / std::pow(np1, img_.exponent);
  e.dec = dec_.base / std::pow(np1, dec_.exponent);
  e.actor = actor_.base / std::pow(np1, actor_.exponent);
  e.critic = critic_.base / std::pow(np1, critic_.exponent);
  e.sys = sys_.base / std::pow(np1, sys_.exponent);
  return e;
}

}  // namespace rtia::train
