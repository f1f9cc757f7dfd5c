#pragma once

#include "rtia/victim/dataset.hpp"
#include "rtia/victim/detector.hpp"

namespace rtia::victim {

struct DetectorTrainConfig {
  int steps = 3000;
  int batch = 8;
  double lr = 0.08;
  double lr_decay = 1e-3;   // lr_n = lr / (1 + n * lr_decay)
  double momentum = 0.9;
  double holdout_frac = 0.1;
  double conf_prior_logit = -2.0;  // objectness bias at train start
  uint64_t seed = 1;
};

struct DetectorTrainResult {
  int steps_done = 0;
  double initial_holdout_loss = 0.0;
  double final_holdout_loss = 0.0;
  double holdout_mean_iou = 0.0;
  bool aborted_non_finite = false;
};

// SGD-with-momentum on the detection loss; labels come straight from the
// renderer geometry. Aborts (keeping the last finite parameters) if the loss
// goes non-finite. Holdout IoU is the mean best-overlap of the selected box
// per labeled class against its ground truth.
DetectorTrainResult train_detector(DetectorNet& net, const Dataset& ds,
                                   const DetectorTrainConfig& cfg);

// Holdout metrics on an arbitrary slice (exposed for tests).
double holdout_loss(const DetectorNet& net, const Dataset& ds, std::size_t first, std::size_t count);
double holdout_mean_iou(const DetectorNet& net, const Dataset& ds, std::size_t first,
                        std::size_t count);

}  // namespace rtia::victim
