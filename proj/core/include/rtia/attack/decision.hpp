#pragma once

#include "rtia/attack/attacker.hpp"

namespace rtia::attack {

// Dropout-sampled statistics of the two loss predictors at (h) and (h, a).
struct LossStats {
  double mean0 = 0.0, var0 = 0.0;
  double mean1 = 0.0, var1 = 0.0;
};

// n_samples stochastic forwards of each predictor with independent dropout
// masks; returns sample means and unbiased variances. Requires n_samples >= 2.
LossStats predict_losses(const AttackerNets& nets, const nn::Tensor& h, const AttackAction& a,
                         int n_samples, double dropout_rate, uint64_t seed);

struct DecisionSample {
  double l0 = 0.0;  // sampled loss given h alone
  double l1 = 0.0;  // sampled loss given (h, a)
  bool attack = false;  // true iff l1 <= l0, by construction
};

// Conditional sampling: draw from the two fitted Gaussians and attack iff the
// action-conditioned sample is not worse.
DecisionSample decide_cs(const LossStats& stats, nn::RngStream& rng);

// Two-arm Thompson draw over the same predictive distributions (arm 0 = no
// attack, arm 1 = attack; lower sampled loss wins). Identical sampling rule
// to decide_cs — the methods differ in how the predictors are trained.
DecisionSample decide_nts(const LossStats& stats, nn::RngStream& rng);

}  // namespace rtia::attack
