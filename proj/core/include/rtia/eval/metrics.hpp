#pragma once

#include <string>
#include <vector>

#include "rtia/nn/tensor.hpp"

namespace rtia::eval {

// 1 - mean windowed SSIM (8x8 windows, stride 4, standard stabilizers
// C1=(0.01)^2, C2=(0.03)^2 on unit dynamic range, averaged per channel).
double ssim_loss(const nn::Tensor& a, const nn::Tensor& b);

// Mean squared per-pixel difference.
double l2_loss(const nn::Tensor& a, const nn::Tensor& b);

struct CorrelationReport {
  std::string method;
  std::string scenario;
  double r = 0.0;
  double p_value = 1.0;
  int samples = 0;
  bool defined = true;  // false when either series has zero variance
};

// Pearson correlation between per-window attack rate and per-window mean
// attack loss; windows of window_len steps (trailing partial window dropped).
// Two-tailed p-value via the Fisher z-transform normal approximation.
CorrelationReport correlate(const std::vector<int>& attack_flags, const std::vector<double>& losses,
                            int window_len = 50);

// Pearson r over already-aggregated pairs (exposed for tests).
CorrelationReport pearson(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace rtia::eval
