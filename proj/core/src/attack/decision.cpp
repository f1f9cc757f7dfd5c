#include "rtia/attack/decision.hpp"

#include <cmath>
#include <stdexcept>

namespace rtia::attack {

using namespace rtia::nn;

LossStats predict_losses(const AttackerNets& nets, const Tensor& h, const AttackAction& a,
                         int n_samples, double dropout_rate, uint64_t seed) {
  if (n_samples < 2) throw std::invalid_argument("predict_losses: n_samples must be >= 2");
  RngStream rng(seed);
  double s0 = 0, s0_sq = 0, s1 = 0, s1_sq = 0;
  for (int i = 0; i < n_samples; ++i) {
    Tape t;
    Value hv = t.input(h);
    Value av = t.input(a.tensor());
    RngStream mask0 = rng.child(static_cast<uint64_t>(2 * i));
    RngStream mask1 = rng.child(static_cast<uint64_t>(2 * i + 1));
    const double v0 = nets.loss_pred0(t, hv, dropout_rate, mask0, /*frozen=*/true).val().item();
    const double v1 = nets.loss_pred1(t, hv, av, dropout_rate, mask1, /*frozen=*/true).val().item();
    s0 += v0;
    s0_sq += v0 * v0;
    s1 += v1;
    s1_sq += v1 * v1;
  }
  const double n = n_samples;
  LossStats st;
  st.mean0 = s0 / n;
  st.mean1 = s1 / n;
  st.var0 = std::max(0.0, (s0_sq - n * st.mean0 * st.mean0) / (n - 1.0));
  st.var1 = std::max(0.0, (s1_sq - n * st.mean1 * st.mean1) / (n - 1.0));
  return st;
}

namespace {

DecisionSample sample_pair(const LossStats& stats, RngStream& rng) {
  if (stats.var0 < 0.0 || stats.var1 < 0.0)
    throw std::invalid_argument("decision: negative variance");
  DecisionSample d;
  d.l0 = stats.mean0 + std::sqrt(stats.var0) * rng.normal();
  d.l1 = stats.mean1 + std::sqrt(stats.var1) * rng.normal();
  d.attack = d.l1 <= d.l0;
  return d;
}

}  // namespace

DecisionSample decide_cs(const LossStats& stats, RngStream& rng) { return sample_pair(stats, rng); }

DecisionSample decide_nts(const LossStats& stats, RngStream& rng) { return sample_pair(stats, rng); }

}  // namespace rtia::attack
