#pragma once

#include <vector>

#include "rtia/attack/buffers.hpp"
#include "rtia/attack/nets.hpp"
#include "rtia/victim/detector.hpp"

namespace rtia::train {

// Graph builders for the five per-group objectives. Each returns the scalar
// loss node on the tape that already carries the forward pass; the caller
// runs backward and steps. Gradients touch only the intended group:
// everything else enters the graphs frozen.

// Mean over windows of the per-stream average pixel binary cross-entropy
// between the true frames and the rolled-out predictions, h0 ~ N(0, I).
// recurrent=false drops the GRU and scores per-frame reconstruction instead
// (the state-estimator-ablated mode); GRU parameters then get zero gradient.
nn::Value loss_sys(nn::Tape& t, attack::AttackerNets& nets,
                   const std::vector<attack::TrajectoryBuffer::Window>& windows, bool recurrent,
                   nn::RngStream& h0_rng);

// Mean squared Bellman residual with the bootstrapped target held constant.
nn::Value loss_critic(nn::Tape& t, attack::AttackerNets& nets,
                      const std::vector<attack::Transition>& batch, double gamma);

// J = mean critic value of the actor's action at the stored states; the
// critic enters frozen so only actor parameters receive gradient. Ascended.
nn::Value objective_actor(nn::Tape& t, attack::AttackerNets& nets,
                          const std::vector<attack::Transition>& batch);

struct DecLosses {
  nn::Value combined;  // sum of the two predictor MSEs (what the step uses)
  double mse0 = 0.0;
  double mse1 = 0.0;
  int n0 = 0;
  int n1 = 0;
};

// Two MSE fits of l. bandit_mask=false fits both predictors on every tuple;
// bandit_mask=true fits each predictor only on tuples where its arm was the
// one chosen. Dropout stays active during these forwards.
DecLosses loss_dec(nn::Tape& t, attack::AttackerNets& nets,
                   const std::vector<attack::DecisionTuple>& batch, bool bandit_mask,
                   double dropout_rate, nn::RngStream& rng);

// Mean attack loss of generated perturbations over (x, a) pairs; gradient
// reaches only the generator group (detector frozen, frames constant).
nn::Value loss_img(nn::Tape& t, attack::AttackerNets& nets, const victim::DetectorNet& detector,
                   const std::vector<attack::TrajectoryBuffer::Pair>& batch);

nn::Tensor to_tensor(const std::vector<float>& v);

}  // namespace rtia::train
