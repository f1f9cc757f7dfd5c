#pragma once

#include "rtia/nn/modules.hpp"

namespace rtia::attack {

struct AttackerConfig {
  int frame_size = 32;
  int latent = 64;  // hidden-state length d_h and encoder latent width
  double alpha = 0.05;
  double w_min = 0.05, w_max = 0.6;
  double h_min = 0.05, h_max = 0.6;
  double dropout_rate = 0.1;
  int n_loss_samples = 16;
  int target_class = 0;
  int enc_c1 = 6, enc_c2 = 10, enc_c3 = 14;  // conv widths, 32->16->8->4
};

// Shared conv encoder topology (three stride-2 stages to 4x4, dense to a
// tanh latent). Instantiated twice: once in the sys group (state estimation)
// and once in the img group (perturbation generation).
struct ConvEncoder {
  nn::Conv3x3 c1, c2, c3;
  nn::Dense fc;
  int c3_out = 0;

  ConvEncoder() = default;
  ConvEncoder(nn::ParamGroup& g, const std::string& name, const AttackerConfig& cfg,
              nn::RngStream& rng);
  nn::Value operator()(nn::Tape& t, nn::Value frame, bool frozen = false) const;
};

// Latent -> [3,H,W] logits decoder (mirror of the encoder with nearest
// upsampling). Used for frame prediction; callers squash or feed BCE.
struct ImageDecoder {
  nn::Dense fc;
  nn::Conv3x3 u1, u2, u3;
  int c3_out = 0;

  ImageDecoder() = default;
  ImageDecoder(nn::ParamGroup& g, const std::string& name, const AttackerConfig& cfg,
               nn::RngStream& rng);
  nn::Value operator()(nn::Tape& t, nn::Value h, bool frozen = false) const;
};

// (latent, action) -> perturbation in [-1,1]. The action is broadcast across
// the 4x4 bottleneck and concatenated channelwise; the output conv is
// zero-initialized so an untrained generator emits w = 0.
struct PerturbDecoder {
  nn::Dense fc;
  nn::Conv3x3 u1, u2, u3;
  int c3_out = 0;

  PerturbDecoder() = default;
  PerturbDecoder(nn::ParamGroup& g, const std::string& name, const AttackerConfig& cfg,
                 nn::RngStream& rng);
  nn::Value operator()(nn::Tape& t, nn::Value zeta, nn::Value action, bool frozen = false) const;
};

// All attacker parameters, split into the five independently-stepped groups.
class AttackerNets {
 public:
  AttackerNets(const AttackerConfig& cfg, nn::RngStream& rng);

  const AttackerConfig& config() const { return cfg_; }

  nn::ParamGroup& img() { return img_; }
  nn::ParamGroup& sys() { return sys_; }
  nn::ParamGroup& actor() { return actor_; }
  nn::ParamGroup& critic() { return critic_; }
  nn::ParamGroup& dec() { return dec_; }
  std::vector<nn::ParamGroup*> groups() { return {&img_, &dec_, &actor_, &critic_, &sys_}; }

  // graph builders; `frozen` suppresses gradient tracking for that subnet
  nn::Value encode0(nn::Tape& t, nn::Value frame, bool frozen = false) const {
    return enc0_(t, frame, frozen);
  }
  nn::Value encode1(nn::Tape& t, nn::Value frame, bool frozen = false) const {
    return enc1_(t, frame, frozen);
  }
  nn::Value decode0_logits(nn::Tape& t, nn::Value h, bool frozen = false) const {
    return dec0_(t, h, frozen);
  }
  nn::Value generate_graph(nn::Tape& t, nn::Value zeta, nn::Value action,
                           bool frozen = false) const {
    return dec1_(t, zeta, action, frozen);
  }
  nn::Value gru_step(nn::Tape& t, nn::Value h, nn::Value enc, nn::Value action,
                     bool frozen = false) const;
  nn::Value actor_graph(nn::Tape& t, nn::Value h, bool frozen = false) const;
  nn::Value critic_graph(nn::Tape& t, nn::Value h, nn::Value action, bool frozen = false) const;
  nn::Value loss_pred0(nn::Tape& t, nn::Value h, double dropout_rate, nn::RngStream& rng,
                       bool frozen = false) const;
  nn::Value loss_pred1(nn::Tape& t, nn::Value h, nn::Value action, double dropout_rate,
                       nn::RngStream& rng, bool frozen = false) const;

 private:
  AttackerConfig cfg_;
  nn::ParamGroup img_{"img"}, sys_{"sys"}, actor_{"actor"}, critic_{"critic"}, dec_{"dec"};
  ConvEncoder enc0_, enc1_;
  ImageDecoder dec0_;
  PerturbDecoder dec1_;
  nn::GruCell gru_;
  nn::Dense actor_h_, actor_out_;
  nn::Dense critic_h_, critic_out_;
  nn::Dense l0_h_, l0_out_, l1_h_, l1_out_;
};

}  // namespace rtia::attack
