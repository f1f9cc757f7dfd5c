#include "rtia/attack/nets.hpp"

namespace rtia::attack {

using namespace rtia::nn;

ConvEncoder::ConvEncoder(ParamGroup& g, const std::string& name, const AttackerConfig& cfg,
                         RngStream& rng)
    : c1(g, name + ".c1", 3, cfg.enc_c1, 2, rng),
      c2(g, name + ".c2", cfg.enc_c1, cfg.enc_c2, 2, rng),
      c3(g, name + ".c3", cfg.enc_c2, cfg.enc_c3, 2, rng),
      fc(g, name + ".fc", cfg.enc_c3 * (cfg.frame_size / 8) * (cfg.frame_size / 8), cfg.latent,
         rng),
      c3_out(cfg.enc_c3) {}

Value ConvEncoder::operator()(Tape& t, Value frame, bool frozen) const {
  Value f = relu(c1(t, frame, frozen));
  f = relu(c2(t, f, frozen));
  f = relu(c3(t, f, frozen));
  const auto& s = f.val().shape();
  f = reshape(f, {s[0] * s[1] * s[2]});
  return tanh_(fc(t, f, frozen));
}

ImageDecoder::ImageDecoder(ParamGroup& g, const std::string& name, const AttackerConfig& cfg,
                           RngStream& rng)
    : fc(g, name + ".fc", cfg.latent, cfg.enc_c3 * (cfg.frame_size / 8) * (cfg.frame_size / 8),
         rng),
      u1(g, name + ".u1", cfg.enc_c3, cfg.enc_c2, 1, rng),
      u2(g, name + ".u2", cfg.enc_c2, cfg.enc_c1, 1, rng),
      u3(g, name + ".u3", cfg.enc_c1, 3, 1, rng),
      c3_out(cfg.enc_c3) {}

Value ImageDecoder::operator()(Tape& t, Value h, bool frozen) const {
  const int side = static_cast<int>(std::sqrt(fc.w->value.shape()[0] / c3_out));
  Value f = relu(fc(t, h, frozen));
  f = reshape(f, {c3_out, side, side});
  f = relu(u1(t, upsample2x(f), frozen));
  f = relu(u2(t, upsample2x(f), frozen));
  return u3(t, upsample2x(f), frozen);  // logits
}

PerturbDecoder::PerturbDecoder(ParamGroup& g, const std::string& name, const AttackerConfig& cfg,
                               RngStream& rng)
    : fc(g, name + ".fc", cfg.latent, cfg.enc_c3 * (cfg.frame_size / 8) * (cfg.frame_size / 8),
         rng),
      u1(g, name + ".u1", cfg.enc_c3 + 4, cfg.enc_c2, 1, rng),
      u2(g, name + ".u2", cfg.enc_c2, cfg.enc_c1, 1, rng),
      u3(g, name + ".u3", cfg.enc_c1, 3, 1, rng, /*zero_init=*/true),
      c3_out(cfg.enc_c3) {}

Value PerturbDecoder::operator()(Tape& t, Value zeta, Value action, bool frozen) const {
  const int side = static_cast<int>(std::sqrt(fc.w->value.shape()[0] / c3_out));
  Value f = relu(fc(t, zeta, frozen));
  f = reshape(f, {c3_out, side, side});
  f = concat_channels(f, broadcast_hw(action, side, side));
  f = relu(u1(t, upsample2x(f), frozen));
  f = relu(u2(t, upsample2x(f), frozen));
  return tanh_(u3(t, upsample2x(f), frozen));
}

AttackerNets::AttackerNets(const AttackerConfig& cfg, RngStream& rng) : cfg_(cfg) {
  RngStream r_img = rng.child("img");
  RngStream r_sys = rng.child("sys");
  RngStream r_actor = rng.child("actor");
  RngStream r_critic = rng.child("critic");
  RngStream r_dec = rng.child("dec");

  enc1_ = ConvEncoder(img_, "enc1", cfg, r_img);
  dec1_ = PerturbDecoder(img_, "dec1", cfg, r_img);

  enc0_ = ConvEncoder(sys_, "enc0", cfg, r_sys);
  gru_ = GruCell(sys_, "gru", cfg.latent + 4, cfg.latent, r_sys);
  dec0_ = ImageDecoder(sys_, "dec0", cfg, r_sys);

  actor_h_ = Dense(actor_, "h", cfg.latent, 64, r_actor);
  actor_out_ = Dense(actor_, "out", 64, 4, r_actor, /*zero_init=*/true);

  critic_h_ = Dense(critic_, "h", cfg.latent + 4, 64, r_critic);
  critic_out_ = Dense(critic_, "out", 64, 1, r_critic, /*zero_init=*/true);

  l0_h_ = Dense(dec_, "l0.h", cfg.latent, 64, r_dec);
  l0_out_ = Dense(dec_, "l0.out", 64, 1, r_dec, /*zero_init=*/true);
  l1_h_ = Dense(dec_, "l1.h", cfg.latent + 4, 64, r_dec);
  l1_out_ = Dense(dec_, "l1.out", 64, 1, r_dec, /*zero_init=*/true);
}

Value AttackerNets::gru_step(Tape& t, Value h, Value enc, Value action, bool frozen) const {
  return gru_(t, concat(enc, action), h, frozen);
}

Value AttackerNets::actor_graph(Tape& t, Value h, bool frozen) const {
  return sigmoid(actor_out_(t, relu(actor_h_(t, h, frozen)), frozen));
}

Value AttackerNets::critic_graph(Tape& t, Value h, Value action, bool frozen) const {
  return critic_out_(t, relu(critic_h_(t, concat(h, action), frozen)), frozen);
}

Value AttackerNets::loss_pred0(Tape& t, Value h, double dropout_rate, RngStream& rng,
                               bool frozen) const {
  Value hidden = relu(l0_h_(t, h, frozen));
  hidden = dropout(hidden, dropout_rate, rng);
  return l0_out_(t, hidden, frozen);
}

Value AttackerNets::loss_pred1(Tape& t, Value h, Value action, double dropout_rate, RngStream& rng,
                               bool frozen) const {
  Value hidden = relu(l1_h_(t, concat(h, action), frozen));
  hidden = dropout(hidden, dropout_rate, rng);
  return l1_out_(t, hidden, frozen);
}

}  // namespace rtia::attack
