#include "rtia/victim/train.hpp"

#include <algorithm>
#include <cmath>

#include "rtia/attack/attack_loss.hpp"

namespace rtia::victim {

using namespace rtia::nn;
using attack::TargetBox;

namespace {

std::vector<TargetBox> to_targets(const std::vector<BBox>& labels) {
  std::vector<TargetBox> out;
  out.reserve(labels.size());
  for (const auto& b : labels) out.push_back({b.cx, b.cy, b.w, b.h, b.class_id});
  return out;
}

double frame_loss(const DetectorNet& net, const LabeledFrame& item) {
  Tape t;
  auto scales = net.forward(t, t.input(item.frame), /*frozen=*/true);
  Value l = attack::detection_loss_graph(scales, to_targets(item.labels), net.config());
  return l.val().item();
}

}  // namespace

double holdout_loss(const DetectorNet& net, const Dataset& ds, std::size_t first,
                    std::size_t count) {
  double acc = 0.0;
  for (std::size_t i = first; i < first + count; ++i) acc += frame_loss(net, ds.items[i]);
  return count ? acc / static_cast<double>(count) : 0.0;
}

double holdout_mean_iou(const DetectorNet& net, const Dataset& ds, std::size_t first,
                        std::size_t count) {
  double acc = 0.0;
  int scored = 0;
  for (std::size_t i = first; i < first + count; ++i) {
    const auto& item = ds.items[i];
    if (item.labels.empty()) continue;
    auto boxes = net.detect_boxes(item.frame);
    // score each labeled class once: selected box vs its best ground truth
    std::vector<bool> class_seen(8, false);
    for (const auto& gt : item.labels) {
      if (class_seen[static_cast<std::size_t>(gt.class_id)]) continue;
      class_seen[static_cast<std::size_t>(gt.class_id)] = true;
      auto sel = select_target(boxes, gt.class_id);
      double best = 0.0;
      if (sel)
        for (const auto& g2 : item.labels)
          if (g2.class_id == gt.class_id) best = std::max(best, iou(*sel, g2));
      acc += best;
      ++scored;
    }
  }
  return scored ? acc / scored : 0.0;
}

DetectorTrainResult train_detector(DetectorNet& net, const Dataset& ds,
                                   const DetectorTrainConfig& cfg) {
  DetectorTrainResult res;
  const std::size_t n = ds.items.size();
  const std::size_t holdout = std::min(n, std::max<std::size_t>(1, static_cast<std::size_t>(
                                              std::llround(cfg.holdout_frac * static_cast<double>(n)))));
  const std::size_t train_n = n > holdout ? n - holdout : 0;
  res.initial_holdout_loss = holdout_loss(net, ds, train_n, holdout);
  res.final_holdout_loss = res.initial_holdout_loss;
  if (train_n == 0 || cfg.steps <= 0) {
    res.holdout_mean_iou = holdout_mean_iou(net, ds, train_n, holdout);
    return res;
  }

  RngStream rng(cfg.seed);
  auto& group = net.group();

  // Start the objectness logits at a low prior instead of 0.5: the no-object
  // term outweighs positives ~160:1 and otherwise drives every confidence
  // into deep sigmoid saturation before the positives can be learned.
  const int fields = 5 + net.config().num_classes;
  for (auto& p : group.params()) {
    if (p.name.find("head") == std::string::npos || p.name.rfind(".b") != p.name.size() - 2)
      continue;
    for (int64_t c = 0; c < p.value.size(); ++c)
      if (c % fields == 4) p.value[c] = cfg.conf_prior_logit;
  }

  // momentum buffers, one per parameter
  std::vector<Tensor> velocity;
  for (auto& p : group.params()) velocity.emplace_back(p.value.shape());

  std::vector<Tensor> last_finite;
  for (auto& p : group.params()) last_finite.push_back(p.value);

  for (int step = 0; step < cfg.steps; ++step) {
    group.zero_grad();
    Tape t;
    Value total = Value{};
    double batch_loss = 0.0;
    for (int b = 0; b < cfg.batch; ++b) {
      const auto& item = ds.items[rng.uniform_index(train_n)];
      auto scales = net.forward(t, t.input(item.frame), /*frozen=*/false);
      Value l = attack::detection_loss_graph(scales, to_targets(item.labels), net.config());
      total = b == 0 ? l : add(total, l);
    }
    total = affine(total, 1.0 / cfg.batch, 0.0);
    batch_loss = total.val().item();
    if (!std::isfinite(batch_loss)) {
      // roll back to the last finite parameters and stop
      std::size_t i = 0;
      for (auto& p : group.params()) p.value = last_finite[i++];
      res.aborted_non_finite = true;
      break;
    }
    t.backward(total);

    const double lr = cfg.lr / (1.0 + cfg.lr_decay * step);
    std::size_t i = 0;
    for (auto& p : group.params()) {
      Tensor& v = velocity[i++];
      for (int64_t j = 0; j < v.size(); ++j) {
        v[j] = cfg.momentum * v[j] + p.grad[j];
        p.value[j] -= lr * v[j];
      }
    }
    ++res.steps_done;
    if (step % 200 == 0) {
      std::size_t k = 0;
      for (auto& p : group.params()) last_finite[k++] = p.value;
    }
  }

  res.final_holdout_loss = holdout_loss(net, ds, train_n, holdout);
  res.holdout_mean_iou = holdout_mean_iou(net, ds, train_n, holdout);
  return res;
}

}  // namespace rtia::victim
