#include "rtia/victim/detector.hpp"

#include <cmath>

namespace rtia::victim {

using namespace rtia::nn;

std::vector<BBox> DetectionGrid::to_boxes() const {
  std::vector<BBox> out;
  for (const auto& sc : scales) {
    for (std::size_t k = 0; k < sc.anchors.size(); ++k) {
      for (const auto& p : sc.anchors[k]) {
        BBox b;
        b.cx = p.x;
        b.cy = p.y;
        b.w = p.w;
        b.h = p.h;
        b.conf = p.conf;
        int best = 0;
        for (int c = 1; c < static_cast<int>(p.cls.size()); ++c)
          if (p.cls[static_cast<std::size_t>(c)] > p.cls[static_cast<std::size_t>(best)]) best = c;
        b.class_id = best;
        out.push_back(b);
      }
    }
  }
  return out;
}

DetectorNet::DetectorNet(const DetectorConfig& cfg, RngStream& rng)
    : cfg_(cfg), group_("detector") {
  const int head_ch = cfg.anchors.anchors_per_scale * (5 + cfg.num_classes);
  c1_ = Conv3x3(group_, "c1", 3, 12, 2, rng);
  c2_ = Conv3x3(group_, "c2", 12, 24, 2, rng);
  c3_ = Conv3x3(group_, "c3", 24, 32, 2, rng);
  head1_ = Conv3x3(group_, "head1", 24, head_ch, 1, rng, /*zero_init=*/true);
  head2_ = Conv3x3(group_, "head2", 32, head_ch, 1, rng, /*zero_init=*/true);
}

namespace {

// [1,S,S] constants holding each cell's column / row index.
Tensor col_grid(int s) {
  Tensor t({1, s, s});
  for (int r = 0; r < s; ++r)
    for (int c = 0; c < s; ++c) t[static_cast<int64_t>(r) * s + c] = c;
  return t;
}

Tensor row_grid(int s) {
  Tensor t({1, s, s});
  for (int r = 0; r < s; ++r)
    for (int c = 0; c < s; ++c) t[static_cast<int64_t>(r) * s + c] = r;
  return t;
}

constexpr double kLn2 = 0.6931471805599453;

}  // namespace

std::vector<ScaleValues> DetectorNet::forward(Tape& t, Value frame, bool frozen) const {
  const int nc = cfg_.num_classes;
  const int b = cfg_.anchors.anchors_per_scale;

  Value f1 = relu(c1_(t, frame, frozen));
  Value f2 = relu(c2_(t, f1, frozen));
  Value f3 = relu(c3_(t, f2, frozen));
  std::array<Value, 2> heads = {head1_(t, f2, frozen), head2_(t, f3, frozen)};

  std::vector<ScaleValues> out;
  for (int si = 0; si < cfg_.anchors.num_scales(); ++si) {
    ScaleValues sv;
    sv.s = cfg_.anchors.grid_sizes[static_cast<std::size_t>(si)];
    Value head = heads[static_cast<std::size_t>(si)];
    Value cols = t.input(col_grid(sv.s));
    Value rows = t.input(row_grid(sv.s));
    const double inv_s = 1.0 / sv.s;
    for (int k = 0; k < b; ++k) {
      const int base = k * (5 + nc);
      const auto& tmpl = cfg_.anchors.tmpl(si, k);
      sv.x.push_back(affine(add(sigmoid(slice_channels(head, base + 0, 1)), cols), inv_s, 0.0));
      sv.y.push_back(affine(add(sigmoid(slice_channels(head, base + 1, 1)), rows), inv_s, 0.0));
      sv.w.push_back(affine(softplus(slice_channels(head, base + 2, 1)), tmpl[0] / kLn2, 0.0));
      sv.h.push_back(affine(softplus(slice_channels(head, base + 3, 1)), tmpl[1] / kLn2, 0.0));
      sv.conf.push_back(sigmoid(slice_channels(head, base + 4, 1)));
      sv.cls.push_back(sigmoid(slice_channels(head, base + 5, nc)));
    }
    out.push_back(std::move(sv));
  }
  return out;
}

DetectionGrid DetectorNet::detect(const Tensor& frame) const {
  Tape t;
  Value f = t.input(frame);
  auto scales = forward(t, f, /*frozen=*/true);

  DetectionGrid grid;
  for (const auto& sv : scales) {
    DetectionGrid::Scale sc;
    sc.s = sv.s;
    const int cells = sv.s * sv.s;
    sc.anchors.resize(sv.x.size());
    for (std::size_t k = 0; k < sv.x.size(); ++k) {
      sc.anchors[k].resize(static_cast<std::size_t>(cells));
      const Tensor& xs = sv.x[k].val();
      const Tensor& ys = sv.y[k].val();
      const Tensor& ws = sv.w[k].val();
      const Tensor& hs = sv.h[k].val();
      const Tensor& cs = sv.conf[k].val();
      const Tensor& ps = sv.cls[k].val();
      for (int j = 0; j < cells; ++j) {
        AnchorPred& p = sc.anchors[k][static_cast<std::size_t>(j)];
        p.x = xs[j];
        p.y = ys[j];
        p.w = ws[j];
        p.h = hs[j];
        p.conf = cs[j];
        for (int c = 0; c < cfg_.num_classes; ++c)
          p.cls[static_cast<std::size_t>(c)] = ps[static_cast<int64_t>(c) * cells + j];
      }
    }
    grid.scales.push_back(std::move(sc));
  }
  return grid;
}

std::vector<BBox> DetectorNet::detect_boxes(const Tensor& frame) const {
  return nms(detect(frame).to_boxes(), cfg_.conf_thresh, cfg_.iou_thresh);
}

}  // namespace rtia::victim
