#include "rtia/eval/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace rtia::eval {

using nn::Tensor;

namespace {

constexpr int kWin = 8;
constexpr int kStride = 4;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

double window_ssim(const double* a, const double* b, int w, int y0, int x0) {
  double ma = 0, mb = 0;
  for (int y = 0; y < kWin; ++y)
    for (int x = 0; x < kWin; ++x) {
      ma += a[(y0 + y) * w + (x0 + x)];
      mb += b[(y0 + y) * w + (x0 + x)];
    }
  const double n = kWin * kWin;
  ma /= n;
  mb /= n;
  double va = 0, vb = 0, cov = 0;
  for (int y = 0; y < kWin; ++y)
    for (int x = 0; x < kWin; ++x) {
      const double da = a[(y0 + y) * w + (x0 + x)] - ma;
      const double db = b[(y0 + y) * w + (x0 + x)] - mb;
      va += da * da;
      vb += db * db;
      cov += da * db;
    }
  va /= n - 1;
  vb /= n - 1;
  cov /= n - 1;
  return ((2 * ma * mb + kC1) * (2 * cov + kC2)) /
         ((ma * ma + mb * mb + kC1) * (va + vb + kC2));
}

}  // namespace

double ssim_loss(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("ssim_loss: shape mismatch");
  const int c = a.shape()[0], h = a.shape()[1], w = a.shape()[2];
  if (h < kWin || w < kWin) throw std::invalid_argument("ssim_loss: frame smaller than window");
  double acc = 0.0;
  int count = 0;
  for (int ch = 0; ch < c; ++ch) {
    const double* pa = a.data() + static_cast<int64_t>(ch) * h * w;
    const double* pb = b.data() + static_cast<int64_t>(ch) * h * w;
    for (int y0 = 0; y0 + kWin <= h; y0 += kStride)
      for (int x0 = 0; x0 + kWin <= w; x0 += kStride) {
        acc += window_ssim(pa, pb, w, y0, x0);
        ++count;
      }
  }
  return 1.0 - acc / count;
}

double l2_loss(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("l2_loss: shape mismatch");
  double acc = 0.0;
  for (int64_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

CorrelationReport pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  CorrelationReport rep;
  rep.samples = static_cast<int>(xs.size());
  if (xs.size() != ys.size() || xs.size() < 2)
    throw std::invalid_argument("pearson: need >= 2 paired samples");
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    rep.defined = false;
    rep.r = 0.0;
    rep.p_value = 1.0;
    return rep;
  }
  rep.r = sxy / std::sqrt(sxx * syy);
  rep.r = std::min(1.0, std::max(-1.0, rep.r));
  if (xs.size() > 3 && std::abs(rep.r) < 1.0) {
    const double z = 0.5 * std::log((1.0 + rep.r) / (1.0 - rep.r)) * std::sqrt(n - 3.0);
    rep.p_value = std::erfc(std::abs(z) / std::sqrt(2.0));
  } else {
    rep.p_value = std::abs(rep.r) >= 1.0 ? 0.0 : 1.0;
  }
  return rep;
}

CorrelationReport correlate(const std::vector<int>& attack_flags, const std::vector<double>& losses,
                            int window_len) {
  if (attack_flags.size() != losses.size())
    throw std::invalid_argument("correlate: series length mismatch");
  const std::size_t windows = attack_flags.size() / static_cast<std::size_t>(window_len);
  if (windows < 10) throw std::invalid_argument("correlate: need at least 10 full windows");
  std::vector<double> rates(windows), mean_losses(windows);
  for (std::size_t w = 0; w < windows; ++w) {
    double rate = 0, ml = 0;
    for (int i = 0; i < window_len; ++i) {
      const std::size_t idx = w * static_cast<std::size_t>(window_len) + static_cast<std::size_t>(i);
      rate += attack_flags[idx];
      ml += losses[idx];
    }
    rates[w] = rate / window_len;
    mean_losses[w] = ml / window_len;
  }
  return pearson(rates, mean_losses);
}

}  // namespace rtia::eval
