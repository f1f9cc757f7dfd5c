#include "rtia/eval/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "rtia/util/csv.hpp"

namespace rtia::eval {

namespace {

constexpr int kW = 640;
constexpr int kH = 420;
constexpr int kMargin = 48;

struct Rgb {
  uint8_t r, g, b;
};

const Rgb kPalette[] = {{31, 119, 180}, {255, 127, 14}, {44, 160, 44},
                        {214, 39, 40},  {148, 103, 189}, {140, 86, 75}};

Rgb lighten(Rgb c) {
  return {static_cast<uint8_t>(c.r + (255 - c.r) * 3 / 4),
          static_cast<uint8_t>(c.g + (255 - c.g) * 3 / 4),
          static_cast<uint8_t>(c.b + (255 - c.b) * 3 / 4)};
}

struct Axes {
  double x0, x1, y0, y1;

  int px(double x) const {
    const double t = x1 > x0 ? (x - x0) / (x1 - x0) : 0.5;
    return kMargin + static_cast<int>(t * (kW - 2 * kMargin));
  }
  int py(double y) const {
    const double t = y1 > y0 ? (y - y0) / (y1 - y0) : 0.5;
    return kH - kMargin - static_cast<int>(t * (kH - 2 * kMargin));
  }
};

void draw_frame(Canvas& c) {
  c.line(kMargin, kH - kMargin, kW - kMargin, kH - kMargin, 40, 40, 40);
  c.line(kMargin, kMargin, kMargin, kH - kMargin, 40, 40, 40);
  for (int i = 1; i <= 4; ++i) {
    const int x = kMargin + i * (kW - 2 * kMargin) / 5;
    const int y = kH - kMargin - i * (kH - 2 * kMargin) / 5;
    c.line(x, kH - kMargin - 3, x, kH - kMargin + 3, 40, 40, 40);
    c.line(kMargin - 3, y, kMargin + 3, y, 40, 40, 40);
  }
}

void write_meta(const std::string& png_path, const std::vector<std::string>& lines) {
  std::ofstream os(png_path + ".meta.txt", std::ios::trunc);
  for (const auto& l : lines) os << l << "\n";
}

}  // namespace

uint64_t plot_learning_curves(
    const std::string& png_path,
    const std::map<std::string, std::vector<std::vector<double>>>& by_method) {
  Canvas canvas(kW, kH);

  std::size_t max_eps = 0;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& [method, seeds] : by_method)
    for (const auto& curve : seeds) {
      max_eps = std::max(max_eps, curve.size());
      for (double v : curve) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
  if (max_eps == 0) {
    lo = 0;
    hi = 1;
    max_eps = 1;
  }
  if (lo == hi) {
    lo -= 1;
    hi += 1;
  }
  Axes ax{0.0, static_cast<double>(max_eps - 1), lo, hi};
  draw_frame(canvas);

  std::vector<std::string> meta = {"plot = learning_curves",
                                   "shading = mean +- 0.1*std across seeds",
                                   "x = episode", "y = terminal reward",
                                   "x_range = 0.." + std::to_string(max_eps - 1),
                                   "y_range = " + util::fmt(lo) + ".." + util::fmt(hi)};

  int color_idx = 0;
  for (const auto& [method, seeds] : by_method) {
    const Rgb col = kPalette[color_idx % 6];
    const Rgb shade = lighten(col);
    ++color_idx;
    meta.push_back("series = " + method + " (seeds=" + std::to_string(seeds.size()) + ")");
    if (seeds.empty()) continue;
    std::size_t eps = 0;
    for (const auto& s : seeds) eps = std::max(eps, s.size());

    std::vector<double> mean(eps, 0.0), sd(eps, 0.0);
    for (std::size_t e = 0; e < eps; ++e) {
      int n = 0;
      double m = 0;
      for (const auto& s : seeds)
        if (e < s.size()) {
          m += s[e];
          ++n;
        }
      m /= std::max(1, n);
      double var = 0;
      for (const auto& s : seeds)
        if (e < s.size()) var += (s[e] - m) * (s[e] - m);
      mean[e] = m;
      sd[e] = n > 1 ? std::sqrt(var / (n - 1)) : 0.0;
    }

    for (std::size_t e = 0; e < eps; ++e) {
      const int x = ax.px(static_cast<double>(e));
      const int ylo = ax.py(mean[e] - 0.1 * sd[e]);
      const int yhi = ax.py(mean[e] + 0.1 * sd[e]);
      for (int y = yhi; y <= ylo; ++y) canvas.set(x, y, shade.r, shade.g, shade.b);
    }
    for (std::size_t e = 1; e < eps; ++e)
      canvas.line(ax.px(static_cast<double>(e - 1)), ax.py(mean[e - 1]),
                  ax.px(static_cast<double>(e)), ax.py(mean[e]), col.r, col.g, col.b);
    // legend swatch
    const int ly = kMargin / 2 + 6 * (color_idx - 1);
    canvas.fill_rect(kMargin + 90 * (color_idx - 1), ly, kMargin + 90 * (color_idx - 1) + 18,
                     ly + 3, col.r, col.g, col.b);
  }

  write_png(png_path, canvas);
  write_meta(png_path, meta);
  return canvas.content_hash();
}

uint64_t plot_scatter(const std::string& png_path, const std::string& xlabel,
                      const std::string& ylabel, const std::vector<double>& xs,
                      const std::vector<double>& ys) {
  Canvas canvas(kW, kH);
  double xlo = 0, xhi = 1, ylo = 0, yhi = 1;
  if (!xs.empty()) {
    xlo = *std::min_element(xs.begin(), xs.end());
    xhi = *std::max_element(xs.begin(), xs.end());
    ylo = *std::min_element(ys.begin(), ys.end());
    yhi = *std::max_element(ys.begin(), ys.end());
  }
  if (xlo == xhi) {
    xlo -= 1;
    xhi += 1;
  }
  if (ylo == yhi) {
    ylo -= 1;
    yhi += 1;
  }
  Axes ax{xlo, xhi, ylo, yhi};
  draw_frame(canvas);
  const Rgb col = kPalette[0];
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const int x = ax.px(xs[i]);
    const int y = ax.py(ys[i]);
    canvas.fill_rect(x - 1, y - 1, x + 1, y + 1, col.r, col.g, col.b);
  }
  write_png(png_path, canvas);
  write_meta(png_path, {"plot = scatter", "x = " + xlabel, "y = " + ylabel,
                        "n = " + std::to_string(xs.size()),
                        "x_range = " + util::fmt(xlo) + ".." + util::fmt(xhi),
                        "y_range = " + util::fmt(ylo) + ".." + util::fmt(yhi)});
  return canvas.content_hash();
}

uint64_t plot_heatmap(const std::string& png_path, const std::vector<double>& row_keys,
                      const std::vector<double>& col_keys, const std::vector<double>& values) {
  Canvas canvas(kW, kH);
  const int rows = static_cast<int>(row_keys.size());
  const int cols = static_cast<int>(col_keys.size());
  double lo = 0, hi = 1;
  if (!values.empty()) {
    lo = *std::min_element(values.begin(), values.end());
    hi = *std::max_element(values.begin(), values.end());
  }
  if (lo == hi) hi = lo + 1;
  const int cw = (kW - 2 * kMargin) / std::max(1, cols);
  const int ch = (kH - 2 * kMargin) / std::max(1, rows);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const double v = (values[static_cast<std::size_t>(r * cols + c)] - lo) / (hi - lo);
      // dark blue -> yellow ramp
      const uint8_t rr = static_cast<uint8_t>(40 + 200 * v);
      const uint8_t gg = static_cast<uint8_t>(40 + 180 * v);
      const uint8_t bb = static_cast<uint8_t>(120 - 80 * v);
      canvas.fill_rect(kMargin + c * cw, kMargin + r * ch, kMargin + (c + 1) * cw - 2,
                       kMargin + (r + 1) * ch - 2, rr, gg, bb);
    }
  write_png(png_path, canvas);
  std::vector<std::string> meta = {"plot = heatmap", "value_range = " + util::fmt(lo) + ".." + util::fmt(hi)};
  std::string rk = "rows =";
  for (double v : row_keys) rk += " " + util::fmt(v);
  std::string ck = "cols =";
  for (double v : col_keys) ck += " " + util::fmt(v);
  meta.push_back(rk);
  meta.push_back(ck);
  write_meta(png_path, meta);
  return canvas.content_hash();
}

}  // namespace rtia::eval
