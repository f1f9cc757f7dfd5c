#pragma once

#include <map>
#include <string>
#include <vector>

#include "rtia/eval/png.hpp"

namespace rtia::eval {

// All plots write a PNG plus a .meta.txt sidecar naming series, axis ranges
// and any windowing choices; comparisons hash the raster, not the file.

// Per-method mean terminal-reward curve across seeds, shaded mean +- 0.1*std.
// by_method: method -> per-seed vectors of per-episode terminal rewards.
uint64_t plot_learning_curves(const std::string& png_path,
                              const std::map<std::string, std::vector<std::vector<double>>>& by_method);

uint64_t plot_scatter(const std::string& png_path, const std::string& xlabel,
                      const std::string& ylabel, const std::vector<double>& xs,
                      const std::vector<double>& ys);

uint64_t plot_heatmap(const std::string& png_path, const std::vector<double>& row_keys,
                      const std::vector<double>& col_keys, const std::vector<double>& values);

}  // namespace rtia::eval
