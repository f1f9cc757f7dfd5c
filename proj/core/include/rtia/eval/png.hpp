#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rtia::eval {

// Tiny RGB raster with the drawing primitives the plot kit needs.
struct Canvas {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> rgb;

  Canvas(int w, int h, uint8_t r = 255, uint8_t g = 255, uint8_t b = 255);

  void set(int x, int y, uint8_t r, uint8_t g, uint8_t b);
  void fill_rect(int x0, int y0, int x1, int y1, uint8_t r, uint8_t g, uint8_t b);
  void line(int x0, int y0, int x1, int y1, uint8_t r, uint8_t g, uint8_t b);

  // Hash of the raster bytes (not the encoded file), for golden checks.
  uint64_t content_hash() const;
};

// 8-bit truecolor PNG via zlib; deterministic bytes for a given raster.
void write_png(const std::string& path, const Canvas& canvas);

}  // namespace rtia::eval
