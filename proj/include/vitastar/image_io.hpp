#pragma once

#include <string>

#include "vitastar/gridmap.hpp"

namespace vitastar {

/// Reads an 8-bit grayscale PGM (P5) or PNG into an occupancy map:
/// pixel < obstacle_cutoff becomes an obstacle. Dimensions are preserved.
OccupancyMap load_image(const std::string& path, int obstacle_cutoff = 128);

/// Writes a map as binary PGM: free = 255, obstacle = 0.
void save_pgm(const OccupancyMap& map, const std::string& path);

/// 8-bit RGB image buffer for rendered overlays.
struct RgbImage {
  int height = 0;
  int width = 0;
  std::vector<uint8_t> pixels;  // row-major, 3 bytes per pixel

  RgbImage() = default;
  RgbImage(int h, int w, uint8_t r, uint8_t g, uint8_t b);
  void set(int row, int col, uint8_t r, uint8_t g, uint8_t b);
};

void save_png(const RgbImage& image, const std::string& path);

}  // namespace vitastar
