#include "vitastar/render.hpp"

namespace vitastar {

RgbImage render_overlay(const OccupancyMap& map, const SearchResult& result,
                        Cell start, Cell goal) {
  RgbImage img(map.height(), map.width(), 255, 255, 255);
  for (int r = 0; r < map.height(); ++r) {
    for (int c = 0; c < map.width(); ++c) {
      if (map.blocked({r, c})) img.set(r, c, 0, 0, 0);
    }
  }
  for (int32_t idx : result.expanded) {
    const Cell c = map.cell(idx);
    img.set(c.row, c.col, 64, 200, 64);
  }
  for (const Cell& c : result.path) {
    img.set(c.row, c.col, 220, 32, 32);
  }
  img.set(start.row, start.col, 32, 32, 255);
  img.set(goal.row, goal.col, 220, 32, 220);
  return img;
}

}  // namespace vitastar
