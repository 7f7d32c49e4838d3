#pragma once

#include "vitastar/astar.hpp"
#include "vitastar/image_io.hpp"

namespace vitastar {

/// Map overlay: free cells white, obstacles black, expanded cells green,
/// path red, start blue, goal magenta. Dimensions match the map.
RgbImage render_overlay(const OccupancyMap& map, const SearchResult& result,
                        Cell start, Cell goal);

}  // namespace vitastar
