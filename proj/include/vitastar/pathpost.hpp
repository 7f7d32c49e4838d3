#pragma once

#include <string>
#include <vector>

#include "vitastar/gridmap.hpp"

namespace vitastar {

/// Grid-to-world convention, fixed project-wide: x = col, y = -row
/// (image coordinates mapped to a right-handed plane).
inline double world_x(Cell c) { return static_cast<double>(c.col); }
inline double world_y(Cell c) { return -static_cast<double>(c.row); }

struct Pose {
  int row = 0;
  int col = 0;
  double theta = 0.0;  // radians in (-pi, pi]
};

struct PosePath {
  std::vector<Pose> poses;
};

enum class OrientMode {
  /// Interior headings face forward along the path: the planar angle of
  /// the displacement to the next waypoint.
  heading,
  /// Interior angles are acos(v_i . v_{i+1} / (|v_i||v_{i+1}|)) over the
  /// world position vectors of consecutive waypoints, verbatim.
  literal_arccos,
};

/// Adds orientations to a position path. Endpoint orientations are taken
/// from the inputs; interior ones follow the selected mode. Throws
/// ContractError on paths shorter than 2 cells, on consecutive duplicate
/// positions (heading mode) and on zero-length position vectors
/// (literal mode).
PosePath orient(const std::vector<Cell>& path, double start_theta,
                double goal_theta, OrientMode mode = OrientMode::heading);

/// JSON: [{"x":..,"y":..,"theta":..}, ...] in path order.
void export_path_json(const PosePath& path, const std::string& file);
/// CSV: header x,y,theta; one row per pose, 17 significant digits.
void export_path_csv(const PosePath& path, const std::string& file);

}  // namespace vitastar
