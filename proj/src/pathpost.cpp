#include "vitastar/pathpost.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"

namespace vitastar {

namespace {

constexpr double kPi = 3.14159265358979323846;

double normalize_angle(double theta) {
  // into (-pi, pi]
  while (theta > kPi) theta -= 2.0 * kPi;
  while (theta <= -kPi) theta += 2.0 * kPi;
  return theta;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.16e", v);
  return buf;
}

}  // namespace

PosePath orient(const std::vector<Cell>& path, double start_theta,
                double goal_theta, OrientMode mode) {
  if (path.size() < 2) {
    throw ContractError("orientation filter needs at least two waypoints");
  }
  PosePath out;
  out.poses.reserve(path.size());
  for (size_t i = 0; i < path.size(); ++i) {
    Pose pose;
    pose.row = path[i].row;
    pose.col = path[i].col;
    if (i == 0) {
      pose.theta = normalize_angle(start_theta);
    } else if (i + 1 == path.size()) {
      pose.theta = normalize_angle(goal_theta);
    } else {
      const Cell cur = path[i];
      const Cell nxt = path[i + 1];
      if (mode == OrientMode::heading) {
        const double dx = world_x(nxt) - world_x(cur);
        const double dy = world_y(nxt) - world_y(cur);
        if (dx == 0.0 && dy == 0.0) {
          throw ContractError("degenerate segment: duplicate waypoint at " +
                              std::to_string(i));
        }
        pose.theta = normalize_angle(std::atan2(dy, dx));
      } else {
        const double ax = world_x(cur), ay = world_y(cur);
        const double bx = world_x(nxt), by = world_y(nxt);
        const double na = std::hypot(ax, ay), nb = std::hypot(bx, by);
        if (na == 0.0 || nb == 0.0) {
          throw ContractError(
              "degenerate segment: zero-length position vector at " +
              std::to_string(i));
        }
        const double cosv =
            std::clamp((ax * bx + ay * by) / (na * nb), -1.0, 1.0);
        pose.theta = std::acos(cosv);
      }
    }
    out.poses.push_back(pose);
  }
  return out;
}

void export_path_json(const PosePath& path, const std::string& file) {
  nlohmann::json j = nlohmann::json::array();
  for (const Pose& p : path.poses) {
    j.push_back({{"x", world_x({p.row, p.col})},
                 {"y", world_y({p.row, p.col})},
                 {"theta", p.theta}});
  }
  std::ofstream out(file);
  if (!out) throw IoError("cannot write " + file);
  out << j.dump(2) << "\n";
}

void export_path_csv(const PosePath& path, const std::string& file) {
  std::ofstream out(file);
  if (!out) throw IoError("cannot write " + file);
  out << "x,y,theta\n";
  for (const Pose& p : path.poses) {
    out << fmt_double(world_x({p.row, p.col})) << ","
        << fmt_double(world_y({p.row, p.col})) << "," << fmt_double(p.theta)
        << "\n";
  }
  if (!out) throw IoError("write failed for " + file);
}

}  // namespace vitastar
