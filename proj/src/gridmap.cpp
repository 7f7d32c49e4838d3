#include "vitastar/gridmap.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "vitastar/image_io.hpp"

namespace vitastar {

namespace {

std::vector<Cell> free_cells(const OccupancyMap& map) {
  std::vector<Cell> out;
  for (int r = 0; r < map.height(); ++r)
    for (int c = 0; c < map.width(); ++c)
      if (map.free({r, c})) out.push_back({r, c});
  return out;
}

}  // namespace

OccupancyMap::OccupancyMap(int height, int width, uint8_t fill)
    : height_(height), width_(width) {
  if (height <= 0 || width <= 0) {
    throw ParameterError("map dimensions must be positive");
  }
  if (fill > 1) throw ParameterError("occupancy values must be 0 or 1");
  cells_.assign(static_cast<size_t>(height) * width, fill);
}

OccupancyMap::OccupancyMap(int height, int width, std::vector<uint8_t> cells)
    : height_(height), width_(width), cells_(std::move(cells)) {
  if (height <= 0 || width <= 0) {
    throw ParameterError("map dimensions must be positive");
  }
  if (cells_.size() != static_cast<size_t>(height) * width) {
    throw DimensionError("cell buffer does not match map dimensions");
  }
  for (uint8_t v : cells_) {
    if (v > 1) throw ParameterError("occupancy values must be 0 or 1");
  }
}

double OccupancyMap::diagonal() const {
  return std::hypot(static_cast<double>(height_), static_cast<double>(width_));
}

int64_t OccupancyMap::count_free() const {
  return std::count(cells_.begin(), cells_.end(), uint8_t{0});
}

PathMap::PathMap(int height, int width, const std::vector<Cell>& path)
    : PathMap(height, width) {
  for (size_t i = 0; i < path.size(); ++i) {
    const Cell c = path[i];
    if (c.row < 0 || c.row >= height || c.col < 0 || c.col >= width) {
      throw ContractError("path cell outside map dimensions");
    }
    if (i > 0) {
      const int dr = std::abs(c.row - path[i - 1].row);
      const int dc = std::abs(c.col - path[i - 1].col);
      if (dr > 1 || dc > 1 || (dr == 0 && dc == 0)) {
        throw ContractError("path cells must form an 8-connected chain");
      }
    }
    mark(c);
  }
}

int64_t PathMap::marked_count() const {
  return std::count(cells_.begin(), cells_.end(), uint8_t{1});
}

void validate_problem(const PlanningProblem& problem) {
  if (!problem.map) throw ContractError("problem has no map");
  const OccupancyMap& m = *problem.map;
  if (!m.in_bounds(problem.start) || !m.in_bounds(problem.goal)) {
    throw ContractError("start or goal outside the map");
  }
  if (m.blocked(problem.start) || m.blocked(problem.goal)) {
    throw ContractError("start or goal on an obstacle");
  }
  if (problem.start == problem.goal) {
    throw ContractError("start equals goal");
  }
}

OccupancyMap from_probabilistic(const ProbabilisticGrid& grid, int threshold) {
  if (threshold < 0 || threshold > 100) {
    throw ParameterError("occupancy threshold must lie in [0, 100]");
  }
  if (grid.probs.size() != static_cast<size_t>(grid.height) * grid.width) {
    throw DimensionError("probability buffer does not match grid dimensions");
  }
  std::vector<uint8_t> cells(grid.probs.size());
  for (size_t i = 0; i < grid.probs.size(); ++i) {
    const int p = grid.probs[i];
    if (p < 0 || p > 100) {
      throw ParameterError("obstacle probability outside [0, 100]");
    }
    cells[i] = p >= threshold ? 1 : 0;
  }
  return OccupancyMap(grid.height, grid.width, std::move(cells));
}

bool reachable(const OccupancyMap& map, Cell a, Cell b, int connectivity,
               bool forbid_corner_cut) {
  if (!map.in_bounds(a) || !map.in_bounds(b)) return false;
  if (map.blocked(a) || map.blocked(b)) return false;
  if (a == b) return true;
  std::vector<uint8_t> seen(map.cell_count(), 0);
  std::deque<Cell> queue{a};
  seen[map.index(a)] = 1;
  while (!queue.empty()) {
    const Cell c = queue.front();
    queue.pop_front();
    bool found = false;
    visit_neighbors(map, c, connectivity, forbid_corner_cut,
                    [&](Cell n, bool) {
                      if (n == b) found = true;
                      if (!seen[map.index(n)]) {
                        seen[map.index(n)] = 1;
                        queue.push_back(n);
                      }
                    });
    if (found) return true;
  }
  return false;
}

OccupancyMap random_map(int height, int width, double density, Rng& rng) {
  if (density < 0.0 || density >= 1.0) {
    throw ParameterError("obstacle density must lie in [0, 1)");
  }
  for (int attempt = 0; attempt < 100; ++attempt) {
    OccupancyMap m(height, width);
    for (int r = 0; r < height; ++r)
      for (int c = 0; c < width; ++c)
        if (rng.uniform() < density) m.set(r, c, 1);
    if (m.count_free() >= 2) return m;
  }
  throw GenerationExhaustedError("could not draw a map with two free cells");
}

PlanningProblem sample_problem(std::shared_ptr<const OccupancyMap> map,
                               Rng& rng, const SampleOptions& opt) {
  if (!map) throw ContractError("sample_problem needs a map");
  const auto free = free_cells(*map);
  if (free.size() < 2) {
    throw GenerationExhaustedError("map has fewer than two free cells");
  }
  const double min_dist = opt.min_separation * map->diagonal();
  for (int attempt = 0; attempt < opt.max_retries; ++attempt) {
    const Cell s = free[rng.below(static_cast<int64_t>(free.size()))];
    const Cell g = free[rng.below(static_cast<int64_t>(free.size()))];
    if (s == g) continue;
    const double dist = std::hypot(static_cast<double>(s.row - g.row),
                                   static_cast<double>(s.col - g.col));
    if (dist < min_dist) continue;
    // disconnected pairs are resampled; completeness assumes none remain
    if (!reachable(*map, s, g, opt.connectivity)) continue;
    return PlanningProblem{std::move(map), s, g, std::nullopt};
  }
  throw GenerationExhaustedError(
      "no valid start/goal pair after " + std::to_string(opt.max_retries) +
      " retries (separation " + std::to_string(min_dist) + " cells)");
}

ProbabilisticGrid load_probabilistic(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad probabilistic grid JSON in " + path + ": " + e.what());
  }
  ProbabilisticGrid grid;
  try {
    grid.height = j.at("height").get<int>();
    grid.width = j.at("width").get<int>();
    grid.probs = j.at("probs").get<std::vector<int>>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad probabilistic grid fields in " + path + ": " +
                  e.what());
  }
  return grid;
}

void save_probabilistic(const ProbabilisticGrid& grid,
                        const std::string& path) {
  nlohmann::json j{
      {"height", grid.height}, {"width", grid.width}, {"probs", grid.probs}};
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(2) << "\n";
}

PlanningProblem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad problem JSON in " + path + ": " + e.what());
  }
  PlanningProblem p;
  try {
    const auto map_path = j.at("map_path").get<std::string>();
    const auto resolved =
        std::filesystem::path(path).parent_path() / map_path;
    p.map = std::make_shared<OccupancyMap>(load_image(resolved.string()));
    p.start = Cell{j.at("start").at(0).get<int>(),
                   j.at("start").at(1).get<int>()};
    p.goal =
        Cell{j.at("goal").at(0).get<int>(), j.at("goal").at(1).get<int>()};
    if (j.contains("truth_path")) {
      std::vector<Cell> cells;
      for (const auto& rc : j.at("truth_path")) {
        cells.push_back(Cell{rc.at(0).get<int>(), rc.at(1).get<int>()});
      }
      p.truth = PathMap(p.map->height(), p.map->width(), cells);
      p.truth_path = std::move(cells);
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad problem fields in " + path + ": " + e.what());
  }
  validate_problem(p);
  return p;
}

void save_problem(const PlanningProblem& problem, const std::string& path,
                  const std::string& map_path) {
  nlohmann::json j;
  j["map_path"] = map_path;
  j["start"] = {problem.start.row, problem.start.col};
  j["goal"] = {problem.goal.row, problem.goal.col};
  if (problem.truth_path) {
    nlohmann::json cells = nlohmann::json::array();
    for (const Cell& c : *problem.truth_path) cells.push_back({c.row, c.col});
    j["truth_path"] = cells;
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(2) << "\n";
}

}  // namespace vitastar
