#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vitastar/errors.hpp"
#include "vitastar/tensor.hpp"

namespace vitastar {

struct Cell {
  int row = 0;
  int col = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

/// Binary occupancy grid: 1 = obstacle, 0 = free. Immutable after setup.
class OccupancyMap {
 public:
  OccupancyMap() = default;
  OccupancyMap(int height, int width, uint8_t fill = 0);
  OccupancyMap(int height, int width, std::vector<uint8_t> cells);

  int height() const { return height_; }
  int width() const { return width_; }
  int64_t cell_count() const { return static_cast<int64_t>(cells_.size()); }

  bool in_bounds(Cell c) const {
    return c.row >= 0 && c.row < height_ && c.col >= 0 && c.col < width_;
  }
  uint8_t at(int row, int col) const { return cells_[index(row, col)]; }
  uint8_t at(Cell c) const { return at(c.row, c.col); }
  bool blocked(Cell c) const { return at(c) != 0; }
  bool free(Cell c) const { return at(c) == 0; }
  void set(int row, int col, uint8_t v) { cells_[index(row, col)] = v; }

  int64_t index(int row, int col) const {
    return static_cast<int64_t>(row) * width_ + col;
  }
  int64_t index(Cell c) const { return index(c.row, c.col); }
  Cell cell(int64_t flat) const {
    return Cell{static_cast<int>(flat / width_),
                static_cast<int>(flat % width_)};
  }

  const std::vector<uint8_t>& cells() const { return cells_; }
  double diagonal() const;
  int64_t count_free() const;
  friend bool operator==(const OccupancyMap&, const OccupancyMap&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<uint8_t> cells_;
};

/// Per-cell obstacle probability in [0, 100], occupancy-grid style.
struct ProbabilisticGrid {
  int height = 0;
  int width = 0;
  std::vector<int> probs;
};

/// Binary map marking the cells of one path.
class PathMap {
 public:
  PathMap() = default;
  PathMap(int height, int width) : height_(height), width_(width) {
    cells_.assign(static_cast<size_t>(height) * width, 0);
  }
  /// Marks the given ordered path; the cells must form a chain of
  /// 8-connected steps.
  PathMap(int height, int width, const std::vector<Cell>& path);

  int height() const { return height_; }
  int width() const { return width_; }
  uint8_t at(Cell c) const {
    return cells_[static_cast<size_t>(c.row) * width_ + c.col];
  }
  void mark(Cell c) { cells_[static_cast<size_t>(c.row) * width_ + c.col] = 1; }
  const std::vector<uint8_t>& cells() const { return cells_; }
  int64_t marked_count() const;
  friend bool operator==(const PathMap&, const PathMap&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<uint8_t> cells_;
};

/// One planning query: map, endpoints and (for training) the wanted path.
/// truth_path keeps the ordered cells behind the truth map so the problem
/// can round-trip through its file format.
struct PlanningProblem {
  std::shared_ptr<const OccupancyMap> map;
  Cell start;
  Cell goal;
  std::optional<PathMap> truth;
  std::optional<std::vector<Cell>> truth_path;
};

/// Validates start/goal are distinct in-bounds free cells.
void validate_problem(const PlanningProblem& problem);

/// Visit grid neighbors of `c` that are in bounds and free. For
/// connectivity 8 a diagonal step requires both adjacent cardinal cells
/// free (no corner cutting) when forbid_corner_cut is set.
/// f(Cell neighbor, bool diagonal).
template <typename F>
void visit_neighbors(const OccupancyMap& map, Cell c, int connectivity,
                     bool forbid_corner_cut, F&& f) {
  static constexpr int kCard[4][2] = {{-1, 0}, {0, -1}, {0, 1}, {1, 0}};
  static constexpr int kDiag[4][2] = {{-1, -1}, {-1, 1}, {1, -1}, {1, 1}};
  for (const auto& d : kCard) {
    Cell n{c.row + d[0], c.col + d[1]};
    if (map.in_bounds(n) && map.free(n)) f(n, false);
  }
  if (connectivity == 8) {
    for (const auto& d : kDiag) {
      Cell n{c.row + d[0], c.col + d[1]};
      if (!map.in_bounds(n) || map.blocked(n)) continue;
      if (forbid_corner_cut) {
        Cell a{c.row + d[0], c.col};
        Cell b{c.row, c.col + d[1]};
        if (map.blocked(a) || map.blocked(b)) continue;
      }
      f(n, true);
    }
  }
}

/// cell = 1 iff p >= t. Threshold must lie in [0, 100].
OccupancyMap from_probabilistic(const ProbabilisticGrid& grid, int threshold);

/// True when `b` can be reached from `a` by free cells.
bool reachable(const OccupancyMap& map, Cell a, Cell b, int connectivity = 8,
               bool forbid_corner_cut = true);

/// Bernoulli obstacle map re-rolled until at least two free cells exist.
OccupancyMap random_map(int height, int width, double density, Rng& rng);

struct SampleOptions {
  double min_separation = 0.5;  // fraction of the map diagonal
  int connectivity = 8;
  int max_retries = 10000;
};

/// Random start/goal on free, mutually reachable cells separated by at
/// least min_separation * diagonal. Deterministic under a fixed rng seed.
PlanningProblem sample_problem(std::shared_ptr<const OccupancyMap> map,
                               Rng& rng, const SampleOptions& opt = {});

// --- file formats ---

ProbabilisticGrid load_probabilistic(const std::string& path);
void save_probabilistic(const ProbabilisticGrid& grid,
                        const std::string& path);

/// Problem JSON: {map_path, start: [r,c], goal: [r,c],
/// truth_path: optional [[r,c],...]}. map_path resolves relative to the
/// problem file's directory.
PlanningProblem load_problem(const std::string& path);
void save_problem(const PlanningProblem& problem, const std::string& path,
                  const std::string& map_path);

}  // namespace vitastar
