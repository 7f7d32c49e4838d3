#pragma once

#include <cmath>
#include <vector>

#include "vitastar/gridmap.hpp"

namespace vitastar {

/// Grid adjacency plus step costs: 1 for cardinal moves, sqrt(2) for
/// diagonal ones. Diagonal moves never cut corners: both adjacent
/// cardinal cells must be free.
struct Connectivity {
  int kind = 8;  // 4 or 8
  double cardinal_cost = 1.0;
  double diagonal_cost = std::sqrt(2.0);

  double step(bool diagonal) const {
    return diagonal ? diagonal_cost : cardinal_cost;
  }
  static Connectivity four() { return Connectivity{4, 1.0, std::sqrt(2.0)}; }
  static Connectivity eight() { return Connectivity{}; }
};

enum class HeuristicKind { zero, octile, manhattan, euclidean };

/// Octile for 8-connected grids, manhattan for 4-connected.
HeuristicKind default_heuristic(const Connectivity& conn);

/// Distance estimate from `a` to `goal`, scaled by the connectivity costs.
double heuristic(HeuristicKind kind, Cell a, Cell goal,
                 const Connectivity& conn);

struct SearchResult {
  std::vector<Cell> path;  // start..goal when found
  double cost = 0.0;
  int64_t expansions = 0;  // selections from the open list
  double wall_time = 0.0;  // seconds, the search call only
  bool found = false;
  std::vector<int32_t> expanded;  // flat cells in selection order
};

/// Classic A*. Open-list order: smallest f, then smallest g, then
/// row-major cell index. Unreachable goals yield found = false.
SearchResult astar(const PlanningProblem& problem, const Connectivity& conn,
                   HeuristicKind h);
inline SearchResult astar(const PlanningProblem& problem,
                          const Connectivity& conn = {}) {
  return astar(problem, conn, default_heuristic(conn));
}

/// Uniform-cost search; the optimality oracle for tests and ground truth.
SearchResult dijkstra(const PlanningProblem& problem,
                      const Connectivity& conn = {});

/// Binary map marking exactly the path cells of a found result.
PathMap reconstruct_pathmap(const SearchResult& result, int height, int width);

}  // namespace vitastar
