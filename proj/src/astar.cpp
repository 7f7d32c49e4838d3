#include "vitastar/astar.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <queue>

namespace vitastar {

namespace {

struct OpenEntry {
  double f;
  double g;
  int64_t idx;
};

struct EntryAfter {
  bool operator()(const OpenEntry& a, const OpenEntry& b) const {
    if (a.f != b.f) return a.f > b.f;
    if (a.g != b.g) return a.g > b.g;
    return a.idx > b.idx;
  }
};

}  // namespace

HeuristicKind default_heuristic(const Connectivity& conn) {
  return conn.kind == 8 ? HeuristicKind::octile : HeuristicKind::manhattan;
}

double heuristic(HeuristicKind kind, Cell a, Cell goal,
                 const Connectivity& conn) {
  const double dr = std::abs(a.row - goal.row);
  const double dc = std::abs(a.col - goal.col);
  switch (kind) {
    case HeuristicKind::zero:
      return 0.0;
    case HeuristicKind::octile: {
      const double lo = std::min(dr, dc);
      return conn.cardinal_cost * (std::max(dr, dc) - lo) +
             conn.diagonal_cost * lo;
    }
    case HeuristicKind::manhattan:
      return conn.cardinal_cost * (dr + dc);
    case HeuristicKind::euclidean:
      return conn.cardinal_cost * std::hypot(dr, dc);
  }
  return 0.0;
}

SearchResult astar(const PlanningProblem& problem, const Connectivity& conn,
                   HeuristicKind hkind) {
  validate_problem(problem);
  if (conn.kind != 4 && conn.kind != 8) {
    throw ParameterError("connectivity must be 4 or 8");
  }
  const OccupancyMap& map = *problem.map;
  const auto t0 = std::chrono::steady_clock::now();

  const int64_t n = map.cell_count();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> g(n, kInf);
  std::vector<int64_t> parent(n, -1);
  std::vector<uint8_t> closed(n, 0);
  std::priority_queue<OpenEntry, std::vector<OpenEntry>, EntryAfter> open;

  const int64_t start = map.index(problem.start);
  const int64_t goal = map.index(problem.goal);
  g[start] = 0.0;
  open.push({heuristic(hkind, problem.start, problem.goal, conn), 0.0, start});

  SearchResult result;
  while (!open.empty()) {
    const OpenEntry top = open.top();
    open.pop();
    if (closed[top.idx] || top.g != g[top.idx]) continue;  // stale entry
    closed[top.idx] = 1;
    ++result.expansions;
    result.expanded.push_back(static_cast<int32_t>(top.idx));
    if (top.idx == goal) {
      result.found = true;
      break;
    }
    const Cell c = map.cell(top.idx);
    visit_neighbors(map, c, conn.kind, /*forbid_corner_cut=*/true,
                    [&](Cell nb, bool diagonal) {
                      const int64_t ni = map.index(nb);
                      if (closed[ni]) return;
                      const double cand = g[top.idx] + conn.step(diagonal);
                      if (cand < g[ni]) {
                        g[ni] = cand;
                        parent[ni] = top.idx;
                        open.push({cand + heuristic(hkind, nb, problem.goal,
                                                    conn),
                                   cand, ni});
                      }
                    });
  }

  if (result.found) {
    result.cost = g[goal];
    for (int64_t at = goal; at != -1; at = parent[at]) {
      result.path.push_back(map.cell(at));
    }
    std::reverse(result.path.begin(), result.path.end());
  }
  result.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return result;
}

SearchResult dijkstra(const PlanningProblem& problem,
                      const Connectivity& conn) {
  return astar(problem, conn, HeuristicKind::zero);
}

PathMap reconstruct_pathmap(const SearchResult& result, int height,
                            int width) {
  if (!result.found) {
    throw ContractError("reconstruct_pathmap on a failed search");
  }
  return PathMap(height, width, result.path);
}

}  // namespace vitastar
