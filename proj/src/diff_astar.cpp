#include "vitastar/diff_astar.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cmath>
#include <limits>
#include <queue>

namespace vitastar {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct OpenEntry {
  double f;
  int64_t idx;
};

struct EntryAfter {
  bool operator()(const OpenEntry& a, const OpenEntry& b) const {
    if (a.f != b.f) return a.f > b.f;
    return a.idx > b.idx;
  }
};

}  // namespace

GuidanceMap GuidanceMap::uniform(int height, int width, double value) {
  return GuidanceMap{height, width,
                     Tensor::full({height, width}, value)};
}

void GuidanceMap::validate() const {
  if (!costs.defined() || costs.shape().size() != 2 ||
      costs.shape()[0] != height || costs.shape()[1] != width) {
    throw DimensionError("guidance tensor does not match its dimensions");
  }
  for (double v : costs.data()) {
    if (!(v > 0.0)) {
      throw ContractError("guidance costs must be strictly positive");
    }
  }
}

double GuidanceMap::min_cost() const {
  double m = kInf;
  for (double v : costs.data()) m = std::min(m, v);
  return m;
}

Tensor select_node(Graph& graph, const Tensor& G, const Tensor& H,
                   const Tensor& O, double tau, int64_t* selected) {
  const Tensor scores = graph.add(G, H);
  const Tensor soft = graph.masked_softmax(scores, O, tau);
  // argmax of the soft weights == argmin of the masked scores, with ties
  // resolved to the smaller row-major index in both views
  int64_t best = -1;
  double best_score = kInf;
  auto sd = scores.data();
  auto od = O.data();
  for (int64_t i = 0; i < scores.size(); ++i) {
    if (od[i] == 1.0 && sd[i] < best_score) {
      best_score = sd[i];
      best = i;
    }
  }
  if (best < 0) throw EmptyOpenListError("select_node with no open cell");
  if (selected) *selected = best;
  return graph.straight_through(soft, best);
}

SearchTrace search(const PlanningProblem& problem, const GuidanceMap& guidance,
                   const DiffSearchOptions& options) {
  validate_problem(problem);
  const OccupancyMap& map = *problem.map;
  if (guidance.height != map.height() || guidance.width != map.width()) {
    throw DimensionError("guidance dimensions do not match the map");
  }
  guidance.validate();
  if (options.conn.kind != 4 && options.conn.kind != 8) {
    throw ParameterError("connectivity must be 4 or 8");
  }

  const auto t0 = std::chrono::steady_clock::now();
  const int64_t n = map.cell_count();
  const double tau =
      options.tau > 0.0 ? options.tau : std::sqrt(double(map.width()));

  SearchTrace trace;
  trace.height = map.height();
  trace.width = map.width();
  trace.start = problem.start;
  trace.goal = problem.goal;
  trace.tau = tau;
  trace.normalizer = options.normalizer;
  trace.parents.assign(n, -1);

  const bool record = options.record;
  std::shared_ptr<Graph> graph = options.graph;
  if (record && !graph) graph = std::make_shared<Graph>();
  if (record) trace.graph = graph;

  // Heuristic: octile (or manhattan for 4-connected) scaled by the
  // minimum guidance cost. Constant for the whole search; carries no
  // gradient.
  const double min_guid = guidance.min_cost();
  const HeuristicKind hkind = default_heuristic(options.conn);
  std::vector<double> h(n);
  for (int64_t i = 0; i < n; ++i) {
    h[i] = min_guid *
           heuristic(hkind, map.cell(i), problem.goal, options.conn);
  }

  auto guid = guidance.costs.data();
  std::vector<double> g(n, kInf);
  std::vector<uint8_t> open_mask(n, 0);
  std::vector<uint8_t> closed(n, 0);
  std::priority_queue<OpenEntry, std::vector<OpenEntry>, EntryAfter> open;

  // Per-cell graph nodes holding the accumulated guidance cost, so the
  // soft selection scores stay differentiable w.r.t. the guidance map.
  std::vector<Tensor> gnode;
  Tensor h_leaf, history;
  if (record) {
    gnode.resize(n);
    h_leaf = Tensor({map.height(), map.width()}, h);
    history = Tensor::zeros({map.height(), map.width()});
  } else {
    history = Tensor::zeros({map.height(), map.width()});
  }

  const int64_t start = map.index(problem.start);
  const int64_t goal = map.index(problem.goal);
  g[start] = 0.0;
  if (record) gnode[start] = Tensor::zeros({1});

  int64_t open_count = 0;
  // The start cell is expanded up front; selections then draw from the
  // open list it seeds, so the first recorded selection is a frontier
  // node, not the start.
  closed[start] = 1;
  visit_neighbors(
      map, problem.start, options.conn.kind, /*forbid_corner_cut=*/true,
      [&](Cell nb, bool diagonal) {
        const int64_t ni = map.index(nb);
        const double cand = guid[ni] * options.conn.step(diagonal);
        if (cand < g[ni]) {
          if (!open_mask[ni]) {
            open_mask[ni] = 1;
            ++open_count;
          }
          g[ni] = cand;
          trace.parents[ni] = static_cast<int32_t>(start);
          open.push({cand + h[ni], ni});
          if (record) {
            gnode[ni] = graph->add(
                gnode[start],
                graph->scale(graph->gather(guidance.costs, ni), diagonal
                                 ? options.conn.diagonal_cost
                                 : options.conn.cardinal_cost));
          }
        }
      });

  while (open_count > 0) {
    // pop the open cell with minimal g+h, ties to the smaller index
    int64_t sel = -1;
    while (!open.empty()) {
      const OpenEntry top = open.top();
      if (!open_mask[top.idx] || top.f != g[top.idx] + h[top.idx]) {
        open.pop();  // stale
        continue;
      }
      sel = top.idx;
      open.pop();
      break;
    }
    if (sel < 0) break;

    if (record) {
      // Matrix form of the selection: assemble the accumulated-cost
      // matrix over open cells, soft-select, pass through.
      std::vector<std::pair<int64_t, Tensor>> entries;
      std::vector<double> mask(n, 0.0);
      for (int64_t i = 0; i < n; ++i) {
        if (open_mask[i]) {
          entries.emplace_back(i, gnode[i]);
          mask[i] = 1.0;
        }
      }
      const Tensor G =
          graph->assemble({map.height(), map.width()}, entries);
      const Tensor O = Tensor({map.height(), map.width()}, std::move(mask));
      int64_t matrix_sel = -1;
      Tensor onehot = select_node(*graph, G, h_leaf, O, tau, &matrix_sel);
      // same arithmetic, same tie rule: the matrix-form pick matches the
      // heap pick bit for bit
      assert(matrix_sel == sel);
      sel = matrix_sel;
      trace.selections.push_back(onehot);
      history = graph->add(history, onehot);
    } else {
      history.data()[sel] += 1.0;
    }

    open_mask[sel] = 0;
    closed[sel] = 1;
    --open_count;
    trace.selection_order.push_back(static_cast<int32_t>(sel));
    ++trace.expansions;
    if (sel == goal) {
      trace.found = true;
      break;
    }

    const Cell c = map.cell(sel);
    visit_neighbors(
        map, c, options.conn.kind, /*forbid_corner_cut=*/true,
        [&](Cell nb, bool diagonal) {
          const int64_t ni = map.index(nb);
          if (closed[ni]) return;
          const double step = options.conn.step(diagonal);
          const double cand = g[sel] + guid[ni] * step;
          if (cand < g[ni]) {
            if (!open_mask[ni]) {
              open_mask[ni] = 1;
              ++open_count;
            }
            g[ni] = cand;
            trace.parents[ni] = static_cast<int32_t>(sel);
            open.push({cand + h[ni], ni});
            if (record) {
              gnode[ni] = graph->add(
                  gnode[sel],
                  graph->scale(graph->gather(guidance.costs, ni), step));
            }
          }
        });
  }

  trace.history = history;
  if (trace.found) trace.goal_cost = g[goal];
  trace.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return trace;
}

Tensor loss(const SearchTrace& trace, const PathMap& truth) {
  if (truth.height() != trace.height || truth.width() != trace.width) {
    throw DimensionError("truth map dimensions do not match the trace");
  }
  double norm = 0.0;
  switch (trace.normalizer) {
    case HistoryNormalizer::map_cells:
      norm = static_cast<double>(trace.height) * trace.width;
      break;
    case HistoryNormalizer::selection_steps:
      norm = static_cast<double>(
          std::max<int64_t>(1, trace.selection_order.size()));
      break;
  }
  std::vector<double> truth_vals(truth.cells().begin(), truth.cells().end());
  Tensor truth_leaf({trace.height, trace.width}, std::move(truth_vals));
  if (trace.graph) {
    Graph& g = *trace.graph;
    return g.div_scalar(g.sum(g.abs(g.sub(trace.history, truth_leaf))), norm);
  }
  double acc = 0.0;
  auto hd = trace.history.data();
  auto td = truth_leaf.data();
  for (int64_t i = 0; i < trace.history.size(); ++i) {
    acc += std::fabs(hd[i] - td[i]);
  }
  return Tensor::scalar(acc / norm);
}

SearchResult backtrack(const SearchTrace& trace,
                       const PlanningProblem& problem) {
  if (!trace.found) {
    throw ContractError("backtrack on a trace that never reached the goal");
  }
  const OccupancyMap& map = *problem.map;
  SearchResult result;
  result.found = true;
  result.cost = trace.goal_cost;
  result.expansions = trace.expansions;
  result.wall_time = trace.wall_time;
  result.expanded = trace.selection_order;
  for (int64_t at = map.index(problem.goal); at != -1;
       at = trace.parents[at]) {
    result.path.push_back(map.cell(at));
  }
  std::reverse(result.path.begin(), result.path.end());
  return result;
}

}  // namespace vitastar
