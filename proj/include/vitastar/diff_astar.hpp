#pragma once

#include <memory>
#include <vector>

#include "vitastar/astar.hpp"
#include "vitastar/tensor.hpp"

namespace vitastar {

/// Strictly positive per-cell traversal costs aligned with a map.
/// Replaces the unit grid costs in the guided search.
struct GuidanceMap {
  int height = 0;
  int width = 0;
  Tensor costs;  // shape {height, width}, every entry > 0

  static GuidanceMap uniform(int height, int width, double value = 1.0);
  void validate() const;
  double min_cost() const;
};

/// Denominator of the history/truth mismatch loss.
enum class HistoryNormalizer {
  map_cells,        // H*W, a per-cell mean
  selection_steps,  // number of node selections
};

struct DiffSearchOptions {
  /// Soft-selection temperature; <= 0 picks sqrt(map width).
  double tau = 0.0;
  Connectivity conn{};
  /// Record the gradient tape (training); otherwise run inference-only.
  bool record = false;
  /// Graph to record onto; search allocates one when absent. Pass the
  /// graph the guidance map was produced on to train through it.
  std::shared_ptr<Graph> graph;
  HistoryNormalizer normalizer = HistoryNormalizer::map_cells;
};

/// Everything one guided search produced. In record mode `selections`
/// holds the per-step straight-through one-hots and `history` is a graph
/// node; in inference mode both are plain values.
struct SearchTrace {
  std::vector<Tensor> selections;       // record mode only
  Tensor history;                       // accumulated selection map P
  std::vector<int32_t> selection_order;  // flat cell per step
  std::vector<int32_t> parents;          // per-cell backpointer, -1 = none
  int64_t expansions = 0;
  bool found = false;
  double goal_cost = 0.0;  // accumulated guidance cost at the goal
  double wall_time = 0.0;
  int height = 0;
  int width = 0;
  Cell start;
  Cell goal;
  double tau = 0.0;
  HistoryNormalizer normalizer = HistoryNormalizer::map_cells;
  std::shared_ptr<Graph> graph;  // present in record mode
};

/// Guided search: per step the open node minimizing accumulated guidance
/// cost plus heuristic is selected (soft normalized weights carry the
/// gradient), expanded, and its neighbors relaxed. The heuristic is the
/// octile distance scaled by the minimum guidance value, which keeps it
/// admissible for any positive guidance. Runs until the goal is selected
/// or the open list empties (found = false, no exception).
SearchTrace search(const PlanningProblem& problem, const GuidanceMap& guidance,
                   const DiffSearchOptions& options = {});

/// One soft node-selection step over explicit matrices:
/// soft = exp(-(G+H)/tau) .* O / <exp(-(G+H)/tau), O>, returned as a
/// one-hot at the soft argmax (ties to the smaller row-major index);
/// the backward pass treats the one-hot as the soft weights. Writes the
/// selected flat index to *selected when given.
Tensor select_node(Graph& graph, const Tensor& G, const Tensor& H,
                   const Tensor& O, double tau, int64_t* selected = nullptr);

/// Mean L1 mismatch between the accumulated selection history and the
/// truth path map: |P - truth|_1 / normalizer. Differentiable through the
/// recorded selections in record mode.
Tensor loss(const SearchTrace& trace, const PathMap& truth);

/// Follows parent links goal -> start. Requires a found trace.
SearchResult backtrack(const SearchTrace& trace,
                       const PlanningProblem& problem);

}  // namespace vitastar
