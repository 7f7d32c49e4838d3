#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "vitastar/astar.hpp"
#include "vitastar/diff_astar.hpp"
#include "vitastar/vit.hpp"

namespace vitastar {

/// A named planning strategy the harness can time.
struct Planner {
  std::string name;
  std::function<SearchResult(const PlanningProblem&)> plan;
};

Planner make_classic_planner(const Connectivity& conn = {},
                             HeuristicKind h = HeuristicKind::octile);
/// Guided search over an all-ones guidance map.
Planner make_uniform_planner(const Connectivity& conn = {}, double tau = 0.0);
/// Guided search over model-produced guidance; the plan call runs the
/// model forward (the checkpoint is loaded once, outside the timing).
Planner make_vit_planner(std::shared_ptr<const ModelParams> params,
                         const Connectivity& conn = {}, double tau = 0.0);

struct PlannerAggregate {
  std::string map_name;
  std::string planner;
  int trials = 0;
  double success_rate = 0.0;
  double expansions_mean = 0.0;
  double cost_mean = 0.0;  // over successful trials
  double time_mean = 0.0;  // seconds, the plan call only
  double time_stddev = 0.0;
  uint64_t instance_hash = 0;  // hash of the instances this planner saw
};

struct BenchReport {
  uint64_t seed = 0;
  int trials = 0;
  std::string hardware_note;
  std::vector<PlannerAggregate> rows;  // maps x planners, input order
};

struct BenchOptions {
  int trials = 25;
  uint64_t seed = 0;
  SampleOptions sample{};
  std::string hardware_note;
};

/// For each map: draws `trials` problems once, runs every planner on the
/// identical list (after one untimed warm-up call per planner) and
/// aggregates. A planner failure on a solvable instance is recorded as an
/// unsuccessful trial, never an abort.
BenchReport run_benchmark(
    const std::vector<std::pair<std::string,
                                std::shared_ptr<const OccupancyMap>>>& maps,
    const std::vector<Planner>& planners, const BenchOptions& options = {});

/// Fixed column order; one row per map x planner.
void export_report_csv(const BenchReport& report, const std::string& path);
void export_report_json(const BenchReport& report, const std::string& path);

/// FNV-1a over map dims/cells and the endpoint list; the per-planner
/// instance-identity check.
uint64_t hash_instances(const std::vector<PlanningProblem>& problems);

}  // namespace vitastar
