#include "vitastar/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"

namespace vitastar {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

uint64_t fnv1a(uint64_t h, const void* bytes, size_t n) {
  const auto* p = static_cast<const unsigned char*>(bytes);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

Planner make_classic_planner(const Connectivity& conn, HeuristicKind h) {
  return Planner{"classic",
                 [conn, h](const PlanningProblem& p) {
                   return astar(p, conn, h);
                 }};
}

Planner make_uniform_planner(const Connectivity& conn, double tau) {
  return Planner{"uniform", [conn, tau](const PlanningProblem& p) {
                   const GuidanceMap g = GuidanceMap::uniform(
                       p.map->height(), p.map->width());
                   DiffSearchOptions opt;
                   opt.conn = conn;
                   opt.tau = tau;
                   const SearchTrace trace = search(p, g, opt);
                   if (!trace.found) {
                     SearchResult r;
                     r.expansions = trace.expansions;
                     r.wall_time = trace.wall_time;
                     return r;
                   }
                   return backtrack(trace, p);
                 }};
}

Planner make_vit_planner(std::shared_ptr<const ModelParams> params,
                         const Connectivity& conn, double tau) {
  if (!params) throw ContractError("vit planner needs model params");
  return Planner{"vit", [params, conn, tau](const PlanningProblem& p) {
                   Graph graph(/*recording=*/false);
                   const GuidanceMap g = forward(graph, p, *params);
                   DiffSearchOptions opt;
                   opt.conn = conn;
                   opt.tau = tau;
                   const SearchTrace trace = search(p, g, opt);
                   if (!trace.found) {
                     SearchResult r;
                     r.expansions = trace.expansions;
                     r.wall_time = trace.wall_time;
                     return r;
                   }
                   return backtrack(trace, p);
                 }};
}

uint64_t hash_instances(const std::vector<PlanningProblem>& problems) {
  uint64_t h = 1469598103934665603ull;
  for (const PlanningProblem& p : problems) {
    const int dims[2] = {p.map->height(), p.map->width()};
    h = fnv1a(h, dims, sizeof(dims));
    h = fnv1a(h, p.map->cells().data(), p.map->cells().size());
    const int ends[4] = {p.start.row, p.start.col, p.goal.row, p.goal.col};
    h = fnv1a(h, ends, sizeof(ends));
  }
  return h;
}

BenchReport run_benchmark(
    const std::vector<std::pair<std::string,
                                std::shared_ptr<const OccupancyMap>>>& maps,
    const std::vector<Planner>& planners, const BenchOptions& options) {
  if (maps.empty()) throw ParameterError("run_benchmark needs maps");
  if (planners.empty()) throw ParameterError("run_benchmark needs planners");
  if (options.trials < 1) throw ParameterError("trials must be >= 1");

  BenchReport report;
  report.seed = options.seed;
  report.trials = options.trials;
  report.hardware_note = options.hardware_note;

  Rng rng(options.seed);
  for (const auto& [map_name, map] : maps) {
    // one instance list per map, shared by every planner
    std::vector<PlanningProblem> problems;
    problems.reserve(options.trials);
    for (int t = 0; t < options.trials; ++t) {
      problems.push_back(sample_problem(map, rng, options.sample));
    }
    const uint64_t instance_hash = hash_instances(problems);

    for (const Planner& planner : planners) {
      PlannerAggregate agg;
      agg.map_name = map_name;
      agg.planner = planner.name;
      agg.trials = options.trials;
      agg.instance_hash = instance_hash;

      try {
        planner.plan(problems.front());  // warm-up, excluded from stats
      } catch (const std::exception&) {
      }

      int successes = 0;
      double exp_sum = 0.0, cost_sum = 0.0;
      std::vector<double> times;
      times.reserve(problems.size());
      for (const PlanningProblem& p : problems) {
        const auto t0 = std::chrono::steady_clock::now();
        SearchResult r;
        bool failed = false;
        try {
          r = planner.plan(p);
        } catch (const std::exception&) {
          failed = true;
        }
        const double dt = std::chrono::duration<double>(
                              std::chrono::steady_clock::now() - t0)
                              .count();
        times.push_back(dt);
        if (!failed && r.found) {
          ++successes;
          cost_sum += r.cost;
        }
        if (!failed) exp_sum += static_cast<double>(r.expansions);
      }
      const double n = static_cast<double>(problems.size());
      agg.success_rate = successes / n;
      agg.expansions_mean = exp_sum / n;
      agg.cost_mean = successes > 0 ? cost_sum / successes : 0.0;
      double mean = 0.0;
      for (double t : times) mean += t;
      mean /= n;
      double var = 0.0;
      for (double t : times) var += (t - mean) * (t - mean);
      agg.time_mean = mean;
      agg.time_stddev = std::sqrt(var / n);
      report.rows.push_back(std::move(agg));
    }
  }
  return report;
}

void export_report_csv(const BenchReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "map,planner,trials,success_rate,expansions_mean,cost_mean,"
         "time_mean_s,time_stddev_s,instance_hash,seed\n";
  for (const PlannerAggregate& r : report.rows) {
    char hash[24];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(r.instance_hash));
    out << r.map_name << "," << r.planner << "," << r.trials << ","
        << fmt_double(r.success_rate) << "," << fmt_double(r.expansions_mean)
        << "," << fmt_double(r.cost_mean) << "," << fmt_double(r.time_mean)
        << "," << fmt_double(r.time_stddev) << "," << hash << ","
        << report.seed << "\n";
  }
  if (!out) throw IoError("write failed for " + path);
}

void export_report_json(const BenchReport& report, const std::string& path) {
  nlohmann::json j;
  j["seed"] = report.seed;
  j["trials"] = report.trials;
  j["hardware_note"] = report.hardware_note;
  nlohmann::json rows = nlohmann::json::array();
  for (const PlannerAggregate& r : report.rows) {
    char hash[24];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(r.instance_hash));
    rows.push_back({{"map", r.map_name},
                    {"planner", r.planner},
                    {"trials", r.trials},
                    {"success_rate", r.success_rate},
                    {"expansions_mean", r.expansions_mean},
                    {"cost_mean", r.cost_mean},
                    {"time_mean_s", r.time_mean},
                    {"time_stddev_s", r.time_stddev},
                    {"instance_hash", hash}});
  }
  j["rows"] = std::move(rows);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(2) << "\n";
}

}  // namespace vitastar
