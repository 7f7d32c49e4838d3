// Command-line front end: plan / train / bench / render / dataset.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "vitastar/bench.hpp"
#include "vitastar/image_io.hpp"
#include "vitastar/pathpost.hpp"
#include "vitastar/render.hpp"
#include "vitastar/trainer.hpp"

namespace fs = std::filesystem;
using namespace vitastar;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Cell parse_cell(const std::vector<int>& rc, const std::string& flag) {
  if (rc.size() != 2) {
    throw UsageError(flag + " expects r,c");
  }
  return Cell{rc[0], rc[1]};
}

std::pair<int, int> parse_size(const std::string& s) {
  const auto x = s.find('x');
  if (x == std::string::npos) throw UsageError("--map-size expects HxW");
  try {
    return {std::stoi(s.substr(0, x)), std::stoi(s.substr(x + 1))};
  } catch (const std::exception&) {
    throw UsageError("--map-size expects HxW");
  }
}

HeuristicKind parse_heuristic(const std::string& name) {
  if (name == "octile") return HeuristicKind::octile;
  if (name == "manhattan") return HeuristicKind::manhattan;
  if (name == "euclidean") return HeuristicKind::euclidean;
  throw UsageError("unknown heuristic '" + name +
                   "' (choices: octile, manhattan, euclidean)");
}

Connectivity parse_conn(int kind) {
  if (kind == 4) return Connectivity::four();
  if (kind == 8) return Connectivity::eight();
  throw UsageError("--conn must be 4 or 8");
}

// Shared --maps/--random-maps handling.
struct MapSourceArgs {
  std::vector<std::string> files;
  int random_count = 0;
  std::string size = "32x32";
  double density = 0.25;
  int cutoff = 128;

  void attach(CLI::App* cmd) {
    cmd->add_option("--maps", files, "map image files (.pgm/.png)");
    cmd->add_option("--random-maps", random_count,
                    "generate this many random maps instead");
    cmd->add_option("--map-size", size, "random map dims, HxW")
        ->capture_default_str();
    cmd->add_option("--density", density, "random map obstacle density")
        ->capture_default_str();
    cmd->add_option("--cutoff", cutoff,
                    "grayscale obstacle cutoff for map images")
        ->capture_default_str();
  }

  std::vector<std::pair<std::string, std::shared_ptr<const OccupancyMap>>>
  load(uint64_t seed) const {
    std::vector<std::pair<std::string, std::shared_ptr<const OccupancyMap>>>
        maps;
    for (const std::string& f : files) {
      maps.emplace_back(fs::path(f).stem().string(),
                        std::make_shared<OccupancyMap>(load_image(f, cutoff)));
    }
    if (random_count > 0) {
      const auto [h, w] = parse_size(size);
      Rng rng(seed ^ 0xda3e39cb94b95bdbull);
      for (int i = 0; i < random_count; ++i) {
        maps.emplace_back(
            "random" + std::to_string(i),
            std::make_shared<OccupancyMap>(random_map(h, w, density, rng)));
      }
    }
    if (maps.empty()) {
      throw UsageError("no maps: pass --maps or --random-maps");
    }
    return maps;
  }
};

int cmd_plan(const std::string& map_file, int cutoff,
             const std::vector<int>& start_rc, const std::vector<int>& goal_rc,
             const std::string& planner_name, const std::string& checkpoint,
             double tau, int conn_kind, const std::string& heuristic_name,
             const std::string& out, const std::string& overlay,
             double start_theta, double goal_theta,
             const std::string& orient_mode) {
  if (planner_name == "vit" && checkpoint.empty()) {
    throw UsageError("--planner vit requires --checkpoint");
  }
  const Connectivity conn = parse_conn(conn_kind);

  PlanningProblem problem;
  problem.map = std::make_shared<OccupancyMap>(load_image(map_file, cutoff));
  problem.start = parse_cell(start_rc, "--start");
  problem.goal = parse_cell(goal_rc, "--goal");
  validate_problem(problem);

  Planner planner;
  if (planner_name == "classic") {
    planner = make_classic_planner(conn, heuristic_name.empty()
                                             ? default_heuristic(conn)
                                             : parse_heuristic(heuristic_name));
  } else if (planner_name == "uniform") {
    planner = make_uniform_planner(conn, tau);
  } else if (planner_name == "vit") {
    auto params =
        std::make_shared<const ModelParams>(load_checkpoint(checkpoint));
    planner = make_vit_planner(params, conn, tau);
  } else {
    throw UsageError("unknown planner '" + planner_name +
                     "' (choices: classic, vit, uniform)");
  }

  const SearchResult result = planner.plan(problem);
  if (!result.found) {
    std::cerr << "no path: goal unreachable from start\n";
    return kExitRuntime;
  }
  std::printf("cost %.6f\nexpansions %lld\nwall_time_s %.6f\npath_cells %zu\n",
              result.cost, static_cast<long long>(result.expansions),
              result.wall_time, result.path.size());

  if (!out.empty()) {
    const OrientMode mode = orient_mode == "literal"
                                ? OrientMode::literal_arccos
                                : OrientMode::heading;
    const PosePath poses =
        orient(result.path, start_theta, goal_theta, mode);
    if (out.size() >= 4 && out.substr(out.size() - 4) == ".csv") {
      export_path_csv(poses, out);
    } else {
      export_path_json(poses, out);
    }
    std::printf("pose_path %s\n", out.c_str());
  }
  if (!overlay.empty()) {
    save_png(render_overlay(*problem.map, result, problem.start, problem.goal),
             overlay);
    std::printf("overlay %s\n", overlay.c_str());
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Guidance-map path planning toolkit"};
  app.require_subcommand(1);

  // ---- plan ----
  auto* plan = app.add_subcommand("plan", "plan one path on a map image");
  std::string plan_map, plan_planner = "classic", plan_checkpoint;
  std::string plan_out, plan_overlay, plan_heuristic, plan_orient = "heading";
  std::vector<int> plan_start, plan_goal;
  double plan_tau = 0.0, plan_start_theta = 0.0, plan_goal_theta = 0.0;
  int plan_conn = 8, plan_cutoff = 128;
  plan->add_option("--map", plan_map, "map image (.pgm/.png)")->required();
  plan->add_option("--start", plan_start, "start cell r,c")
      ->required()
      ->delimiter(',');
  plan->add_option("--goal", plan_goal, "goal cell r,c")
      ->required()
      ->delimiter(',');
  plan->add_option("--planner", plan_planner, "classic | vit | uniform")
      ->capture_default_str();
  plan->add_option("--checkpoint", plan_checkpoint, "model checkpoint (vit)");
  plan->add_option("--tau", plan_tau,
                   "soft-selection temperature (0 = sqrt(map width))");
  plan->add_option("--conn", plan_conn, "connectivity, 4 or 8")
      ->capture_default_str();
  plan->add_option("--heuristic", plan_heuristic,
                   "octile | manhattan | euclidean");
  plan->add_option("--cutoff", plan_cutoff, "grayscale obstacle cutoff")
      ->capture_default_str();
  plan->add_option("--out", plan_out, "pose path output (.json/.csv)");
  plan->add_option("--overlay", plan_overlay, "overlay image output (.png)");
  plan->add_option("--start-theta", plan_start_theta, "start orientation");
  plan->add_option("--goal-theta", plan_goal_theta, "goal orientation");
  plan->add_option("--orient", plan_orient, "heading | literal")
      ->capture_default_str();

  // ---- train ----
  auto* train_cmd = app.add_subcommand("train", "train the guidance model");
  MapSourceArgs train_maps;
  train_maps.attach(train_cmd);
  int train_per_map = 10, train_epochs = 300, train_patience = 25;
  uint64_t train_seed = 0;
  double train_lr = 0.001, train_tau = 0.0, train_min_sep = 0.5;
  double train_frac = 0.7, val_frac = 0.1, train_clip = 5.0;
  int patch_size = 4, hidden_dim = 32, blocks = 2, heads = 4, n_max = 4096;
  bool no_markers = false;
  std::string train_ckpt = "checkpoint.json", train_metrics = "metrics.csv";
  std::string train_norm = "cells";
  train_cmd->add_option("--per-map", train_per_map, "problems per map")
      ->capture_default_str();
  train_cmd->add_option("--epochs", train_epochs, "epoch cap")
      ->capture_default_str();
  train_cmd->add_option("--patience", train_patience, "early-stop patience")
      ->capture_default_str();
  train_cmd->add_option("--seed", train_seed, "RNG seed")
      ->capture_default_str();
  train_cmd->add_option("--lr", train_lr, "learning rate")
      ->capture_default_str();
  train_cmd->add_option("--tau", train_tau, "temperature (0 = auto)");
  train_cmd->add_option("--min-separation", train_min_sep,
                        "start/goal separation, fraction of diagonal")
      ->capture_default_str();
  train_cmd->add_option("--train-frac", train_frac, "train split fraction")
      ->capture_default_str();
  train_cmd->add_option("--val-frac", val_frac, "val split fraction")
      ->capture_default_str();
  train_cmd->add_option("--clip-norm", train_clip, "gradient norm cap")
      ->capture_default_str();
  train_cmd->add_option("--patch-size", patch_size, "ViT patch size S")
      ->capture_default_str();
  train_cmd->add_option("--hidden-dim", hidden_dim, "ViT hidden width D")
      ->capture_default_str();
  train_cmd->add_option("--blocks", blocks, "ViT depth L")
      ->capture_default_str();
  train_cmd->add_option("--heads", heads, "attention heads")
      ->capture_default_str();
  train_cmd->add_option("--n-max", n_max, "positional capacity")
      ->capture_default_str();
  train_cmd->add_flag("--no-markers", no_markers,
                      "map-only input, no start/goal planes");
  train_cmd->add_option("--normalizer", train_norm,
                        "loss normalizer: cells | steps")
      ->capture_default_str();
  train_cmd->add_option("--checkpoint", train_ckpt, "checkpoint output")
      ->capture_default_str();
  train_cmd->add_option("--metrics", train_metrics, "metrics CSV output")
      ->capture_default_str();

  // ---- bench ----
  auto* bench_cmd = app.add_subcommand("bench", "compare planners");
  MapSourceArgs bench_maps;
  bench_maps.attach(bench_cmd);
  int bench_trials = 25;
  uint64_t bench_seed = 0;
  double bench_tau = 0.0, bench_min_sep = 0.5;
  std::string bench_planners = "classic,uniform,vit";
  std::string bench_checkpoint, bench_csv = "report.csv",
              bench_json = "report.json";
  bench_cmd->add_option("--planners", bench_planners,
                        "comma list of classic,uniform,vit")
      ->capture_default_str();
  bench_cmd->add_option("--trials", bench_trials, "trials per map")
      ->capture_default_str();
  bench_cmd->add_option("--seed", bench_seed, "RNG seed")
      ->capture_default_str();
  bench_cmd->add_option("--tau", bench_tau, "temperature (0 = auto)");
  bench_cmd->add_option("--min-separation", bench_min_sep,
                        "start/goal separation, fraction of diagonal")
      ->capture_default_str();
  bench_cmd->add_option("--checkpoint", bench_checkpoint,
                        "model checkpoint (vit planner)");
  bench_cmd->add_option("--out-csv", bench_csv, "CSV report output")
      ->capture_default_str();
  bench_cmd->add_option("--out-json", bench_json, "JSON report output")
      ->capture_default_str();

  // ---- render ----
  auto* render_cmd =
      app.add_subcommand("render", "render a search overlay image");
  std::string render_map, render_planner = "classic", render_checkpoint;
  std::string render_out = "overlay.png";
  std::vector<int> render_start, render_goal;
  double render_tau = 0.0;
  int render_conn = 8, render_cutoff = 128;
  render_cmd->add_option("--map", render_map, "map image")->required();
  render_cmd->add_option("--start", render_start, "start cell r,c")
      ->required()
      ->delimiter(',');
  render_cmd->add_option("--goal", render_goal, "goal cell r,c")
      ->required()
      ->delimiter(',');
  render_cmd->add_option("--planner", render_planner,
                         "classic | vit | uniform")
      ->capture_default_str();
  render_cmd->add_option("--checkpoint", render_checkpoint,
                         "model checkpoint (vit)");
  render_cmd->add_option("--tau", render_tau, "temperature (0 = auto)");
  render_cmd->add_option("--conn", render_conn, "connectivity, 4 or 8")
      ->capture_default_str();
  render_cmd->add_option("--cutoff", render_cutoff, "grayscale cutoff")
      ->capture_default_str();
  render_cmd->add_option("--out", render_out, "output PNG")
      ->capture_default_str();

  // ---- dataset ----
  auto* ds_cmd =
      app.add_subcommand("dataset", "generate a problem corpus on disk");
  MapSourceArgs ds_maps;
  ds_maps.attach(ds_cmd);
  int ds_per_map = 10;
  uint64_t ds_seed = 0;
  double ds_min_sep = 0.5;
  std::string ds_dir = "dataset";
  ds_cmd->add_option("--per-map", ds_per_map, "problems per map")
      ->capture_default_str();
  ds_cmd->add_option("--seed", ds_seed, "RNG seed")->capture_default_str();
  ds_cmd->add_option("--min-separation", ds_min_sep,
                     "start/goal separation, fraction of diagonal")
      ->capture_default_str();
  ds_cmd->add_option("--out-dir", ds_dir, "output directory")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, exit 0
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (plan->parsed()) {
      return cmd_plan(plan_map, plan_cutoff, plan_start, plan_goal,
                      plan_planner, plan_checkpoint, plan_tau, plan_conn,
                      plan_heuristic, plan_out, plan_overlay, plan_start_theta,
                      plan_goal_theta, plan_orient);
    }

    if (train_cmd->parsed()) {
      const auto maps = train_maps.load(train_seed);
      std::vector<std::shared_ptr<const OccupancyMap>> map_ptrs;
      for (const auto& [name, m] : maps) map_ptrs.push_back(m);

      DatasetOptions dopt;
      dopt.per_map = train_per_map;
      dopt.train_frac = train_frac;
      dopt.val_frac = val_frac;
      dopt.sample.min_separation = train_min_sep;
      const Dataset dataset = build_dataset(map_ptrs, train_seed, dopt);

      TrainConfig tc;
      tc.model.patch_size = patch_size;
      tc.model.hidden_dim = hidden_dim;
      tc.model.blocks = blocks;
      tc.model.heads = heads;
      tc.model.n_max = n_max;
      tc.model.include_markers = !no_markers;
      tc.model.seed = train_seed;
      tc.opt.lr = train_lr;
      tc.epochs = train_epochs;
      tc.patience = train_patience;
      tc.tau = train_tau;
      tc.clip_norm = train_clip;
      if (train_norm == "steps") {
        tc.normalizer = HistoryNormalizer::selection_steps;
      } else if (train_norm != "cells") {
        throw UsageError("--normalizer must be cells or steps");
      }
      tc.checkpoint_path = train_ckpt;
      tc.metrics_path = train_metrics;
      tc.metrics_note =
          "seed=" + std::to_string(train_seed) +
          " problems=" + std::to_string(dataset.problems.size()) +
          " train=" + std::to_string(dataset.count(Split::train)) +
          " val=" + std::to_string(dataset.count(Split::val)) +
          " test=" + std::to_string(dataset.count(Split::test)) +
          " maps=" + std::to_string(map_ptrs.size()) +
          " per_map=" + std::to_string(train_per_map) +
          " S=" + std::to_string(patch_size) +
          " D=" + std::to_string(hidden_dim) +
          " L=" + std::to_string(blocks) + " heads=" + std::to_string(heads) +
          " lr=" + std::to_string(train_lr);

      const TrainResult result = train(dataset, tc);
      if (result.diverged) {
        std::cerr << "training diverged; kept the last finished epoch\n";
        return kExitRuntime;
      }
      std::printf("epochs_run %zu\nbest_epoch %d\ncheckpoint %s\nmetrics %s\n",
                  result.history.size(), result.best_epoch, train_ckpt.c_str(),
                  train_metrics.c_str());
      if (!result.history.empty()) {
        std::printf("first_train_loss %.6f\nlast_train_loss %.6f\n",
                    result.history.front().train_loss,
                    result.history.back().train_loss);
      }
      return kExitOk;
    }

    if (bench_cmd->parsed()) {
      const auto maps = bench_maps.load(bench_seed);
      std::vector<Planner> planners;
      std::shared_ptr<const ModelParams> params;
      std::string token;
      std::stringstream ss(bench_planners);
      while (std::getline(ss, token, ',')) {
        if (token == "classic") {
          planners.push_back(make_classic_planner());
        } else if (token == "uniform") {
          planners.push_back(make_uniform_planner({}, bench_tau));
        } else if (token == "vit") {
          if (bench_checkpoint.empty()) {
            throw UsageError("planner vit requires --checkpoint");
          }
          if (!params) {
            params = std::make_shared<const ModelParams>(
                load_checkpoint(bench_checkpoint));
          }
          planners.push_back(make_vit_planner(params, {}, bench_tau));
        } else {
          throw UsageError("unknown planner '" + token +
                           "' (choices: classic, uniform, vit)");
        }
      }
      if (planners.empty()) throw UsageError("no planners selected");

      BenchOptions bopt;
      bopt.trials = bench_trials;
      bopt.seed = bench_seed;
      bopt.sample.min_separation = bench_min_sep;
      bopt.hardware_note = "single-thread desk run";
      const BenchReport report = run_benchmark(maps, planners, bopt);
      export_report_csv(report, bench_csv);
      export_report_json(report, bench_json);
      std::printf("report_csv %s\nreport_json %s\n", bench_csv.c_str(),
                  bench_json.c_str());
      for (const PlannerAggregate& r : report.rows) {
        std::printf("%s %s expansions_mean %.2f time_mean_s %.6f success %.2f\n",
                    r.map_name.c_str(), r.planner.c_str(), r.expansions_mean,
                    r.time_mean, r.success_rate);
      }
      return kExitOk;
    }

    if (render_cmd->parsed()) {
      return cmd_plan(render_map, render_cutoff, render_start, render_goal,
                      render_planner, render_checkpoint, render_tau,
                      render_conn, "", "", render_out, 0.0, 0.0, "heading");
    }

    if (ds_cmd->parsed()) {
      const auto maps = ds_maps.load(ds_seed);
      std::vector<std::shared_ptr<const OccupancyMap>> map_ptrs;
      for (const auto& [name, m] : maps) map_ptrs.push_back(m);
      DatasetOptions dopt;
      dopt.per_map = ds_per_map;
      dopt.sample.min_separation = ds_min_sep;
      const Dataset dataset = build_dataset(map_ptrs, ds_seed, dopt);

      fs::create_directories(ds_dir);
      std::vector<std::string> map_files;
      for (size_t i = 0; i < maps.size(); ++i) {
        const std::string file = maps[i].first + ".pgm";
        save_pgm(*maps[i].second, (fs::path(ds_dir) / file).string());
        map_files.push_back(file);
      }
      nlohmann::json manifest;
      manifest["seed"] = ds_seed;
      manifest["per_map"] = ds_per_map;
      nlohmann::json problem_files = nlohmann::json::array();
      for (size_t i = 0; i < dataset.problems.size(); ++i) {
        const PlanningProblem& p = dataset.problems[i];
        const size_t map_idx = i / static_cast<size_t>(ds_per_map);
        char name[64];
        std::snprintf(name, sizeof(name), "problem_%04zu.json", i);
        save_problem(p, (fs::path(ds_dir) / name).string(),
                     map_files[map_idx]);
        problem_files.push_back(name);
      }
      manifest["problems"] = problem_files;
      std::ofstream mf(fs::path(ds_dir) / "manifest.json");
      mf << manifest.dump(2) << "\n";
      std::printf("dataset %s (%zu problems)\n", ds_dir.c_str(),
                  dataset.problems.size());
      return kExitOk;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
