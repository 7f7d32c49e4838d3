#pragma once

#include <string>
#include <vector>

#include "vitastar/diff_astar.hpp"
#include "vitastar/vit.hpp"

namespace vitastar {

enum class Split { train, val, test };

/// Problems with verified ground-truth paths, tagged by split.
struct Dataset {
  std::vector<PlanningProblem> problems;
  std::vector<Split> tags;

  std::vector<size_t> indices(Split split) const;
  size_t count(Split split) const { return indices(split).size(); }
};

struct DatasetOptions {
  int per_map = 10;
  double train_frac = 0.7;
  double val_frac = 0.1;  // remainder is the test split
  SampleOptions sample{};
  Connectivity conn{};
};

/// Samples per_map problems per map, attaches optimal ground-truth paths
/// (uniform-cost search) and assigns shuffled split tags. Deterministic
/// under a fixed seed.
Dataset build_dataset(
    const std::vector<std::shared_ptr<const OccupancyMap>>& maps,
    uint64_t seed, const DatasetOptions& options = {});

struct RmsPropConfig {
  double lr = 0.001;
  double rho = 0.99;
  double eps = 1e-8;
};

/// RMSprop over a fixed parameter list:
/// v <- rho*v + (1-rho)*g^2 ; p <- p - lr*g/(sqrt(v)+eps).
class RmsProp {
 public:
  RmsProp(std::vector<Tensor> params, RmsPropConfig config = {});

  /// Applies one update from the gradients currently in the parameters.
  /// Returns false and leaves everything untouched when any gradient is
  /// non-finite (skip-and-report).
  bool step();
  void zero_grads();
  const RmsPropConfig& config() const { return config_; }

 private:
  std::vector<Tensor> params_;
  std::vector<std::vector<double>> sq_avg_;
  RmsPropConfig config_;
};

/// Scales all gradients so their global L2 norm is at most max_norm.
/// Returns the pre-clip norm.
double clip_grad_norm(std::vector<Tensor>& params, double max_norm);

struct TrainConfig {
  ModelConfig model{};
  RmsPropConfig opt{};
  int epochs = 300;
  int patience = 25;  // epochs without val-expansion improvement
  double tau = 0.0;   // <= 0 picks sqrt(map width)
  Connectivity conn{};
  HistoryNormalizer normalizer = HistoryNormalizer::map_cells;
  double clip_norm = 5.0;
  std::string checkpoint_path;  // best-val params; empty = don't write
  std::string metrics_path;     // per-epoch CSV; empty = don't write
  std::string metrics_note;     // free-form line recorded in the header
};

struct EpochMetrics {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_expansions_mean = 0.0;
};

struct TrainResult {
  std::vector<EpochMetrics> history;
  ModelParams best_params;
  ModelParams last_params;
  int best_epoch = 0;  // 0 = initialization
  bool diverged = false;
  int skipped_steps = 0;  // non-finite-gradient updates dropped
};

/// One search per optimizer step (batch size 1): guidance forward,
/// guided search, history loss, backward, clipped RMSprop update.
/// Stops at the epoch cap, on patience, or on a non-finite loss
/// (abort, keeping the last finished epoch's params).
TrainResult train(const Dataset& dataset, const TrainConfig& config);

void write_metrics_csv(const std::vector<EpochMetrics>& history,
                       const std::string& note, const std::string& path);

}  // namespace vitastar
