#include "vitastar/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

namespace vitastar {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void shuffle_indices(std::vector<size_t>& idx, Rng& rng) {
  for (size_t i = idx.size(); i > 1; --i) {
    std::swap(idx[i - 1], idx[rng.below(static_cast<int64_t>(i))]);
  }
}

}  // namespace

std::vector<size_t> Dataset::indices(Split split) const {
  std::vector<size_t> out;
  for (size_t i = 0; i < tags.size(); ++i) {
    if (tags[i] == split) out.push_back(i);
  }
  return out;
}

Dataset build_dataset(
    const std::vector<std::shared_ptr<const OccupancyMap>>& maps,
    uint64_t seed, const DatasetOptions& options) {
  if (maps.empty()) throw ParameterError("build_dataset needs maps");
  if (options.per_map < 1) throw ParameterError("per_map must be >= 1");
  Rng rng(seed);
  Dataset ds;
  for (const auto& map : maps) {
    if (!map) throw ContractError("null map in dataset input");
    for (int k = 0; k < options.per_map; ++k) {
      PlanningProblem p = sample_problem(map, rng, options.sample);
      const SearchResult truth = dijkstra(p, options.conn);
      if (!truth.found) {
        // sample_problem verified reachability, so this cannot happen
        throw ContractError("ground-truth search failed on a sampled pair");
      }
      p.truth = reconstruct_pathmap(truth, map->height(), map->width());
      p.truth_path = truth.path;
      ds.problems.push_back(std::move(p));
    }
  }
  // shuffled split assignment
  std::vector<size_t> order(ds.problems.size());
  std::iota(order.begin(), order.end(), size_t{0});
  shuffle_indices(order, rng);
  const size_t n = order.size();
  const size_t n_train = static_cast<size_t>(options.train_frac * n);
  const size_t n_val = static_cast<size_t>(options.val_frac * n);
  ds.tags.assign(n, Split::test);
  for (size_t i = 0; i < n; ++i) {
    if (i < n_train) {
      ds.tags[order[i]] = Split::train;
    } else if (i < n_train + n_val) {
      ds.tags[order[i]] = Split::val;
    }
  }
  return ds;
}

RmsProp::RmsProp(std::vector<Tensor> params, RmsPropConfig config)
    : params_(std::move(params)), config_(config) {
  for (Tensor& p : params_) {
    sq_avg_.emplace_back(p.size(), 0.0);
  }
}

bool RmsProp::step() {
  for (Tensor& p : params_) {
    for (double g : p.grad()) {
      if (!std::isfinite(g)) return false;
    }
  }
  for (size_t k = 0; k < params_.size(); ++k) {
    auto pd = params_[k].data();
    auto gd = params_[k].grad();
    auto& v = sq_avg_[k];
    for (size_t i = 0; i < v.size(); ++i) {
      v[i] = config_.rho * v[i] + (1.0 - config_.rho) * gd[i] * gd[i];
      pd[i] -= config_.lr * gd[i] / (std::sqrt(v[i]) + config_.eps);
    }
  }
  return true;
}

void RmsProp::zero_grads() {
  for (Tensor& p : params_) p.zero_grad();
}

double clip_grad_norm(std::vector<Tensor>& params, double max_norm) {
  double sq = 0.0;
  for (Tensor& p : params) {
    for (double g : p.grad()) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double factor = max_norm / norm;
    for (Tensor& p : params) {
      for (double& g : p.grad()) g *= factor;
    }
  }
  return norm;
}

TrainResult train(const Dataset& dataset, const TrainConfig& config) {
  const auto train_idx = dataset.indices(Split::train);
  const auto val_idx = dataset.indices(Split::val);
  if (train_idx.empty()) throw ParameterError("empty train split");
  for (size_t i : train_idx) {
    if (!dataset.problems[i].truth) {
      throw ContractError("train problem without a ground-truth path");
    }
  }

  ModelParams params = ModelParams::init(config.model);
  std::vector<Tensor> leaves = params.tensors();
  RmsProp opt(leaves, config.opt);
  Rng shuffle_rng(config.model.seed ^ 0x9e3779b97f4a7c15ull);

  TrainResult result;
  result.best_params = params.clone();
  result.last_params = params.clone();
  result.best_epoch = 0;

  auto evaluate_val = [&](double& loss_mean, double& exp_mean) {
    loss_mean = 0.0;
    exp_mean = 0.0;
    if (val_idx.empty()) return;
    for (size_t i : val_idx) {
      const PlanningProblem& prob = dataset.problems[i];
      Graph graph(/*recording=*/false);
      const GuidanceMap guidance = forward(graph, prob, params);
      DiffSearchOptions sopt;
      sopt.tau = config.tau;
      sopt.conn = config.conn;
      sopt.normalizer = config.normalizer;
      const SearchTrace trace = search(prob, guidance, sopt);
      loss_mean += loss(trace, *prob.truth).value();
      exp_mean += static_cast<double>(trace.expansions);
    }
    loss_mean /= static_cast<double>(val_idx.size());
    exp_mean /= static_cast<double>(val_idx.size());
  };

  double best_val_exp = std::numeric_limits<double>::infinity();
  int stale_epochs = 0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::vector<size_t> order = train_idx;
    shuffle_indices(order, shuffle_rng);

    double train_loss = 0.0;
    bool diverged = false;
    for (size_t i : order) {
      const PlanningProblem& prob = dataset.problems[i];
      auto graph = std::make_shared<Graph>();
      const GuidanceMap guidance = forward(*graph, prob, params);
      DiffSearchOptions sopt;
      sopt.tau = config.tau;
      sopt.conn = config.conn;
      sopt.record = true;
      sopt.graph = graph;
      sopt.normalizer = config.normalizer;
      const SearchTrace trace = search(prob, guidance, sopt);
      const Tensor l = loss(trace, *prob.truth);
      if (!std::isfinite(l.value())) {
        diverged = true;
        break;
      }
      train_loss += l.value();
      opt.zero_grads();
      graph->backward(l);
      clip_grad_norm(leaves, config.clip_norm);
      if (!opt.step()) ++result.skipped_steps;
    }
    if (diverged) {
      result.diverged = true;
      params = result.last_params.clone();
      break;
    }
    train_loss /= static_cast<double>(order.size());

    EpochMetrics m;
    m.epoch = epoch;
    m.train_loss = train_loss;
    evaluate_val(m.val_loss, m.val_expansions_mean);
    result.history.push_back(m);
    result.last_params = params.clone();

    if (val_idx.empty() || m.val_expansions_mean < best_val_exp) {
      best_val_exp = m.val_expansions_mean;
      result.best_params = params.clone();
      result.best_epoch = epoch;
      stale_epochs = 0;
    } else {
      ++stale_epochs;
      if (stale_epochs >= config.patience) break;
    }
  }

  if (!config.checkpoint_path.empty()) {
    save_checkpoint(result.best_params, config.checkpoint_path);
  }
  if (!config.metrics_path.empty()) {
    write_metrics_csv(result.history, config.metrics_note,
                      config.metrics_path);
  }
  return result;
}

void write_metrics_csv(const std::vector<EpochMetrics>& history,
                       const std::string& note, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  if (!note.empty()) out << "# " << note << "\n";
  out << "epoch,train_loss,val_loss,val_expansions_mean\n";
  for (const EpochMetrics& m : history) {
    out << m.epoch << "," << fmt_double(m.train_loss) << ","
        << fmt_double(m.val_loss) << "," << fmt_double(m.val_expansions_mean)
        << "\n";
  }
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace vitastar
