#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "vitastar/diff_astar.hpp"
#include "vitastar/gridmap.hpp"
#include "vitastar/tensor.hpp"

namespace vitastar {

struct ModelConfig {
  int patch_size = 16;  // S
  int hidden_dim = 64;  // D
  int blocks = 3;       // L
  int heads = 4;
  int ff_mult = 4;
  int n_max = 4096;  // positional upper bound: max token count supported
  bool include_markers = true;  // feed start/goal planes to the encoder
  double c_min = 0.05;          // guidance floor, keeps costs positive
  uint64_t seed = 0;

  int channels() const { return include_markers ? 3 : 1; }
  int patch_dim() const { return patch_size * patch_size * channels(); }
  void validate() const;
};

/// A map cut into flattened patches plus the geometry needed to undo it.
struct PatchSequence {
  Tensor patches;  // N x (S^2 * C), channel-blocked per token
  int n_rows = 0;
  int n_cols = 0;
  int pad_bottom = 0;
  int pad_right = 0;
  int height = 0;  // original, pre-padding
  int width = 0;
  int patch_size = 0;
  int channels = 1;

  int64_t count() const {
    return static_cast<int64_t>(n_rows) * n_cols;
  }
};

struct BlockParams {
  Tensor norm1_gain, norm1_bias;
  Tensor wq, bq, wk, bk, wv, bv, wo, bo;
  Tensor norm2_gain, norm2_bias;
  Tensor ff1_w, ff1_b, ff2_w, ff2_b;
};

/// All learnable weights. Tensors are shared handles; clone() produces an
/// independent snapshot for checkpointing.
struct ModelParams {
  ModelConfig config;
  Tensor patch_projection;  // (S^2*C) x D
  Tensor patch_bias;        // D
  Tensor positional_table;  // n_max x D
  std::vector<BlockParams> blocks;
  Tensor final_norm_gain, final_norm_bias;
  Tensor decoder_projection;  // D x S^2
  Tensor decoder_bias;        // S^2

  /// Seeded fan-in-scaled uniform init.
  static ModelParams init(const ModelConfig& config);

  /// Visits every member tensor in a stable order; the checkpoint and
  /// optimizer order.
  void for_each_tensor(
      const std::function<void(const std::string&, Tensor&)>& fn);
  /// Stable (name, tensor) listing; the handles share storage.
  std::vector<std::pair<std::string, Tensor>> named_tensors();
  std::vector<Tensor> tensors();
  void zero_grads();
  ModelParams clone() const;
};

/// Pads the map with obstacle cells on bottom/right to a multiple of S,
/// then cuts row-major S x S patches, each flattened row-major.
PatchSequence patchify(const OccupancyMap& map, int patch_size);

/// Inverse of patchify for a C = 1 binary sequence (crops the padding).
OccupancyMap unpatchify(const PatchSequence& seq);

/// Patchify the model input planes for a problem: the binary map plane
/// (padded with obstacles) plus, when configured, start and goal one-hot
/// planes (padded with zeros).
PatchSequence patchify_input(const OccupancyMap& map, Cell start, Cell goal,
                             const ModelConfig& config);

/// Linear patch embedding + positional rows + pre-norm transformer
/// blocks. Output is N x D. Throws CapacityError when N exceeds n_max.
Tensor encode(Graph& graph, const PatchSequence& seq,
              const ModelParams& params);

/// Projects tokens to S^2 values, reassembles the padded grid, crops to
/// the original dims and squashes into [c_min, 1].
GuidanceMap decode(Graph& graph, const Tensor& embedded,
                   const PatchSequence& seq, const ModelParams& params);

/// Full encoder/decoder pass: map (+ start/goal planes) to guidance map.
GuidanceMap forward(Graph& graph, const OccupancyMap& map, Cell start,
                    Cell goal, const ModelParams& params);
GuidanceMap forward(Graph& graph, const PlanningProblem& problem,
                    const ModelParams& params);

/// Versioned JSON container with the config and named weight tensors.
void save_checkpoint(const ModelParams& params, const std::string& path);
ModelParams load_checkpoint(const std::string& path);

}  // namespace vitastar
