#include "vitastar/vit.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"

namespace vitastar {

namespace {

Tensor uniform_tensor(std::vector<int64_t> shape, double lo, double hi,
                      Rng& rng) {
  Tensor t = Tensor::zeros(std::move(shape));
  for (double& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

/// Fan-in-scaled uniform init for a (fan_in x fan_out) weight matrix.
Tensor init_weight(int64_t fan_in, int64_t fan_out, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  return uniform_tensor({fan_in, fan_out}, -bound, bound, rng);
}

}  // namespace

void ModelConfig::validate() const {
  if (patch_size < 1) throw ParameterError("patch_size must be >= 1");
  if (hidden_dim < 1 || heads < 1 || hidden_dim % heads != 0) {
    throw ParameterError("hidden_dim must be a positive multiple of heads");
  }
  if (blocks < 0) throw ParameterError("blocks must be >= 0");
  if (ff_mult < 1) throw ParameterError("ff_mult must be >= 1");
  if (n_max < 1) throw ParameterError("n_max must be >= 1");
  if (!(c_min > 0.0 && c_min < 1.0)) {
    throw ParameterError("c_min must lie in (0, 1)");
  }
}

ModelParams ModelParams::init(const ModelConfig& config) {
  config.validate();
  Rng rng(config.seed);
  ModelParams p;
  p.config = config;
  const int64_t d = config.hidden_dim;
  const int64_t pd = config.patch_dim();
  const int64_t s2 = static_cast<int64_t>(config.patch_size) *
                     config.patch_size;
  const int64_t ff = d * config.ff_mult;

  p.patch_projection = init_weight(pd, d, rng);
  p.patch_bias = Tensor::zeros({d});
  p.positional_table =
      uniform_tensor({config.n_max, d}, -0.02, 0.02, rng);
  for (int b = 0; b < config.blocks; ++b) {
    BlockParams blk;
    blk.norm1_gain = Tensor::full({d}, 1.0);
    blk.norm1_bias = Tensor::zeros({d});
    blk.wq = init_weight(d, d, rng);
    blk.bq = Tensor::zeros({d});
    blk.wk = init_weight(d, d, rng);
    blk.bk = Tensor::zeros({d});
    blk.wv = init_weight(d, d, rng);
    blk.bv = Tensor::zeros({d});
    blk.wo = init_weight(d, d, rng);
    blk.bo = Tensor::zeros({d});
    blk.norm2_gain = Tensor::full({d}, 1.0);
    blk.norm2_bias = Tensor::zeros({d});
    blk.ff1_w = init_weight(d, ff, rng);
    blk.ff1_b = Tensor::zeros({ff});
    blk.ff2_w = init_weight(ff, d, rng);
    blk.ff2_b = Tensor::zeros({d});
    p.blocks.push_back(std::move(blk));
  }
  p.final_norm_gain = Tensor::full({d}, 1.0);
  p.final_norm_bias = Tensor::zeros({d});
  p.decoder_projection = init_weight(d, s2, rng);
  p.decoder_bias = Tensor::zeros({s2});
  return p;
}

void ModelParams::for_each_tensor(
    const std::function<void(const std::string&, Tensor&)>& fn) {
  fn("patch_projection", patch_projection);
  fn("patch_bias", patch_bias);
  fn("positional_table", positional_table);
  for (size_t b = 0; b < blocks.size(); ++b) {
    const std::string prefix = "block" + std::to_string(b) + ".";
    BlockParams& blk = blocks[b];
    fn(prefix + "norm1_gain", blk.norm1_gain);
    fn(prefix + "norm1_bias", blk.norm1_bias);
    fn(prefix + "wq", blk.wq);
    fn(prefix + "bq", blk.bq);
    fn(prefix + "wk", blk.wk);
    fn(prefix + "bk", blk.bk);
    fn(prefix + "wv", blk.wv);
    fn(prefix + "bv", blk.bv);
    fn(prefix + "wo", blk.wo);
    fn(prefix + "bo", blk.bo);
    fn(prefix + "norm2_gain", blk.norm2_gain);
    fn(prefix + "norm2_bias", blk.norm2_bias);
    fn(prefix + "ff1_w", blk.ff1_w);
    fn(prefix + "ff1_b", blk.ff1_b);
    fn(prefix + "ff2_w", blk.ff2_w);
    fn(prefix + "ff2_b", blk.ff2_b);
  }
  fn("final_norm_gain", final_norm_gain);
  fn("final_norm_bias", final_norm_bias);
  fn("decoder_projection", decoder_projection);
  fn("decoder_bias", decoder_bias);
}

std::vector<std::pair<std::string, Tensor>> ModelParams::named_tensors() {
  std::vector<std::pair<std::string, Tensor>> out;
  for_each_tensor(
      [&](const std::string& name, Tensor& t) { out.emplace_back(name, t); });
  return out;
}

std::vector<Tensor> ModelParams::tensors() {
  std::vector<Tensor> out;
  for_each_tensor([&](const std::string&, Tensor& t) { out.push_back(t); });
  return out;
}

void ModelParams::zero_grads() {
  for_each_tensor([](const std::string&, Tensor& t) { t.zero_grad(); });
}

ModelParams ModelParams::clone() const {
  ModelParams copy = *this;  // handles still share storage here
  copy.for_each_tensor([](const std::string&, Tensor& t) {
    t = Tensor(t.shape(),
               std::vector<double>(t.data().begin(), t.data().end()));
  });
  return copy;
}

PatchSequence patchify(const OccupancyMap& map, int patch_size) {
  if (patch_size < 1) throw ParameterError("patch_size must be >= 1");
  const int s = patch_size;
  const int n_rows = (map.height() + s - 1) / s;
  const int n_cols = (map.width() + s - 1) / s;
  PatchSequence seq;
  seq.n_rows = n_rows;
  seq.n_cols = n_cols;
  seq.pad_bottom = n_rows * s - map.height();
  seq.pad_right = n_cols * s - map.width();
  seq.height = map.height();
  seq.width = map.width();
  seq.patch_size = s;
  seq.channels = 1;
  Tensor patches = Tensor::zeros({seq.count(), static_cast<int64_t>(s) * s});
  auto pd = patches.data();
  const int64_t s2 = static_cast<int64_t>(s) * s;
  for (int64_t t = 0; t < seq.count(); ++t) {
    const int pr = static_cast<int>(t / n_cols), pc = static_cast<int>(t % n_cols);
    for (int64_t k = 0; k < s2; ++k) {
      const int r = pr * s + static_cast<int>(k) / s;
      const int c = pc * s + static_cast<int>(k) % s;
      // padding cells read as obstacles
      const double v =
          (r < map.height() && c < map.width()) ? map.at(r, c) : 1.0;
      pd[t * s2 + k] = v;
    }
  }
  seq.patches = std::move(patches);
  return seq;
}

OccupancyMap unpatchify(const PatchSequence& seq) {
  if (seq.channels != 1) {
    throw ContractError("unpatchify expects a single-channel sequence");
  }
  OccupancyMap map(seq.height, seq.width);
  auto pd = seq.patches.data();
  const int s = seq.patch_size;
  const int64_t s2 = static_cast<int64_t>(s) * s;
  for (int64_t t = 0; t < seq.count(); ++t) {
    const int pr = static_cast<int>(t / seq.n_cols),
              pc = static_cast<int>(t % seq.n_cols);
    for (int64_t k = 0; k < s2; ++k) {
      const int r = pr * s + static_cast<int>(k) / s;
      const int c = pc * s + static_cast<int>(k) % s;
      if (r < seq.height && c < seq.width) {
        map.set(r, c, pd[t * s2 + k] != 0.0 ? 1 : 0);
      }
    }
  }
  return map;
}

PatchSequence patchify_input(const OccupancyMap& map, Cell start, Cell goal,
                             const ModelConfig& config) {
  PatchSequence seq = patchify(map, config.patch_size);
  if (!config.include_markers) return seq;
  // extend each token with start/goal one-hot planes, zero-padded
  const int s = config.patch_size;
  const int64_t s2 = static_cast<int64_t>(s) * s;
  Tensor extended = Tensor::zeros({seq.count(), 3 * s2});
  auto ed = extended.data();
  auto pd = seq.patches.data();
  for (int64_t t = 0; t < seq.count(); ++t) {
    const int pr = static_cast<int>(t / seq.n_cols),
              pc = static_cast<int>(t % seq.n_cols);
    for (int64_t k = 0; k < s2; ++k) {
      const int r = pr * s + static_cast<int>(k) / s;
      const int c = pc * s + static_cast<int>(k) % s;
      ed[t * 3 * s2 + k] = pd[t * s2 + k];
      if (r == start.row && c == start.col) ed[t * 3 * s2 + s2 + k] = 1.0;
      if (r == goal.row && c == goal.col) ed[t * 3 * s2 + 2 * s2 + k] = 1.0;
    }
  }
  seq.patches = std::move(extended);
  seq.channels = 3;
  return seq;
}

Tensor encode(Graph& graph, const PatchSequence& seq,
              const ModelParams& params) {
  const ModelConfig& cfg = params.config;
  const int64_t n = seq.count();
  if (n > cfg.n_max) {
    throw CapacityError(
        "input yields " + std::to_string(n) +
        " patches but the positional table caps at n_max = " +
        std::to_string(cfg.n_max));
  }
  if (seq.patches.shape()[1] != cfg.patch_dim()) {
    throw DimensionError("patch vector length does not match the model");
  }
  const int64_t d = cfg.hidden_dim;
  const int64_t dh = d / cfg.heads;
  const double att_scale = 1.0 / std::sqrt(static_cast<double>(dh));

  Tensor x = graph.add_rowvec(graph.matmul(seq.patches, params.patch_projection),
                              params.patch_bias);
  x = graph.add(x, graph.slice_rows(params.positional_table, 0, n));

  for (const BlockParams& blk : params.blocks) {
    Tensor x1 = graph.layer_norm_rows(x, blk.norm1_gain, blk.norm1_bias);
    Tensor q = graph.add_rowvec(graph.matmul(x1, blk.wq), blk.bq);
    Tensor k = graph.add_rowvec(graph.matmul(x1, blk.wk), blk.bk);
    Tensor v = graph.add_rowvec(graph.matmul(x1, blk.wv), blk.bv);
    std::vector<Tensor> head_outputs;
    for (int h = 0; h < cfg.heads; ++h) {
      Tensor qh = graph.slice_cols(q, h * dh, (h + 1) * dh);
      Tensor kh = graph.slice_cols(k, h * dh, (h + 1) * dh);
      Tensor vh = graph.slice_cols(v, h * dh, (h + 1) * dh);
      Tensor att = graph.row_softmax(
          graph.scale(graph.matmul(qh, graph.transpose(kh)), att_scale));
      head_outputs.push_back(graph.matmul(att, vh));
    }
    Tensor attn = graph.add_rowvec(
        graph.matmul(graph.concat_cols(head_outputs), blk.wo), blk.bo);
    x = graph.add(x, attn);

    Tensor x2 = graph.layer_norm_rows(x, blk.norm2_gain, blk.norm2_bias);
    Tensor ff = graph.add_rowvec(graph.matmul(x2, blk.ff1_w), blk.ff1_b);
    ff = graph.add_rowvec(graph.matmul(graph.gelu(ff), blk.ff2_w),
                          blk.ff2_b);
    x = graph.add(x, ff);
  }
  return graph.layer_norm_rows(x, params.final_norm_gain,
                               params.final_norm_bias);
}

GuidanceMap decode(Graph& graph, const Tensor& embedded,
                   const PatchSequence& seq, const ModelParams& params) {
  const ModelConfig& cfg = params.config;
  if (embedded.shape().size() != 2 || embedded.shape()[0] != seq.count() ||
      embedded.shape()[1] != cfg.hidden_dim) {
    throw DimensionError("embedded sequence does not match the patch meta");
  }
  Tensor z = graph.add_rowvec(graph.matmul(embedded, params.decoder_projection),
                              params.decoder_bias);
  // squash into [c_min, 1]: strictly positive guidance
  Tensor squashed =
      graph.affine(graph.sigmoid(z), 1.0 - cfg.c_min, cfg.c_min);
  Tensor padded = graph.reassemble_patches(squashed, seq.n_rows, seq.n_cols,
                                           cfg.patch_size);
  Tensor cropped = padded;
  if (seq.pad_bottom > 0) {
    cropped = graph.slice_rows(cropped, 0, seq.height);
  }
  if (seq.pad_right > 0) {
    cropped = graph.slice_cols(cropped, 0, seq.width);
  }
  return GuidanceMap{seq.height, seq.width, cropped};
}

GuidanceMap forward(Graph& graph, const OccupancyMap& map, Cell start,
                    Cell goal, const ModelParams& params) {
  const PatchSequence seq = patchify_input(map, start, goal, params.config);
  return decode(graph, encode(graph, seq, params), seq, params);
}

GuidanceMap forward(Graph& graph, const PlanningProblem& problem,
                    const ModelParams& params) {
  validate_problem(problem);
  return forward(graph, *problem.map, problem.start, problem.goal, params);
}

void save_checkpoint(const ModelParams& params, const std::string& path) {
  nlohmann::json j;
  j["format_version"] = 1;
  const ModelConfig& c = params.config;
  j["config"] = {{"patch_size", c.patch_size},
                 {"hidden_dim", c.hidden_dim},
                 {"blocks", c.blocks},
                 {"heads", c.heads},
                 {"ff_mult", c.ff_mult},
                 {"n_max", c.n_max},
                 {"include_markers", c.include_markers},
                 {"c_min", c.c_min},
                 {"seed", c.seed}};
  nlohmann::json tensors = nlohmann::json::object();
  ModelParams shared = params;  // handle copy, shares storage
  shared.for_each_tensor([&](const std::string& name, Tensor& t) {
    tensors[name] = {
        {"shape", t.shape()},
        {"data", std::vector<double>(t.data().begin(), t.data().end())}};
  });
  j["tensors"] = std::move(tensors);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump() << "\n";
}

ModelParams load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad checkpoint JSON in " + path + ": " + e.what());
  }
  try {
    if (j.at("format_version").get<int>() != 1) {
      throw IoError(path + ": unsupported checkpoint format version");
    }
    const auto& jc = j.at("config");
    ModelConfig cfg;
    cfg.patch_size = jc.at("patch_size").get<int>();
    cfg.hidden_dim = jc.at("hidden_dim").get<int>();
    cfg.blocks = jc.at("blocks").get<int>();
    cfg.heads = jc.at("heads").get<int>();
    cfg.ff_mult = jc.at("ff_mult").get<int>();
    cfg.n_max = jc.at("n_max").get<int>();
    cfg.include_markers = jc.at("include_markers").get<bool>();
    cfg.c_min = jc.at("c_min").get<double>();
    cfg.seed = jc.at("seed").get<uint64_t>();
    ModelParams params = ModelParams::init(cfg);
    const auto& jt = j.at("tensors");
    for (auto& [name, t] : params.named_tensors()) {
      const auto& entry = jt.at(name);
      const auto shape = entry.at("shape").get<std::vector<int64_t>>();
      auto data = entry.at("data").get<std::vector<double>>();
      if (shape != t.shape()) {
        throw IoError(path + ": tensor " + name + " has unexpected shape");
      }
      std::copy(data.begin(), data.end(), t.data().begin());
    }
    return params;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad checkpoint fields in " + path + ": " + e.what());
  }
}

}  // namespace vitastar
