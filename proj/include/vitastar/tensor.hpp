#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vitastar/errors.hpp"

namespace vitastar {

/// Dense row-major tensor of doubles with an optional gradient buffer.
///
/// Values are immutable once the tensor participates in a recorded graph;
/// the gradient buffer is allocated lazily on first backward touch.
/// Copies share storage (handle semantics), which is what lets the tape
/// accumulate gradients into leaves owned by the caller.
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::vector<int64_t> shape, std::vector<double> data);

  static Tensor zeros(std::vector<int64_t> shape);
  static Tensor full(std::vector<int64_t> shape, double value);
  static Tensor scalar(double value) { return Tensor({1}, {value}); }

  bool defined() const { return impl_ != nullptr; }
  const std::vector<int64_t>& shape() const;
  int64_t size() const;
  /// Rows/cols of a rank-2 tensor; rank-1 tensors read as a single row.
  int64_t rows() const;
  int64_t cols() const;
  bool same_shape(const Tensor& other) const;

  std::span<const double> data() const;
  std::span<double> data();
  double value() const;  // single-element tensors only
  double at(int64_t i) const;
  double at(int64_t r, int64_t c) const;

  bool has_grad() const;
  /// Gradient buffer, zero-initialized on first access.
  std::span<double> grad();
  std::span<const double> grad() const;  // throws if never touched
  void zero_grad();

  /// Identity of the underlying storage, for dedup in parameter lists.
  const void* id() const { return impl_.get(); }

 private:
  struct Impl {
    std::vector<int64_t> shape;
    std::vector<double> data;
    std::vector<double> grad;  // empty until requested
  };
  std::shared_ptr<Impl> impl_;
  Impl& impl();
  const Impl& impl() const;
};

/// Tape of recorded tensor operations for one reverse-mode sweep.
///
/// Every op appends a node holding its inputs, output and backward rule,
/// so the tape order is already topological. A graph constructed with
/// recording=false computes values only (inference mode). Graphs are
/// single-threaded; independent graphs may run on independent threads.
class Graph {
 public:
  explicit Graph(bool recording = true) : recording_(recording) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  bool recording() const { return recording_; }
  std::size_t node_count() const { return nodes_.size(); }

  Tensor matmul(const Tensor& a, const Tensor& b);
  Tensor add(const Tensor& a, const Tensor& b);
  Tensor sub(const Tensor& a, const Tensor& b);
  Tensor mul(const Tensor& a, const Tensor& b);
  Tensor neg(const Tensor& a);
  Tensor exp(const Tensor& a);
  Tensor abs(const Tensor& a);
  Tensor gelu(const Tensor& a);
  Tensor sigmoid(const Tensor& a);
  Tensor scale(const Tensor& a, double factor);
  /// a * mul + add, elementwise with scalar constants.
  Tensor affine(const Tensor& a, double mul, double add);
  Tensor div_scalar(const Tensor& a, double divisor);
  Tensor transpose(const Tensor& a);
  Tensor slice_rows(const Tensor& a, int64_t r0, int64_t r1);
  Tensor slice_cols(const Tensor& a, int64_t c0, int64_t c1);
  Tensor concat_cols(std::span<const Tensor> parts);
  /// a (N x D) plus a row vector broadcast over every row.
  Tensor add_rowvec(const Tensor& a, const Tensor& row);
  Tensor row_softmax(const Tensor& a);
  Tensor layer_norm_rows(const Tensor& a, const Tensor& gain,
                         const Tensor& bias, double eps = 1e-5);
  /// exp(-(scores - min)/tau) over mask==1 entries, normalized to sum 1;
  /// zero elsewhere. The min shift only guards overflow, the normalized
  /// result is unchanged by it. Mask takes no gradient.
  Tensor masked_softmax(const Tensor& scores, const Tensor& mask, double tau);
  /// Forward: one-hot at hard_index. Backward: identity into `soft`.
  Tensor straight_through(const Tensor& soft, int64_t hard_index);
  /// Single element a[index] as a 1-tensor.
  Tensor gather(const Tensor& a, int64_t index);
  /// Scatter single-element tensors into a zero tensor of `shape`.
  /// Indices are flat row-major and must be distinct.
  Tensor assemble(std::vector<int64_t> shape,
                  std::span<const std::pair<int64_t, Tensor>> entries);
  /// Rearranges a (n_rows*n_cols) x S^2 tensor of flattened patches into
  /// the (n_rows*S) x (n_cols*S) grid they tile, row-major.
  Tensor reassemble_patches(const Tensor& a, int64_t n_rows, int64_t n_cols,
                            int64_t patch_size);
  Tensor sum(const Tensor& a);

  /// Reverse sweep from a scalar loss. Gradients accumulate across calls;
  /// zero_grad the leaves to reset.
  void backward(const Tensor& loss);

 private:
  struct Node {
    std::vector<Tensor> inputs;
    Tensor output;
    std::function<void(Node&)> back;
  };
  Tensor push(std::vector<Tensor> inputs, Tensor output,
              std::function<void(Node&)> back);

  std::vector<Node> nodes_;
  bool recording_;
};

/// Deterministic RNG. Raw mt19937_64 draws are pinned by the standard,
/// unlike the std distributions, so sampled values reproduce across
/// platforms as well as across runs.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next() { return state_(); }
  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(state_() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n).
  int64_t below(int64_t n) {
    return static_cast<int64_t>(state_() % static_cast<uint64_t>(n));
  }
  uint64_t fork() { return state_(); }

 private:
  std::mt19937_64 state_;
};

}  // namespace vitastar
