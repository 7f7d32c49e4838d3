#include "vitastar/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

namespace vitastar {

namespace {

int64_t shape_size(const std::vector<int64_t>& shape) {
  int64_t n = 1;
  for (int64_t e : shape) {
    if (e < 0) throw DimensionError("negative extent in shape");
    n *= e;
  }
  return n;
}

std::string shape_str(const std::vector<int64_t>& shape) {
  std::string s = "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;

}  // namespace

Tensor::Tensor(std::vector<int64_t> shape, std::vector<double> data) {
  if (shape_size(shape) != static_cast<int64_t>(data.size())) {
    throw DimensionError("data length " + std::to_string(data.size()) +
                         " does not match shape " + shape_str(shape));
  }
  impl_ = std::make_shared<Impl>();
  impl_->shape = std::move(shape);
  impl_->data = std::move(data);
}

Tensor Tensor::zeros(std::vector<int64_t> shape) {
  int64_t n = shape_size(shape);
  return Tensor(std::move(shape), std::vector<double>(n, 0.0));
}

Tensor Tensor::full(std::vector<int64_t> shape, double value) {
  int64_t n = shape_size(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value));
}

Tensor::Impl& Tensor::impl() {
  if (!impl_) throw ContractError("use of an undefined tensor");
  return *impl_;
}

const Tensor::Impl& Tensor::impl() const {
  if (!impl_) throw ContractError("use of an undefined tensor");
  return *impl_;
}

const std::vector<int64_t>& Tensor::shape() const { return impl().shape; }

int64_t Tensor::size() const {
  return static_cast<int64_t>(impl().data.size());
}

int64_t Tensor::rows() const {
  const auto& s = impl().shape;
  if (s.size() == 1) return 1;
  if (s.size() == 2) return s[0];
  throw DimensionError("rows() on rank-" + std::to_string(s.size()) +
                       " tensor");
}

int64_t Tensor::cols() const {
  const auto& s = impl().shape;
  if (s.size() == 1) return s[0];
  if (s.size() == 2) return s[1];
  throw DimensionError("cols() on rank-" + std::to_string(s.size()) +
                       " tensor");
}

bool Tensor::same_shape(const Tensor& other) const {
  return impl().shape == other.impl().shape;
}

std::span<const double> Tensor::data() const { return impl().data; }
std::span<double> Tensor::data() { return impl().data; }

double Tensor::value() const {
  if (size() != 1) {
    throw ContractError("value() on tensor of size " + std::to_string(size()));
  }
  return impl().data[0];
}

double Tensor::at(int64_t i) const { return impl().data.at(i); }

double Tensor::at(int64_t r, int64_t c) const {
  return impl().data.at(r * cols() + c);
}

bool Tensor::has_grad() const { return !impl().grad.empty(); }

std::span<double> Tensor::grad() {
  auto& im = impl();
  if (im.grad.empty()) im.grad.assign(im.data.size(), 0.0);
  return im.grad;
}

std::span<const double> Tensor::grad() const {
  const auto& im = impl();
  if (im.grad.empty()) {
    throw ContractError("gradient read before any backward pass");
  }
  return im.grad;
}

void Tensor::zero_grad() {
  auto& im = impl();
  std::fill(im.grad.begin(), im.grad.end(), 0.0);
}

// ---------------------------------------------------------------------------
// Graph

Tensor Graph::push(std::vector<Tensor> inputs, Tensor output,
                   std::function<void(Node&)> back) {
  if (recording_) {
    nodes_.push_back(
        Node{std::move(inputs), std::move(output), std::move(back)});
    return nodes_.back().output;
  }
  return output;
}

Tensor Graph::matmul(const Tensor& a, const Tensor& b) {
  if (a.shape().size() != 2 || b.shape().size() != 2 ||
      a.shape()[1] != b.shape()[0]) {
    throw DimensionError("matmul " + shape_str(a.shape()) + " x " +
                         shape_str(b.shape()));
  }
  const int64_t n = a.shape()[0], k = a.shape()[1], m = b.shape()[1];
  Tensor out = Tensor::zeros({n, m});
  auto ad = a.data(), bd = b.data();
  auto od = out.data();
  for (int64_t i = 0; i < n; ++i) {
    for (int64_t p = 0; p < k; ++p) {
      const double av = ad[i * k + p];
      if (av == 0.0) continue;
      for (int64_t j = 0; j < m; ++j) od[i * m + j] += av * bd[p * m + j];
    }
  }
  return push({a, b}, out, [n, k, m](Node& nd) {
    if (!nd.output.has_grad()) return;
    auto go = nd.output.grad();
    Tensor a = nd.inputs[0], b = nd.inputs[1];
    auto ga = a.grad(), gb = b.grad();
    auto ad = a.data(), bd = b.data();
    // dA += dC * B^T ; dB += A^T * dC
    for (int64_t i = 0; i < n; ++i) {
      for (int64_t j = 0; j < m; ++j) {
        const double g = go[i * m + j];
        if (g == 0.0) continue;
        for (int64_t p = 0; p < k; ++p) {
          ga[i * k + p] += g * bd[p * m + j];
          gb[p * m + j] += ad[i * k + p] * g;
        }
      }
    }
  });
}

Tensor Graph::add(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) {
    throw DimensionError("add " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
  }
  Tensor out = Tensor::zeros(a.shape());
  auto od = out.data();
  auto ad = a.data(), bd = b.data();
  for (int64_t i = 0; i < a.size(); ++i) od[i] = ad[i] + bd[i];
  return push({a, b}, out, [](Node& nd) {
    if (!nd.output.has_grad()) return;
    auto go = nd.output.grad();
    auto ga = nd.inputs[0].grad(), gb = nd.inputs[1].grad();
    for (size_t i = 0; i < go.size(); ++i) {
      ga[i] += go[i];
      gb[i] += go[i];
    }
  });
}

Tensor Graph::sub(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) {
    throw DimensionError("sub " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
  }
  Tensor out = Tensor::zeros(a.shape());
  auto od = out.data();
  auto ad = a.data(), bd = b.data();
  for (int64_t i = 0; i < a.size(); ++i) od[i] = ad[i] - bd[i];
  return push({a, b}, out, [](Node& nd) {
    if (!nd.output.has_grad()) return;
    auto go = nd.output.grad();
    auto ga = nd.inputs[0].grad(), gb = nd.inputs[1].grad();
    for (size_t i = 0; i < go.size(); ++i) {
      ga[i] += go[i];
      gb[i] -= go[i];
    }
  });
}

Tensor Graph::mul(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) {
    throw DimensionError("mul " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
  }
  Tensor out = Tensor::zeros(a.shape());
  auto od = out.data();
  auto ad = a.data(), bd = b.data();
  for (int64_t i = 0; i < a.size(); ++i) od[i] = ad[i] * bd[i];
  return push({a, b}, out, [](Node& nd) {
    if (!nd.output.has_grad()) return;
    auto go = nd.output.grad();
    Tensor a = nd.inputs[0], b = nd.inputs[1];
    auto ga = a.grad(), gb = b.grad();
    auto ad = a.data(), bd = b.data();
    for (size_t i = 0; i < go.size(); ++i) {
      ga[i] += go[i] * bd[i];
      gb[i] += go[i] * ad[i];
    }
  });
}

Tensor Graph::neg(const Tensor& a) { return scale(a, -1.0); }

Tensor Graph::exp(const Tensor& a) {
  Tensor out = Tensor::zeros(a.shape());
  auto od = out.data();
  auto ad = a.data();
  for (int64_t i = 0; i < a.size(); ++i) od[i] = std::exp(ad[i]);
  return push({a}, out, [](Node& nd) {
    if (!nd.output.has_grad()) return;
    auto go = nd.output.grad();
    auto od = nd.output.data();
    auto ga = nd.inputs[0].grad();
    for (size_t i = 0; i < go.size(); ++i) ga[i] += go[i] * od[i];
  });
}

Tensor Graph::abs(const Tensor& a) {
  Tensor out = Tensor::zeros(a.shape());
  auto od = out.data();
  auto ad = a.data();
  for (int64_t i = 0; i < a.size(); ++i) od[i] = std::fabs(ad[i]);
  return push({a}, out, [](Node& nd) {
    if (!nd.output.has_grad()) return;
    auto go = nd.output.grad();
    auto ad = nd.inputs[0].data();
    auto ga = nd.inputs[0].grad();
    // subgradient 0 at the kink
    for (size_t i = 0; i < go.size(); ++i) {
      ga[i] += go[i] * (ad[i] > 0.0 ? 1.0 : (ad[i] < 0.0 ? -1.0 : 0.0));
    }
  });
}

Tensor Graph::gelu(const Tensor& a) {
  Tensor out = Tensor::zeros(a.shape());
  auto od = out.data();
  auto ad = a.data();
  for (int64_t i = 0; i < a.size(); ++i) {
    od[i] = 0.5 * ad[i] * (1.0 + std::erf(ad[i] * kInvSqrt2));
  }
  return push({a}, out, [](Node& nd) {
    if (!nd.output.has_grad()) return;
    auto go = nd.output.grad();
    auto ad = nd.inputs[0].data();
    auto ga = nd.inputs[0].grad();
    for (size_t i = 0; i < go.size(); ++i) {
      const double x = ad[i];
      const double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
      const double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
      ga[i] += go[i] * (cdf + x * pdf);
    }
  });
}

Tensor Graph::sigmoid(const Tensor& a) {
  Tensor out = Tensor::zeros(a.shape());
  auto od = out.data();
  auto ad = a.data();
  for (int64_t i = 0; i < a.size(); ++i) {
    od[i] = 1.0 / (1.0 + std::exp(-ad[i]));
  }
  return push({a}, out, [](Node& nd) {
    if (!nd.output.has_grad()) return;
    auto go = nd.output.grad();
    auto od = nd.output.data();
    auto ga = nd.inputs[0].grad();
    for (size_t i = 0; i < go.size(); ++i) {
      ga[i] += go[i] * od[i] * (1.0 - od[i]);
    }
  });
}

Tensor Graph::scale(const Tensor& a, double factor) {
  Tensor out = Tensor::zeros(a.shape());
  auto od = out.data();
  auto ad = a.data();
  for (int64_t i = 0; i < a.size(); ++i) od[i] = ad[i] * factor;
  return push({a}, out, [factor](Node& nd) {
    if (!nd.output.has_grad()) return;
    auto go = nd.output.grad();
    auto ga = nd.inputs[0].grad();
    for (size_t i = 0; i < go.size(); ++i) ga[i] += go[i] * factor;
  });
}

Tensor Graph::affine(const Tensor& a, double mul, double add) {
  Tensor out = Tensor::zeros(a.shape());
  auto od = out.data();
  auto ad = a.data();
  for (int64_t i = 0; i < a.size(); ++i) od[i] = ad[i] * mul + add;
  return push({a}, out, [mul](Node& nd) {
    if (!nd.output.has_grad()) return;
    auto go = nd.output.grad();
    auto ga = nd.inputs[0].grad();
    for (size_t i = 0; i < go.size(); ++i) ga[i] += go[i] * mul;
  });
}

Tensor Graph::div_scalar(const Tensor& a, double divisor) {
  if (divisor == 0.0) throw ContractError("division by scalar zero");
  return scale(a, 1.0 / divisor);
}

Tensor Graph::transpose(const Tensor& a) {
  if (a.shape().size() != 2) throw DimensionError("transpose needs rank 2");
  const int64_t n = a.shape()[0], m = a.shape()[1];
  Tensor out = Tensor::zeros({m, n});
  auto od = out.data();
  auto ad = a.data();
  for (int64_t i = 0; i < n; ++i)
    for (int64_t j = 0; j < m; ++j) od[j * n + i] = ad[i * m + j];
  return push({a}, out, [n, m](Node& nd) {
    if (!nd.output.has_grad()) return;
    auto go = nd.output.grad();
    auto ga = nd.inputs[0].grad();
    for (int64_t i = 0; i < n; ++i)
      for (int64_t j = 0; j < m; ++j) ga[i * m + j] += go[j * n + i];
  });
}

Tensor Graph::slice_rows(const Tensor& a, int64_t r0, int64_t r1) {
  if (a.shape().size() != 2) throw DimensionError("slice_rows needs rank 2");
  const int64_t n = a.shape()[0], m = a.shape()[1];
  if (r0 < 0 || r1 > n || r0 >= r1) {
    throw DimensionError("slice_rows range [" + std::to_string(r0) + "," +
                         std::to_string(r1) + ") of " + std::to_string(n));
  }
  Tensor out = Tensor::zeros({r1 - r0, m});
  auto od = out.data();
  auto ad = a.data();
  std::copy(ad.begin() + r0 * m, ad.begin() + r1 * m, od.begin());
  return push({a}, out, [r0, m](Node& nd) {
    if (!nd.output.has_grad()) return;
    auto go = nd.output.grad();
    auto ga = nd.inputs[0].grad();
    for (size_t i = 0; i < go.size(); ++i) ga[r0 * m + i] += go[i];
  });
}

Tensor Graph::slice_cols(const Tensor& a, int64_t c0, int64_t c1) {
  if (a.shape().size() != 2) throw DimensionError("slice_cols needs rank 2");
  const int64_t n = a.shape()[0], m = a.shape()[1];
  if (c0 < 0 || c1 > m || c0 >= c1) {
    throw DimensionError("slice_cols range [" + std::to_string(c0) + "," +
                         std::to_string(c1) + ") of " + std::to_string(m));
  }
  const int64_t w = c1 - c0;
  Tensor out = Tensor::zeros({n, w});
  auto od = out.data();
  auto ad = a.data();
  for (int64_t i = 0; i < n; ++i)
    for (int64_t j = 0; j < w; ++j) od[i * w + j] = ad[i * m + c0 + j];
  return push({a}, out, [n, m, c0, w](Node& nd) {
    if (!nd.output.has_grad()) return;
    auto go = nd.output.grad();
    auto ga = nd.inputs[0].grad();
    for (int64_t i = 0; i < n; ++i)
      for (int64_t j = 0; j < w; ++j) ga[i * m + c0 + j] += go[i * w + j];
  });
}

Tensor Graph::concat_cols(std::span<const Tensor> parts) {
  if (parts.empty()) throw DimensionError("concat_cols of nothing");
  const int64_t n = parts[0].shape().at(0);
  int64_t total = 0;
  for (const Tensor& p : parts) {
    if (p.shape().size() != 2 || p.shape()[0] != n) {
      throw DimensionError("concat_cols row mismatch");
    }
    total += p.shape()[1];
  }
  Tensor out = Tensor::zeros({n, total});
  auto od = out.data();
  int64_t off = 0;
  std::vector<Tensor> inputs;
  std::vector<int64_t> offsets;
  for (const Tensor& p : parts) {
    const int64_t w = p.shape()[1];
    auto pd = p.data();
    for (int64_t i = 0; i < n; ++i)
      for (int64_t j = 0; j < w; ++j) od[i * total + off + j] = pd[i * w + j];
    inputs.push_back(p);
    offsets.push_back(off);
    off += w;
  }
  return push(std::move(inputs), out, [n, total, offsets](Node& nd) {
    if (!nd.output.has_grad()) return;
    auto go = nd.output.grad();
    for (size_t k = 0; k < nd.inputs.size(); ++k) {
      Tensor& p = nd.inputs[k];
      const int64_t w = p.shape()[1];
      auto gp = p.grad();
      for (int64_t i = 0; i < n; ++i)
        for (int64_t j = 0; j < w; ++j)
          gp[i * w + j] += go[i * total + offsets[k] + j];
    }
  });
}

Tensor Graph::add_rowvec(const Tensor& a, const Tensor& row) {
  if (a.shape().size() != 2 || row.size() != a.shape()[1]) {
    throw DimensionError("add_rowvec " + shape_str(a.shape()) + " + " +
                         shape_str(row.shape()));
  }
  const int64_t n = a.shape()[0], m = a.shape()[1];
  Tensor out = Tensor::zeros(a.shape());
  auto od = out.data();
  auto ad = a.data(), rd = row.data();
  for (int64_t i = 0; i < n; ++i)
    for (int64_t j = 0; j < m; ++j) od[i * m + j] = ad[i * m + j] + rd[j];
  return push({a, row}, out, [n, m](Node& nd) {
    if (!nd.output.has_grad()) return;
    auto go = nd.output.grad();
    auto ga = nd.inputs[0].grad();
    auto gr = nd.inputs[1].grad();
    for (int64_t i = 0; i < n; ++i)
      for (int64_t j = 0; j < m; ++j) {
        ga[i * m + j] += go[i * m + j];
        gr[j] += go[i * m + j];
      }
  });
}

Tensor Graph::row_softmax(const Tensor& a) {
  if (a.shape().size() != 2) throw DimensionError("row_softmax needs rank 2");
  const int64_t n = a.shape()[0], m = a.shape()[1];
  Tensor out = Tensor::zeros(a.shape());
  auto od = out.data();
  auto ad = a.data();
  for (int64_t i = 0; i < n; ++i) {
    double mx = ad[i * m];
    for (int64_t j = 1; j < m; ++j) mx = std::max(mx, ad[i * m + j]);
    double z = 0.0;
    for (int64_t j = 0; j < m; ++j) {
      od[i * m + j] = std::exp(ad[i * m + j] - mx);
      z += od[i * m + j];
    }
    for (int64_t j = 0; j < m; ++j) od[i * m + j] /= z;
  }
  return push({a}, out, [n, m](Node& nd) {
    if (!nd.output.has_grad()) return;
    auto go = nd.output.grad();
    auto od = nd.output.data();
    auto ga = nd.inputs[0].grad();
    for (int64_t i = 0; i < n; ++i) {
      double dot = 0.0;
      for (int64_t j = 0; j < m; ++j) dot += go[i * m + j] * od[i * m + j];
      for (int64_t j = 0; j < m; ++j) {
        ga[i * m + j] += od[i * m + j] * (go[i * m + j] - dot);
      }
    }
  });
}

Tensor Graph::layer_norm_rows(const Tensor& a, const Tensor& gain,
                              const Tensor& bias, double eps) {
  if (a.shape().size() != 2) throw DimensionError("layer_norm needs rank 2");
  const int64_t n = a.shape()[0], m = a.shape()[1];
  if (gain.size() != m || bias.size() != m) {
    throw DimensionError("layer_norm gain/bias length");
  }
  Tensor out = Tensor::zeros(a.shape());
  Tensor xhat = Tensor::zeros(a.shape());  // cached for the backward rule
  Tensor inv_sigma = Tensor::zeros({n});
  auto od = out.data();
  auto xd = xhat.data();
  auto sd = inv_sigma.data();
  auto ad = a.data(), gd = gain.data(), bd = bias.data();
  for (int64_t i = 0; i < n; ++i) {
    double mean = 0.0;
    for (int64_t j = 0; j < m; ++j) mean += ad[i * m + j];
    mean /= static_cast<double>(m);
    double var = 0.0;
    for (int64_t j = 0; j < m; ++j) {
      const double d = ad[i * m + j] - mean;
      var += d * d;
    }
    var /= static_cast<double>(m);
    const double inv = 1.0 / std::sqrt(var + eps);
    sd[i] = inv;
    for (int64_t j = 0; j < m; ++j) {
      xd[i * m + j] = (ad[i * m + j] - mean) * inv;
      od[i * m + j] = gd[j] * xd[i * m + j] + bd[j];
    }
  }
  return push({a, gain, bias}, out, [n, m, xhat, inv_sigma](Node& nd) {
    if (!nd.output.has_grad()) return;
    auto go = nd.output.grad();
    Tensor a = nd.inputs[0], gain = nd.inputs[1], bias = nd.inputs[2];
    auto ga = a.grad(), gg = gain.grad(), gb = bias.grad();
    auto gaind = gain.data();
    auto xd = xhat.data();
    auto sd = inv_sigma.data();
    for (int64_t i = 0; i < n; ++i) {
      double mean_dx = 0.0, mean_dx_x = 0.0;
      for (int64_t j = 0; j < m; ++j) {
        const double dxh = go[i * m + j] * gaind[j];
        mean_dx += dxh;
        mean_dx_x += dxh * xd[i * m + j];
      }
      mean_dx /= static_cast<double>(m);
      mean_dx_x /= static_cast<double>(m);
      for (int64_t j = 0; j < m; ++j) {
        const double dxh = go[i * m + j] * gaind[j];
        ga[i * m + j] +=
            sd[i] * (dxh - mean_dx - xd[i * m + j] * mean_dx_x);
        gg[j] += go[i * m + j] * xd[i * m + j];
        gb[j] += go[i * m + j];
      }
    }
  });
}

Tensor Graph::masked_softmax(const Tensor& scores, const Tensor& mask,
                             double tau) {
  if (!scores.same_shape(mask)) {
    throw DimensionError("masked_softmax " + shape_str(scores.shape()) +
                         " vs mask " + shape_str(mask.shape()));
  }
  if (!(tau > 0.0)) throw ContractError("masked_softmax requires tau > 0");
  const int64_t n = scores.size();
  auto sd = scores.data();
  auto md = mask.data();
  double mmin = 0.0;
  bool any = false;
  for (int64_t i = 0; i < n; ++i) {
    const double mv = md[i];
    if (mv != 0.0 && mv != 1.0) {
      throw ContractError("masked_softmax mask entries must be 0 or 1");
    }
    if (mv == 1.0) {
      mmin = any ? std::min(mmin, sd[i]) : sd[i];
      any = true;
    }
  }
  if (!any) throw EmptyOpenListError("masked_softmax over an all-zero mask");
  Tensor out = Tensor::zeros(scores.shape());
  auto od = out.data();
  double z = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    if (md[i] == 1.0) {
      od[i] = std::exp(-(sd[i] - mmin) / tau);
      z += od[i];
    }
  }
  for (int64_t i = 0; i < n; ++i) od[i] /= z;
  // The min shift cancels in the normalized output, so the backward rule
  // treats it as a constant. Mask is a selection constant, no gradient.
  return push({scores, mask}, out, [n, tau](Node& nd) {
    if (!nd.output.has_grad()) return;
    auto go = nd.output.grad();
    auto od = nd.output.data();
    auto md = nd.inputs[1].data();
    auto gs = nd.inputs[0].grad();
    double dot = 0.0;
    for (int64_t i = 0; i < n; ++i) dot += go[i] * od[i];
    for (int64_t i = 0; i < n; ++i) {
      if (md[i] == 1.0) gs[i] += (-od[i] / tau) * (go[i] - dot);
    }
  });
}

Tensor Graph::straight_through(const Tensor& soft, int64_t hard_index) {
  if (hard_index < 0 || hard_index >= soft.size()) {
    throw ContractError("straight_through index out of range");
  }
  Tensor out = Tensor::zeros(soft.shape());
  out.data()[hard_index] = 1.0;
  return push({soft}, out, [](Node& nd) {
    if (!nd.output.has_grad()) return;
    auto go = nd.output.grad();
    auto gs = nd.inputs[0].grad();
    for (size_t i = 0; i < go.size(); ++i) gs[i] += go[i];
  });
}

Tensor Graph::gather(const Tensor& a, int64_t index) {
  if (index < 0 || index >= a.size()) {
    throw ContractError("gather index out of range");
  }
  Tensor out = Tensor::scalar(a.data()[index]);
  return push({a}, out, [index](Node& nd) {
    if (!nd.output.has_grad()) return;
    nd.inputs[0].grad()[index] += nd.output.grad()[0];
  });
}

Tensor Graph::assemble(std::vector<int64_t> shape,
                       std::span<const std::pair<int64_t, Tensor>> entries) {
  Tensor out = Tensor::zeros(std::move(shape));
  auto od = out.data();
  std::vector<Tensor> inputs;
  std::vector<int64_t> indices;
  inputs.reserve(entries.size());
  indices.reserve(entries.size());
  for (const auto& [idx, t] : entries) {
    if (idx < 0 || idx >= out.size()) {
      throw ContractError("assemble index out of range");
    }
    if (t.size() != 1) {
      throw DimensionError("assemble entries must be single-element tensors");
    }
    od[idx] = t.data()[0];
    inputs.push_back(t);
    indices.push_back(idx);
  }
  return push(std::move(inputs), out, [indices](Node& nd) {
    if (!nd.output.has_grad()) return;
    auto go = nd.output.grad();
    for (size_t k = 0; k < indices.size(); ++k) {
      nd.inputs[k].grad()[0] += go[indices[k]];
    }
  });
}

Tensor Graph::reassemble_patches(const Tensor& a, int64_t n_rows,
                                 int64_t n_cols, int64_t patch_size) {
  const int64_t s = patch_size;
  if (a.shape().size() != 2 || a.shape()[0] != n_rows * n_cols ||
      a.shape()[1] != s * s) {
    throw DimensionError("reassemble_patches expects (n_rows*n_cols) x S^2");
  }
  const int64_t out_w = n_cols * s;
  Tensor out = Tensor::zeros({n_rows * s, out_w});
  auto od = out.data();
  auto ad = a.data();
  auto grid_index = [=](int64_t token, int64_t within) {
    const int64_t pr = token / n_cols, pc = token % n_cols;
    const int64_t r = pr * s + within / s, c = pc * s + within % s;
    return r * out_w + c;
  };
  for (int64_t t = 0; t < n_rows * n_cols; ++t)
    for (int64_t k = 0; k < s * s; ++k)
      od[grid_index(t, k)] = ad[t * s * s + k];
  return push({a}, out, [n_rows, n_cols, s, grid_index](Node& nd) {
    if (!nd.output.has_grad()) return;
    auto go = nd.output.grad();
    auto ga = nd.inputs[0].grad();
    for (int64_t t = 0; t < n_rows * n_cols; ++t)
      for (int64_t k = 0; k < s * s; ++k)
        ga[t * s * s + k] += go[grid_index(t, k)];
  });
}

Tensor Graph::sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.data()) s += v;
  Tensor out = Tensor::scalar(s);
  return push({a}, out, [](Node& nd) {
    if (!nd.output.has_grad()) return;
    const double g = nd.output.grad()[0];
    auto ga = nd.inputs[0].grad();
    for (size_t i = 0; i < ga.size(); ++i) ga[i] += g;
  });
}

void Graph::backward(const Tensor& loss) {
  if (!recording_) {
    throw ContractError("backward on a non-recording graph");
  }
  if (loss.size() != 1) {
    throw ContractError("backward requires a scalar loss");
  }
  Tensor seed = loss;
  seed.grad()[0] += 1.0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    it->back(*it);
  }
}

}  // namespace vitastar
