// Copyright 2026 The urbanrest Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Forward operators and trainable layers with analytic gradients.

#include <algorithm>
#include <cmath>
#include <limits>

#include "urbanrest/error.hpp"
#include "urbanrest/gnn.hpp"

namespace urbanrest {
namespace {

void ApplyActivation(DenseMatrix& z, Activation act) {
  if (act == Activation::kRelu) ReluInPlace(z);
}

// grad *= act'(pre)
void ActivationBackward(DenseMatrix& grad, const DenseMatrix& pre, Activation act) {
  if (act == Activation::kIdentity) return;
  auto& g = grad.data();
  const auto& p = pre.data();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(p[i] > 0.0)) g[i] = 0.0;
  }
}

void MaybeAddBias(DenseMatrix& z, const DenseMatrix& bias) {
  if (bias.size() > 0) AddRowBroadcast(z, bias);
}

std::vector<std::size_t> Offsets(const NeighborLists& nb) {
  std::vector<std::size_t> off(nb.size() + 1, 0);
  for (std::size_t i = 0; i < nb.size(); ++i) off[i + 1] = off[i] + nb[i].size();
  return off;
}

double Dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

struct HeadCache {
  DenseMatrix z;              // H W
  std::vector<double> score;  // pre-LeakyReLU score per (i, k)
  std::vector<double> alpha;  // attention per (i, k)
};

// Writes scale * sum_k alpha_ik z_{nb[i][k]} into out[:, col .. col+f).
void GatHeadForward(const DenseMatrix& h, const NeighborLists& nb,
                    const std::vector<std::size_t>& off, const GatHead& head, HeadCache& cache,
                    DenseMatrix& out, std::size_t col, double scale) {
  const std::size_t n = h.rows();
  const std::size_t f = head.w.cols();
  if (head.att_self.rows() != 1 || head.att_self.cols() != f || head.att_neigh.rows() != 1 ||
      head.att_neigh.cols() != f) {
    ThrowNumeric("GAT attention vector shape mismatch");
  }
  cache.z = MatMul(h, head.w);
  std::vector<double> es(n), en(n);
  for (std::size_t i = 0; i < n; ++i) {
    es[i] = Dot(cache.z.Row(i), head.att_self.Row(0));
    en[i] = Dot(cache.z.Row(i), head.att_neigh.Row(0));
  }
  cache.score.assign(off[n], 0.0);
  cache.alpha.assign(off[n], 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (nb[i].empty()) {
      ThrowData("GAT node " + std::to_string(i) + " has no incident edges and no self-loop");
    }
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < nb[i].size(); ++k) {
      const double s = es[i] + en[nb[i][k]];
      cache.score[off[i] + k] = s;
      const double e = s > 0.0 ? s : kLeakyReluSlope * s;
      cache.alpha[off[i] + k] = e;
      mx = std::max(mx, e);
    }
    double total = 0.0;
    for (std::size_t k = 0; k < nb[i].size(); ++k) {
      double& a = cache.alpha[off[i] + k];
      a = std::exp(a - mx);
      total += a;
    }
    auto orow = out.Row(i);
    for (std::size_t k = 0; k < nb[i].size(); ++k) {
      double& a = cache.alpha[off[i] + k];
      a /= total;
      const auto zj = cache.z.Row(nb[i][k]);
      for (std::size_t c = 0; c < f; ++c) orow[col + c] += scale * a * zj[c];
    }
  }
}

// grad_head is d loss / d head output (n x f). Accumulates into dw, das, dan
// and returns d loss / d z.
DenseMatrix GatHeadBackward(const DenseMatrix& grad_head, const NeighborLists& nb,
                            const std::vector<std::size_t>& off, const GatHead& head,
                            const HeadCache& cache, DenseMatrix& d_att_self,
                            DenseMatrix& d_att_neigh) {
  const std::size_t n = grad_head.rows();
  const std::size_t f = grad_head.cols();
  DenseMatrix dz(n, f);
  std::vector<double> d_es(n, 0.0), d_en(n, 0.0);
  std::vector<double> dalpha;
  for (std::size_t i = 0; i < n; ++i) {
    const auto go = grad_head.Row(i);
    const std::size_t deg = nb[i].size();
    dalpha.assign(deg, 0.0);
    double weighted = 0.0;
    for (std::size_t k = 0; k < deg; ++k) {
      const std::size_t j = nb[i][k];
      const double a = cache.alpha[off[i] + k];
      dalpha[k] = Dot(go, cache.z.Row(j));
      weighted += a * dalpha[k];
      auto dzj = dz.Row(j);
      for (std::size_t c = 0; c < f; ++c) dzj[c] += a * go[c];
    }
    for (std::size_t k = 0; k < deg; ++k) {
      const double a = cache.alpha[off[i] + k];
      const double de = a * (dalpha[k] - weighted);
      const double ds = cache.score[off[i] + k] > 0.0 ? de : kLeakyReluSlope * de;
      d_es[i] += ds;
      d_en[nb[i][k]] += ds;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto zi = cache.z.Row(i);
    auto dzi = dz.Row(i);
    for (std::size_t c = 0; c < f; ++c) {
      d_att_self(0, c) += d_es[i] * zi[c];
      d_att_neigh(0, c) += d_en[i] * zi[c];
      dzi[c] += d_es[i] * head.att_self(0, c) + d_en[i] * head.att_neigh(0, c);
    }
  }
  return dz;
}

SparseMatrix MeanOperator(const NeighborLists& nb) {
  std::vector<SparseMatrix::Entry> entries;
  for (std::size_t i = 0; i < nb.size(); ++i) {
    const double w = nb[i].empty() ? 0.0 : 1.0 / static_cast<double>(nb[i].size());
    for (std::size_t j : nb[i]) entries.push_back({i, j, w});
  }
  return SparseMatrix(nb.size(), std::move(entries));
}

Parameter MakeParam(std::string name, DenseMatrix value, bool decay) {
  Parameter p;
  p.name = std::move(name);
  p.grad = DenseMatrix(value.rows(), value.cols());
  p.adam_m = DenseMatrix(value.rows(), value.cols());
  p.adam_v = DenseMatrix(value.rows(), value.cols());
  p.value = std::move(value);
  p.decay = decay;
  return p;
}

// --- layers ------------------------------------------------------------------

class DenseBase : public Layer {
 protected:
  std::vector<Parameter> params_;
  DenseMatrix input_;
  DenseMatrix pre_;
  Activation act_ = Activation::kRelu;

 public:
  std::vector<Parameter*> Parameters() override {
    std::vector<Parameter*> out;
    for (auto& p : params_) out.push_back(&p);
    return out;
  }
};

class GcnLayer : public DenseBase {
 public:
  GcnLayer(std::size_t in, std::size_t out, Activation act, Rng& rng) {
    act_ = act;
    params_.push_back(MakeParam("weight", GlorotUniform(in, out, rng), true));
    params_.push_back(MakeParam("bias", DenseMatrix(1, out), false));
  }
  std::string kind() const override { return "gcn"; }

  DenseMatrix Forward(const DenseMatrix& in, const PreparedGraph& graph) override {
    input_ = in;
    pre_ = graph.gcn_operator().Multiply(MatMul(in, params_[0].value));
    AddRowBroadcast(pre_, params_[1].value);
    DenseMatrix out = pre_;
    ApplyActivation(out, act_);
    return out;
  }

  DenseMatrix Backward(const DenseMatrix& grad_out, const PreparedGraph& graph) override {
    DenseMatrix dz = grad_out;
    ActivationBackward(dz, pre_, act_);
    AddInPlace(params_[1].grad, ColumnSums(dz));
    const DenseMatrix dhw = graph.gcn_operator().MultiplyTransposed(dz);
    AddInPlace(params_[0].grad, MatMulTransA(input_, dhw));
    return MatMulTransB(dhw, params_[0].value);
  }
};

class SageLayer : public DenseBase {
 public:
  SageLayer(std::size_t in, std::size_t out, Activation act, Rng& rng) {
    act_ = act;
    params_.push_back(MakeParam("weight_self", GlorotUniform(in, out, rng), true));
    params_.push_back(MakeParam("weight_neigh", GlorotUniform(in, out, rng), true));
    params_.push_back(MakeParam("bias", DenseMatrix(1, out), false));
  }
  std::string kind() const override { return "sage"; }

  DenseMatrix Forward(const DenseMatrix& in, const PreparedGraph& graph) override {
    input_ = in;
    mean_ = graph.mean_operator().Multiply(in);
    pre_ = MatMul(in, params_[0].value);
    AddInPlace(pre_, MatMul(mean_, params_[1].value));
    AddRowBroadcast(pre_, params_[2].value);
    DenseMatrix out = pre_;
    ApplyActivation(out, act_);
    return out;
  }

  DenseMatrix Backward(const DenseMatrix& grad_out, const PreparedGraph& graph) override {
    DenseMatrix dz = grad_out;
    ActivationBackward(dz, pre_, act_);
    AddInPlace(params_[0].grad, MatMulTransA(input_, dz));
    AddInPlace(params_[1].grad, MatMulTransA(mean_, dz));
    AddInPlace(params_[2].grad, ColumnSums(dz));
    DenseMatrix dh = MatMulTransB(dz, params_[0].value);
    AddInPlace(dh, graph.mean_operator().MultiplyTransposed(MatMulTransB(dz, params_[1].value)));
    return dh;
  }

 private:
  DenseMatrix mean_;
};

class MlpLayer : public DenseBase {
 public:
  MlpLayer(std::size_t in, std::size_t out, Activation act, Rng& rng) {
    act_ = act;
    params_.push_back(MakeParam("weight", GlorotUniform(in, out, rng), true));
    params_.push_back(MakeParam("bias", DenseMatrix(1, out), false));
  }
  std::string kind() const override { return "mlp"; }

  DenseMatrix Forward(const DenseMatrix& in, const PreparedGraph&) override {
    input_ = in;
    pre_ = MatMul(in, params_[0].value);
    AddRowBroadcast(pre_, params_[1].value);
    DenseMatrix out = pre_;
    ApplyActivation(out, act_);
    return out;
  }

  DenseMatrix Backward(const DenseMatrix& grad_out, const PreparedGraph&) override {
    DenseMatrix dz = grad_out;
    ActivationBackward(dz, pre_, act_);
    AddInPlace(params_[0].grad, MatMulTransA(input_, dz));
    AddInPlace(params_[1].grad, ColumnSums(dz));
    return MatMulTransB(dz, params_[0].value);
  }
};

class GatLayer : public DenseBase {
 public:
  GatLayer(std::size_t in, std::size_t out, std::size_t heads, HeadCombine combine,
           Activation act, Rng& rng)
      : heads_(heads), combine_(combine) {
    act_ = act;
    if (heads == 0) ThrowUsage("GAT needs at least one head");
    if (combine == HeadCombine::kConcat && out % heads != 0) {
      ThrowUsage("GAT hidden width " + std::to_string(out) + " is not divisible by " +
                 std::to_string(heads) + " heads");
    }
    width_ = combine == HeadCombine::kConcat ? out / heads : out;
    for (std::size_t h = 0; h < heads; ++h) {
      const std::string tag = "head" + std::to_string(h) + ".";
      params_.push_back(MakeParam(tag + "weight", GlorotUniform(in, width_, rng), true));
      params_.push_back(MakeParam(tag + "att_self", GlorotUniform(1, width_, rng), true));
      params_.push_back(MakeParam(tag + "att_neigh", GlorotUniform(1, width_, rng), true));
    }
    params_.push_back(MakeParam("bias", DenseMatrix(1, out), false));
    caches_.resize(heads);
  }
  std::string kind() const override { return "gat"; }

  DenseMatrix Forward(const DenseMatrix& in, const PreparedGraph& graph) override {
    input_ = in;
    const auto& nb = graph.self_neighbors();
    offsets_ = Offsets(nb);
    const std::size_t out_cols = params_.back().value.cols();
    pre_ = DenseMatrix(in.rows(), out_cols);
    for (std::size_t h = 0; h < heads_; ++h) {
      const bool concat = combine_ == HeadCombine::kConcat;
      GatHeadForward(in, nb, offsets_, HeadView(h), caches_[h], pre_, concat ? h * width_ : 0,
                     concat ? 1.0 : 1.0 / static_cast<double>(heads_));
    }
    AddRowBroadcast(pre_, params_.back().value);
    DenseMatrix out = pre_;
    ApplyActivation(out, act_);
    return out;
  }

  DenseMatrix Backward(const DenseMatrix& grad_out, const PreparedGraph& graph) override {
    DenseMatrix dz = grad_out;
    ActivationBackward(dz, pre_, act_);
    AddInPlace(params_.back().grad, ColumnSums(dz));
    const auto& nb = graph.self_neighbors();
    DenseMatrix dh(input_.rows(), input_.cols());
    for (std::size_t h = 0; h < heads_; ++h) {
      DenseMatrix grad_head(dz.rows(), width_);
      const bool concat = combine_ == HeadCombine::kConcat;
      const double scale = concat ? 1.0 : 1.0 / static_cast<double>(heads_);
      for (std::size_t i = 0; i < dz.rows(); ++i) {
        for (std::size_t c = 0; c < width_; ++c) {
          grad_head(i, c) = scale * dz(i, (concat ? h * width_ : 0) + c);
        }
      }
      const GatHead head = HeadView(h);
      const DenseMatrix dhead_z = GatHeadBackward(grad_head, nb, offsets_, head, caches_[h],
                                                  params_[3 * h + 1].grad, params_[3 * h + 2].grad);
      AddInPlace(params_[3 * h].grad, MatMulTransA(input_, dhead_z));
      AddInPlace(dh, MatMulTransB(dhead_z, params_[3 * h].value));
    }
    return dh;
  }

 private:
  GatHead HeadView(std::size_t h) const {
    return GatHead{params_[3 * h].value, params_[3 * h + 1].value, params_[3 * h + 2].value};
  }

  std::size_t heads_;
  std::size_t width_ = 0;
  HeadCombine combine_;
  std::vector<std::size_t> offsets_;
  std::vector<HeadCache> caches_;
};

}  // namespace

DenseMatrix NormalizeAdjacency(const Adjacency& a) {
  return NormalizeAdjacencySparse(a).ToDense();
}

SparseMatrix NormalizeAdjacencySparse(const Adjacency& a) {
  const std::size_t n = a.n();
  std::vector<double> inv_sqrt(n);
  for (std::size_t i = 0; i < n; ++i) {
    inv_sqrt[i] = 1.0 / std::sqrt(static_cast<double>(a.Degree(i) + 1));
  }
  std::vector<SparseMatrix::Entry> entries;
  for (std::size_t i = 0; i < n; ++i) {
    entries.push_back({i, i, inv_sqrt[i] * inv_sqrt[i]});
    for (std::size_t j : a.Neighbors(i)) entries.push_back({i, j, inv_sqrt[i] * inv_sqrt[j]});
  }
  return SparseMatrix(n, std::move(entries));
}

DenseMatrix GcnForward(const DenseMatrix& h, const SparseMatrix& a_norm, const DenseMatrix& w,
                       Activation activation, const DenseMatrix& bias) {
  if (a_norm.n() != h.rows()) ThrowNumeric("GCN: adjacency size does not match feature rows");
  DenseMatrix z = a_norm.Multiply(MatMul(h, w));
  MaybeAddBias(z, bias);
  ApplyActivation(z, activation);
  return z;
}

DenseMatrix GcnForward(const DenseMatrix& h, const DenseMatrix& a_norm, const DenseMatrix& w,
                       Activation activation, const DenseMatrix& bias) {
  if (a_norm.rows() != h.rows() || a_norm.cols() != h.rows()) {
    ThrowNumeric("GCN: adjacency size does not match feature rows");
  }
  DenseMatrix z = MatMul(a_norm, MatMul(h, w));
  MaybeAddBias(z, bias);
  ApplyActivation(z, activation);
  return z;
}

NeighborLists WithSelfLoops(const Adjacency& a) {
  NeighborLists nb(a.n());
  for (std::size_t i = 0; i < a.n(); ++i) {
    nb[i] = a.Neighbors(i);
    nb[i].insert(std::lower_bound(nb[i].begin(), nb[i].end(), i), i);
  }
  return nb;
}

GatResult GatForward(const DenseMatrix& h, const NeighborLists& neighbors,
                     std::span<const GatHead> heads, HeadCombine combine, Activation activation,
                     const DenseMatrix& bias) {
  if (heads.empty()) ThrowUsage("GAT needs at least one head");
  if (neighbors.size() != h.rows()) ThrowNumeric("GAT: neighbor lists do not match feature rows");
  const std::size_t f = heads[0].w.cols();
  for (const auto& hd : heads) {
    if (hd.w.rows() != h.cols() || hd.w.cols() != f) ThrowNumeric("GAT: head weight shape mismatch");
  }
  const auto off = Offsets(neighbors);
  const bool concat = combine == HeadCombine::kConcat;
  GatResult result;
  result.h = DenseMatrix(h.rows(), concat ? f * heads.size() : f);
  for (std::size_t k = 0; k < heads.size(); ++k) {
    HeadCache cache;
    GatHeadForward(h, neighbors, off, heads[k], cache, result.h, concat ? k * f : 0,
                   concat ? 1.0 : 1.0 / static_cast<double>(heads.size()));
    auto& att = result.attention.emplace_back(h.rows());
    for (std::size_t i = 0; i < h.rows(); ++i) {
      att[i].assign(cache.alpha.begin() + static_cast<std::ptrdiff_t>(off[i]),
                    cache.alpha.begin() + static_cast<std::ptrdiff_t>(off[i + 1]));
    }
  }
  MaybeAddBias(result.h, bias);
  ApplyActivation(result.h, activation);
  return result;
}

DenseMatrix SageForward(const DenseMatrix& h, const NeighborLists& neighbors,
                        const DenseMatrix& w_self, const DenseMatrix& w_neigh,
                        Activation activation, const DenseMatrix& bias) {
  if (neighbors.size() != h.rows()) ThrowNumeric("SAGE: neighbor lists do not match feature rows");
  DenseMatrix z = MatMul(h, w_self);
  AddInPlace(z, MatMul(MeanOperator(neighbors).Multiply(h), w_neigh));
  MaybeAddBias(z, bias);
  ApplyActivation(z, activation);
  return z;
}

DenseMatrix SoftmaxRows(const DenseMatrix& logits) {
  DenseMatrix p(logits.rows(), logits.cols());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const auto in = logits.Row(i);
    auto out = p.Row(i);
    const double mx = *std::max_element(in.begin(), in.end());
    double total = 0.0;
    for (std::size_t c = 0; c < in.size(); ++c) {
      out[c] = std::exp(in[c] - mx);
      total += out[c];
    }
    for (double& v : out) v /= total;
  }
  return p;
}

double CrossEntropyLoss(const DenseMatrix& probs, std::span<const int> labels,
                        std::span<const std::size_t> mask) {
  if (mask.empty()) ThrowData("cross-entropy over an empty mask");
  if (labels.size() != probs.rows()) ThrowNumeric("cross-entropy: label count mismatch");
  double total = 0.0;
  for (std::size_t i : mask) {
    const int y = labels[i];
    if (y < 0 || static_cast<std::size_t>(y) >= probs.cols()) {
      ThrowData("cross-entropy: node " + std::to_string(i) + " has no valid label");
    }
    total += -std::log(std::max(probs(i, static_cast<std::size_t>(y)), kLogClamp));
  }
  return total / static_cast<double>(mask.size());
}

DenseMatrix CrossEntropyLogitGrad(const DenseMatrix& probs, std::span<const int> labels,
                                  std::span<const std::size_t> mask) {
  DenseMatrix g(probs.rows(), probs.cols());
  const double scale = 1.0 / static_cast<double>(mask.size());
  for (std::size_t i : mask) {
    for (std::size_t c = 0; c < probs.cols(); ++c) {
      g(i, c) = scale * (probs(i, c) - (static_cast<int>(c) == labels[i] ? 1.0 : 0.0));
    }
  }
  return g;
}

PreparedGraph::PreparedGraph(const Adjacency& adjacency)
    : n_(adjacency.n()),
      gcn_(NormalizeAdjacencySparse(adjacency)),
      self_neighbors_(WithSelfLoops(adjacency)) {
  NeighborLists plain(n_);
  for (std::size_t i = 0; i < n_; ++i) plain[i] = adjacency.Neighbors(i);
  mean_ = MeanOperator(plain);
}

std::unique_ptr<Layer> MakeGcnLayer(std::size_t in, std::size_t out, Activation act, Rng& rng) {
  return std::make_unique<GcnLayer>(in, out, act, rng);
}
std::unique_ptr<Layer> MakeSageLayer(std::size_t in, std::size_t out, Activation act, Rng& rng) {
  return std::make_unique<SageLayer>(in, out, act, rng);
}
std::unique_ptr<Layer> MakeMlpLayer(std::size_t in, std::size_t out, Activation act, Rng& rng) {
  return std::make_unique<MlpLayer>(in, out, act, rng);
}
std::unique_ptr<Layer> MakeGatLayer(std::size_t in, std::size_t out, std::size_t heads,
                                    HeadCombine combine, Activation act, Rng& rng) {
  return std::make_unique<GatLayer>(in, out, heads, combine, act, rng);
}

}  // namespace urbanrest
