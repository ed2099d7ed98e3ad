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

#ifndef URBANREST_GNN_HPP_
#define URBANREST_GNN_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "urbanrest/adjacency.hpp"
#include "urbanrest/city_graph.hpp"
#include "urbanrest/matrix.hpp"
#include "urbanrest/rng.hpp"

namespace urbanrest {

inline constexpr double kLogClamp = 1e-12;
inline constexpr double kLeakyReluSlope = 0.2;

enum class Activation { kRelu, kIdentity };

// D^-1/2 (A + I) D^-1/2 with D the row sums of A + I.
DenseMatrix NormalizeAdjacency(const Adjacency& a);
SparseMatrix NormalizeAdjacencySparse(const Adjacency& a);

// activation(A_norm H W + bias). `bias` may be empty (0 x 0).
DenseMatrix GcnForward(const DenseMatrix& h, const SparseMatrix& a_norm, const DenseMatrix& w,
                       Activation activation, const DenseMatrix& bias = {});
DenseMatrix GcnForward(const DenseMatrix& h, const DenseMatrix& a_norm, const DenseMatrix& w,
                       Activation activation, const DenseMatrix& bias = {});

struct GatHead {
  DenseMatrix w;           // in x f
  DenseMatrix att_self;    // 1 x f, scores the target node
  DenseMatrix att_neigh;   // 1 x f, scores the neighbor
};

enum class HeadCombine { kConcat, kMean };

// Sorted neighbor lists that must contain each node itself.
using NeighborLists = std::vector<std::vector<std::size_t>>;
NeighborLists WithSelfLoops(const Adjacency& a);

struct GatResult {
  DenseMatrix h;
  // attention[head][i][k] is the weight node i puts on neighbors[i][k].
  std::vector<std::vector<std::vector<double>>> attention;
};
GatResult GatForward(const DenseMatrix& h, const NeighborLists& neighbors,
                     std::span<const GatHead> heads, HeadCombine combine, Activation activation,
                     const DenseMatrix& bias = {});

// activation(H W_self + mean_{j in N(i)} h_j W_neigh + bias); nodes without
// neighbors aggregate a zero vector.
DenseMatrix SageForward(const DenseMatrix& h, const NeighborLists& neighbors,
                        const DenseMatrix& w_self, const DenseMatrix& w_neigh,
                        Activation activation, const DenseMatrix& bias = {});

DenseMatrix SoftmaxRows(const DenseMatrix& logits);

// Mean over masked rows of -log(max(q_label, 1e-12)).
double CrossEntropyLoss(const DenseMatrix& probs, std::span<const int> labels,
                        std::span<const std::size_t> mask);

// --- trainable layers ------------------------------------------------------

struct Parameter {
  std::string name;
  DenseMatrix value;
  DenseMatrix grad;
  DenseMatrix adam_m;
  DenseMatrix adam_v;
  bool decay = true;  // weight decay applies (weights, not biases)
};

// Graph-dependent operators shared by every layer of a forward pass.
class PreparedGraph {
 public:
  explicit PreparedGraph(const Adjacency& adjacency);
  std::size_t n() const { return n_; }
  const SparseMatrix& gcn_operator() const { return gcn_; }
  const SparseMatrix& mean_operator() const { return mean_; }
  const NeighborLists& self_neighbors() const { return self_neighbors_; }

 private:
  std::size_t n_ = 0;
  SparseMatrix gcn_;   // normalized adjacency
  SparseMatrix mean_;  // row-normalized neighbor mean, no self
  NeighborLists self_neighbors_;
};

class Layer {
 public:
  virtual ~Layer() = default;
  virtual std::string kind() const = 0;
  // Caches what Backward needs.
  virtual DenseMatrix Forward(const DenseMatrix& in, const PreparedGraph& graph) = 0;
  // Accumulates parameter gradients; returns d loss / d input.
  virtual DenseMatrix Backward(const DenseMatrix& grad_out, const PreparedGraph& graph) = 0;
  virtual std::vector<Parameter*> Parameters() = 0;
};

enum class Arch { kGcn, kGat, kSage, kMlp };
const char* ArchName(Arch a);
Arch ParseArch(std::string_view name);

std::unique_ptr<Layer> MakeGcnLayer(std::size_t in, std::size_t out, Activation act, Rng& rng);
std::unique_ptr<Layer> MakeSageLayer(std::size_t in, std::size_t out, Activation act, Rng& rng);
std::unique_ptr<Layer> MakeMlpLayer(std::size_t in, std::size_t out, Activation act, Rng& rng);
// Per-head width is out / heads for concat, out for mean.
std::unique_ptr<Layer> MakeGatLayer(std::size_t in, std::size_t out, std::size_t heads,
                                    HeadCombine combine, Activation act, Rng& rng);

struct ModelConfig {
  Arch arch = Arch::kGcn;
  std::vector<std::size_t> hidden = {64, 32};
  std::size_t heads = 4;  // GAT hidden layers; the output layer uses one head
  std::size_t epochs = 500;
  double learning_rate = 0.01;
  double weight_decay = 5e-4;
  std::uint64_t seed = 0;
  double train_fraction = 0.6;
  double val_fraction = 0.2;
  double test_fraction = 0.2;
  // Skips the >= 3 labels per class gate and the degenerate-split check.
  bool allow_degenerate_labels = false;

  void Validate() const;
};

class GnnModel {
 public:
  GnnModel() = default;
  // Builds hidden layers plus a kNumClasses-logit output layer.
  static GnnModel Build(const ModelConfig& config, std::size_t in_dim);

  DenseMatrix Logits(const DenseMatrix& x, const PreparedGraph& graph);
  DenseMatrix Probabilities(const DenseMatrix& x, const PreparedGraph& graph);
  std::vector<int> Predict(const DenseMatrix& x, const PreparedGraph& graph);
  // Backpropagates d loss / d logits through the stack.
  DenseMatrix Backward(const DenseMatrix& grad_logits, const PreparedGraph& graph);
  void ZeroGrad();
  std::vector<Parameter*> Parameters();

  const ModelConfig& config() const { return config_; }
  std::size_t in_dim() const { return in_dim_; }

  // JSON header line + little-endian f64 payload.
  void Save(const std::filesystem::path& path) const;
  static GnnModel Load(const std::filesystem::path& path);

 private:
  ModelConfig config_;
  std::size_t in_dim_ = 0;
  std::vector<std::unique_ptr<Layer>> layers_;
};

// Gradient of the mean masked cross-entropy w.r.t. logits.
DenseMatrix CrossEntropyLogitGrad(const DenseMatrix& probs, std::span<const int> labels,
                                  std::span<const std::size_t> mask);

struct DataSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};
// Stratified per class, seeded.
DataSplit StratifiedSplit(std::span<const int> labels, const ModelConfig& config);

struct Metrics {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  // confusion[true][pred]
  std::size_t confusion[kNumClasses][kNumClasses] = {};
};
Metrics Evaluate(std::span<const int> predicted, std::span<const int> truth,
                 std::span<const std::size_t> mask);

struct TrainReport {
  std::vector<double> loss_curve;
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
  Metrics test;
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
};

struct TrainResult {
  GnnModel model;
  TrainReport report;
  DataSplit split;
};

// Full-batch Adam on the train mask. MLP ignores the adjacency.
TrainResult Train(const DenseMatrix& features, const Adjacency& adjacency,
                  std::span<const int> labels, const ModelConfig& config);
TrainResult Train(const CityGraph& graph, const ModelConfig& config);

// Retrains on the columns of the kept groups only.
TrainReport Ablate(const CityGraph& graph, std::span<const std::string> groups_to_keep,
                   const ModelConfig& config);
CityGraph KeepGroups(const CityGraph& graph, std::span<const std::string> groups_to_keep);

struct RunSummary {
  std::string name;
  std::string weights;
  double accuracy_mean = 0.0;
  double accuracy_std = 0.0;
  double f1_mean = 0.0;
  double f1_std = 0.0;
  double seconds_mean = 0.0;
  std::size_t runs = 0;
};
// Trains `runs` times with seeds config.seed + r and summarizes test metrics.
RunSummary RepeatTraining(const CityGraph& graph, const ModelConfig& config, std::size_t runs,
                          std::string name);

struct AblationExperiment {
  std::string name;
  std::vector<std::string> keep;
};
// Retain-all, drop spatial, drop perception, drop socioeconomic, spatial only.
std::vector<AblationExperiment> StandardAblationBattery();

// Model-comparison variants: GCN1 (64/32), GCN2 (32/16), GraphSAGE, GAT, MLP.
std::vector<std::pair<std::string, ModelConfig>> StandardModelVariants(const ModelConfig& base);

// Plain-text table: model, weights, accuracy, F1, time.
std::string FormatRunTable(std::span<const RunSummary> rows, bool with_time);

}  // namespace urbanrest

#endif  // URBANREST_GNN_HPP_
