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

#include "urbanrest/street_embed.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "urbanrest/adjacency.hpp"
#include "urbanrest/error.hpp"
#include "urbanrest/gnn.hpp"
#include "urbanrest/io_util.hpp"
#include "urbanrest/rng.hpp"

namespace urbanrest {
namespace {

struct IndexedGraph {
  std::vector<int> ids;
  std::vector<std::vector<std::size_t>> neighbors;
  Adjacency adjacency;
};

IndexedGraph Index(const EntityGraph& graph) {
  IndexedGraph g;
  g.ids = graph.ClassIds();
  g.adjacency = Adjacency(g.ids.size());
  auto pos = [&](int id) {
    return static_cast<std::size_t>(std::lower_bound(g.ids.begin(), g.ids.end(), id) - g.ids.begin());
  };
  for (const auto& [a, b] : graph.edges()) g.adjacency.AddEdge(pos(a), pos(b));
  g.neighbors.resize(g.ids.size());
  for (std::size_t i = 0; i < g.ids.size(); ++i) g.neighbors[i] = g.adjacency.Neighbors(i);
  return g;
}

std::vector<std::vector<std::size_t>> IndexWalks(const IndexedGraph& g, const WalkConfig& cfg,
                                                 Rng& rng) {
  std::vector<std::vector<std::size_t>> walks;
  const std::size_t n = g.ids.size();
  std::vector<std::size_t> starts(n);
  for (std::size_t round = 0; round < cfg.walks_per_node; ++round) {
    for (std::size_t i = 0; i < n; ++i) starts[i] = i;
    rng.Shuffle(starts.begin(), starts.end());
    for (std::size_t s : starts) {
      std::vector<std::size_t> walk{s};
      while (walk.size() < cfg.walk_length) {
        const auto& nb = g.neighbors[walk.back()];
        if (nb.empty()) break;
        walk.push_back(nb[rng.Below(nb.size())]);
      }
      walks.push_back(std::move(walk));
    }
  }
  return walks;
}

double Sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

void WalkConfig::Validate() const {
  if (walks_per_node < 1 || walk_length < 1 || window < 1 || negatives < 1 || epochs < 1) {
    ThrowUsage("walk config counts must all be >= 1");
  }
  if (embed_dim < 2) ThrowUsage("walk.embed_dim must be >= 2");
  if (!(learning_rate > 0.0)) ThrowUsage("walk.learning_rate must be positive");
}

std::vector<std::vector<int>> GenerateWalks(const EntityGraph& graph, const WalkConfig& config) {
  config.Validate();
  if (graph.empty()) ThrowData("cannot embed an empty entity graph");
  const IndexedGraph g = Index(graph);
  Rng rng(MixSeed(config.seed, 11));
  std::vector<std::vector<int>> out;
  for (const auto& walk : IndexWalks(g, config, rng)) {
    auto& w = out.emplace_back();
    for (std::size_t v : walk) w.push_back(g.ids[v]);
  }
  return out;
}

DenseMatrix DeepWalkEmbed(const EntityGraph& graph, const WalkConfig& config) {
  config.Validate();
  if (graph.empty()) ThrowData("cannot embed an empty entity graph");
  const IndexedGraph g = Index(graph);
  const std::size_t n = g.ids.size();
  const std::size_t dim = config.embed_dim;

  Rng walk_rng(MixSeed(config.seed, 11));
  const auto walks = IndexWalks(g, config, walk_rng);

  // Noise distribution: unigram frequency^0.75 over walk occurrences.
  std::vector<double> freq(n, 0.0);
  std::size_t tokens = 0;
  for (const auto& w : walks) {
    for (std::size_t v : w) freq[v] += 1.0;
    tokens += w.size();
  }
  std::vector<double> cumulative(n);
  double acc = 0.0;
  for (std::size_t v = 0; v < n; ++v) {
    acc += std::pow(freq[v], 0.75);
    cumulative[v] = acc;
  }

  Rng rng(MixSeed(config.seed, 12));
  DenseMatrix input(n, dim);
  for (double& x : input.data()) x = (rng.Uniform() - 0.5) / static_cast<double>(dim);
  DenseMatrix output(n, dim);
  std::vector<double> grad_in(dim);

  auto sample_negative = [&]() {
    const double u = rng.Uniform() * acc;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), n - 1);
  };

  auto update = [&](std::size_t center, std::size_t target, double label, double lr) {
    auto in = input.Row(center);
    auto out = output.Row(target);
    double dot = 0.0;
    for (std::size_t k = 0; k < dim; ++k) dot += in[k] * out[k];
    const double g = lr * (label - Sigmoid(dot));
    for (std::size_t k = 0; k < dim; ++k) {
      grad_in[k] += g * out[k];
      out[k] += g * in[k];
    }
  };

  const double total = static_cast<double>(tokens * config.epochs);
  std::size_t processed = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (const auto& walk : walks) {
      for (std::size_t i = 0; i < walk.size(); ++i, ++processed) {
        const double lr = config.learning_rate *
                          std::max(1e-4, 1.0 - static_cast<double>(processed) / total);
        const std::size_t lo = i >= config.window ? i - config.window : 0;
        const std::size_t hi = std::min(walk.size() - 1, i + config.window);
        for (std::size_t j = lo; j <= hi; ++j) {
          if (j == i) continue;
          const std::size_t center = walk[i];
          const std::size_t context = walk[j];
          std::fill(grad_in.begin(), grad_in.end(), 0.0);
          update(center, context, 1.0, lr);
          for (std::size_t s = 0; s < config.negatives; ++s) {
            const std::size_t neg = sample_negative();
            if (neg == context) continue;
            update(center, neg, 0.0, lr);
          }
          auto in = input.Row(center);
          for (std::size_t k = 0; k < dim; ++k) in[k] += grad_in[k];
        }
      }
    }
  }
  if (!input.AllFinite()) ThrowNumeric("DeepWalk produced non-finite embeddings");
  return input;
}

StreetProjection StreetProjection::Create(std::size_t embed_dim, std::uint64_t seed) {
  Rng rng(MixSeed(seed, 7));
  StreetProjection p;
  p.w1 = GlorotUniform(embed_dim, kStreetHidden1, rng);
  p.w2 = GlorotUniform(kStreetHidden1, kStreetHidden2, rng);
  p.readout = GlorotUniform(kStreetHidden2, kStreetVectorDim, rng);
  return p;
}

std::vector<double> ProjectStreetStructure(const EntityGraph& graph, const DenseMatrix& node_vectors,
                                           const StreetProjection& projection) {
  if (graph.empty()) ThrowData("cannot propagate over an empty entity graph");
  const IndexedGraph g = Index(graph);
  if (node_vectors.rows() != g.ids.size()) ThrowNumeric("node vector count does not match graph");
  const SparseMatrix a_norm = NormalizeAdjacencySparse(g.adjacency);
  const DenseMatrix h1 = GcnForward(node_vectors, a_norm, projection.w1, Activation::kRelu);
  const DenseMatrix h2 = GcnForward(h1, a_norm, projection.w2, Activation::kRelu);
  DenseMatrix pooled = ColumnSums(h2);
  for (double& v : pooled.data()) v /= static_cast<double>(h2.rows());
  const DenseMatrix out = MatMul(pooled, projection.readout);
  if (!out.AllFinite()) ThrowNumeric("street-structure vector is not finite");
  return out.data();
}

StreetStructureVector EmbedRoad(const std::string& road_id, const EntityGraph& graph,
                                const WalkConfig& config, std::uint64_t projection_seed) {
  const DenseMatrix nodes = DeepWalkEmbed(graph, config);
  const StreetProjection projection = StreetProjection::Create(config.embed_dim, projection_seed);
  return {road_id, ProjectStreetStructure(graph, nodes, projection)};
}

void WriteStreetVectors(const std::filesystem::path& path,
                        const std::vector<StreetStructureVector>& vectors) {
  std::ostringstream out;
  out << io::FormatHeader("street-vectors") << '\n';
  for (const auto& v : vectors) {
    out << v.road_id;
    for (double x : v.values) out << ' ' << io::FormatDouble(x);
    out << '\n';
  }
  io::WriteFile(path, out.str());
}

std::map<std::string, std::vector<double>> ReadStreetVectors(const std::filesystem::path& path) {
  std::map<std::string, std::vector<double>> vectors;
  for (const auto& line : io::ReadDataLines(path, "street-vectors")) {
    const auto t = io::SplitWhitespace(line);
    if (t.size() != kStreetVectorDim + 1) {
      ThrowData(path.string() + ": expected 'road_id' plus " + std::to_string(kStreetVectorDim) +
                " values");
    }
    std::vector<double> v;
    for (std::size_t k = 1; k < t.size(); ++k) v.push_back(io::ParseDouble(t[k], "street vector"));
    if (!vectors.emplace(std::string(t[0]), std::move(v)).second) {
      ThrowData(path.string() + ": duplicate road " + std::string(t[0]));
    }
  }
  return vectors;
}

}  // namespace urbanrest
