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

#ifndef URBANREST_STREET_EMBED_HPP_
#define URBANREST_STREET_EMBED_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "urbanrest/entity_graph.hpp"
#include "urbanrest/matrix.hpp"

namespace urbanrest {

inline constexpr std::size_t kStreetVectorDim = 5;
inline constexpr std::size_t kStreetHidden1 = 32;
inline constexpr std::size_t kStreetHidden2 = 16;

struct WalkConfig {
  std::size_t walks_per_node = 10;
  std::size_t walk_length = 40;
  std::size_t window = 5;
  std::size_t embed_dim = 32;
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  double learning_rate = 0.025;  // linearly decayed to 1e-4 of itself
  std::uint64_t seed = 1;

  void Validate() const;
};

// Truncated uniform random walks from every node, then skip-gram with
// negative sampling. Row r of the result belongs to graph.ClassIds()[r].
DenseMatrix DeepWalkEmbed(const EntityGraph& graph, const WalkConfig& config);

// The walks DeepWalkEmbed trains on, as class ids.
std::vector<std::vector<int>> GenerateWalks(const EntityGraph& graph, const WalkConfig& config);

struct StreetStructureVector {
  std::string road_id;
  std::vector<double> values;  // length kStreetVectorDim
};

// Fixed-seed projection weights shared by every road.
struct StreetProjection {
  DenseMatrix w1;       // embed_dim x 32
  DenseMatrix w2;       // 32 x 16
  DenseMatrix readout;  // 16 x 5
  static StreetProjection Create(std::size_t embed_dim, std::uint64_t seed);
};

// DeepWalk node vectors -> two ReLU propagation layers over the entity graph
// -> mean pool -> linear readout to 5 values.
StreetStructureVector EmbedRoad(const std::string& road_id, const EntityGraph& graph,
                                const WalkConfig& config, std::uint64_t projection_seed);
// Same pipeline from precomputed node vectors.
std::vector<double> ProjectStreetStructure(const EntityGraph& graph,
                                           const DenseMatrix& node_vectors,
                                           const StreetProjection& projection);

// "road_id v1 v2 v3 v4 v5" rows.
void WriteStreetVectors(const std::filesystem::path& path,
                        const std::vector<StreetStructureVector>& vectors);
std::map<std::string, std::vector<double>> ReadStreetVectors(const std::filesystem::path& path);

}  // namespace urbanrest

#endif  // URBANREST_STREET_EMBED_HPP_
