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

#ifndef URBANREST_ANALYSIS_HPP_
#define URBANREST_ANALYSIS_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "urbanrest/entity_graph.hpp"
#include "urbanrest/matrix.hpp"

namespace urbanrest {

struct KMeansOptions {
  std::size_t restarts = 10;
  std::size_t max_iterations = 300;
  double tolerance = 1e-9;  // max center shift that counts as converged
};

struct ClusterResult {
  std::size_t k = 0;
  std::vector<int> assignments;  // per input row
  DenseMatrix centers;           // k x d
  double sse = 0.0;
  double silhouette = 0.0;
  std::uint64_t seed = 0;
  std::size_t iterations = 0;
  std::vector<double> sse_trace;  // after each assignment step of the kept restart
};

// k-means++ seeding and Lloyd iterations; best SSE over restarts.
ClusterResult KMeans(const DenseMatrix& x, std::size_t k, std::uint64_t seed,
                     const KMeansOptions& options = {});

// Mean silhouette coefficient; singleton clusters contribute 0.
double Silhouette(const DenseMatrix& x, std::span<const int> assignments);

struct SilhouetteSweepResult {
  std::size_t best_k = 0;
  std::vector<std::size_t> ks;
  std::vector<double> scores;
  ClusterResult best;
};

// Ties resolve to the smaller k.
SilhouetteSweepResult SilhouetteSweep(const DenseMatrix& x, std::size_t k_min, std::size_t k_max,
                                      std::uint64_t seed, const KMeansOptions& options = {});

struct GroupStructure {
  std::string group;
  std::size_t road_count = 0;
  EntityGraph merged;
  std::vector<CentralityEntry> top;
};

// Merges each group's road graphs and ranks entity classes by degree
// centrality. Empty groups are skipped with a warning.
std::vector<GroupStructure> ClassStructureGraphs(
    const std::map<std::string, std::vector<EntityGraph>>& groups, std::size_t top_k = 10);

// Plain-text table: one column block per group, one row per rank.
std::string FormatStructureReport(std::span<const GroupStructure> groups, const ClassNames& names);

void WriteSilhouetteTable(const std::filesystem::path& path, const SilhouetteSweepResult& sweep);
void WriteClusterAssignments(const std::filesystem::path& path,
                             std::span<const std::string> road_ids, const ClusterResult& result);

}  // namespace urbanrest

#endif  // URBANREST_ANALYSIS_HPP_
