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

#ifndef URBANREST_ENTITY_GRAPH_HPP_
#define URBANREST_ENTITY_GRAPH_HPP_

#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "urbanrest/geometry.hpp"

namespace urbanrest {

// Size of the semantic class vocabulary (ADE20K-style segmentation output).
inline constexpr int kNumEntityClasses = 150;
// Centroid distance, in pixels, below which two entity classes are adjacent.
inline constexpr double kDefaultEntityThreshold = 45.0;

// Per-pixel class ids of one street-view image, row-major.
struct SegmentationMap {
  int width = 0;
  int height = 0;
  std::vector<int> classes;
  std::string image_id;
  std::string road_id;

  int At(int x, int y) const { return classes[static_cast<std::size_t>(y) * width + x]; }
  // Throws on bad dimensions or out-of-vocabulary ids.
  void Validate() const;
};

struct EntityNode {
  int class_id = 0;
  Point2 centroid;
};

// Undirected graph of entity classes. At most one node per class; edges are
// stored as (lo, hi) class-id pairs.
class EntityGraph {
 public:
  EntityGraph() = default;
  explicit EntityGraph(double threshold) : threshold_(threshold) {}

  void AddNode(int class_id, Point2 centroid);
  // Both endpoints must already be nodes; self-loops are rejected.
  void AddEdge(int a, int b);

  bool HasNode(int class_id) const { return nodes_.contains(class_id); }
  bool HasEdge(int a, int b) const;
  int Degree(int class_id) const;
  std::vector<int> Neighbors(int class_id) const;
  // Class ids in ascending order.
  std::vector<int> ClassIds() const;

  const std::map<int, Point2>& nodes() const { return nodes_; }
  const std::set<std::pair<int, int>>& edges() const { return edges_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  bool empty() const { return nodes_.empty(); }
  double threshold() const { return threshold_; }

 private:
  double threshold_ = kDefaultEntityThreshold;
  std::map<int, Point2> nodes_;
  std::set<std::pair<int, int>> edges_;
};

// One node per class present; all pixels of a class pooled into one centroid
// (x = column, y = row).
std::vector<EntityNode> ComputeClassCentroids(const SegmentationMap& map);

// Edge (i, j) iff dist(c_i, c_j) < threshold.
EntityGraph BuildEntityGraph(std::span<const EntityNode> nodes,
                             double threshold = kDefaultEntityThreshold);

// Union of nodes and edges. A class seen in several graphs is placed at the
// unweighted mean of its per-graph centroids.
EntityGraph MergeRoadGraphs(std::span<const EntityGraph> graphs);

// Degree / (n - 1).
double DegreeCentrality(const EntityGraph& graph, int class_id);

struct CentralityEntry {
  int class_id = 0;
  double centrality = 0.0;
};
// Descending centrality, ties by ascending class id.
std::vector<CentralityEntry> TopCentrality(const EntityGraph& graph, std::size_t k);

// id -> human-readable class name; unknown ids render as "class_<id>".
class ClassNames {
 public:
  ClassNames() = default;
  // Lines of "id name".
  static ClassNames Load(const std::filesystem::path& path);
  void Set(int id, std::string name) { names_[id] = std::move(name); }
  std::string Name(int id) const;

 private:
  std::map<int, std::string> names_;
};

// --- file formats ---------------------------------------------------------

// Header "width height K" then row-major ids.
SegmentationMap ReadSegmentationRaster(const std::filesystem::path& path,
                                       std::string image_id = {},
                                       std::string road_id = {});
void WriteSegmentationRaster(const std::filesystem::path& path,
                             const SegmentationMap& map);

struct RasterManifestEntry {
  std::filesystem::path raster;  // resolved against the manifest directory
  std::string road_id;
};
// Lines of "raster_path,road_id".
std::vector<RasterManifestEntry> ReadRasterManifest(const std::filesystem::path& path);

// Node file "class_id x y", edge file "class_i class_j".
void WriteEntityGraph(const std::filesystem::path& nodes_file,
                      const std::filesystem::path& edges_file,
                      const EntityGraph& graph);
EntityGraph ReadEntityGraph(const std::filesystem::path& nodes_file,
                            const std::filesystem::path& edges_file,
                            double threshold = kDefaultEntityThreshold);

// A directory of per-road graphs: roads.txt lists road ids in order and each
// road has <id>.nodes / <id>.edges.
void WriteEntityGraphDir(const std::filesystem::path& dir,
                         const std::vector<std::pair<std::string, EntityGraph>>& graphs);
std::vector<std::pair<std::string, EntityGraph>> ReadEntityGraphDir(
    const std::filesystem::path& dir, double threshold = kDefaultEntityThreshold);

// Road ids end up in file names and delimited records.
void ValidateRoadId(const std::string& road_id);

}  // namespace urbanrest

#endif  // URBANREST_ENTITY_GRAPH_HPP_
