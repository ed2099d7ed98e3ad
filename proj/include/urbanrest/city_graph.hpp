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

#ifndef URBANREST_CITY_GRAPH_HPP_
#define URBANREST_CITY_GRAPH_HPP_

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "urbanrest/adjacency.hpp"
#include "urbanrest/geometry.hpp"
#include "urbanrest/matrix.hpp"

namespace urbanrest {

inline constexpr double kDefaultBufferHalfWidth = 25.0;  // meters
inline constexpr std::size_t kDefaultKnnK = 5;
inline constexpr double kDefaultQueenSnap = 0.01;  // meters

// Restoration-quality classes. Unlabeled nodes carry kUnlabeled.
inline constexpr int kNumClasses = 3;
inline constexpr int kUnlabeled = -1;
const char* ClassLabelName(int label);  // "low" | "medium" | "high"
int ParseClassLabel(std::string_view name);

struct RoadSegment {
  std::string road_id;
  std::vector<Point2> polyline;  // projected meters

  // >= 2 vertices, consecutive vertices distinct.
  void Validate() const;
};

// Feature groups in canonical column order.
inline constexpr const char* kFeatureGroups[] = {"perception", "spatial", "socioeconomic"};

struct FeatureSchema {
  // Dimension of each group, indexed like kFeatureGroups.
  std::size_t dims[3] = {0, 0, 0};
  std::size_t total() const { return dims[0] + dims[1] + dims[2]; }
};

struct FeaturePoint {
  Point2 location;
  std::vector<double> values;  // group vectors concatenated in canonical order
};

enum class WeightScheme { kKnn, kQueen };
const char* WeightSchemeName(WeightScheme s);
WeightScheme ParseWeightScheme(std::string_view name);

struct SpatialWeights {
  WeightScheme scheme = WeightScheme::kKnn;
  Adjacency adjacency;
  // KNN: n * K directed i -> j relations before symmetrization.
  // Queen: 2 * undirected pair count (nonzero entries of A).
  std::size_t directed_relation_count = 0;

  std::size_t n() const { return adjacency.n(); }
};

struct GroupSpan {
  std::string name;
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t width() const { return end - begin; }
  friend bool operator==(const GroupSpan&, const GroupSpan&) = default;
};

struct CityGraph {
  std::vector<std::string> road_ids;
  std::vector<Point2> midpoints;
  DenseMatrix features;  // n x D
  SpatialWeights weights;
  std::vector<int> labels;  // kUnlabeled or 0..2
  std::vector<GroupSpan> group_spans;

  std::size_t n() const { return road_ids.size(); }
  void Validate() const;
  std::size_t LabeledCount() const;
};

// Point at half the total arc length.
Point2 ArcMidpoint(const RoadSegment& road);

struct AggregatedFeatures {
  std::vector<double> values;
  std::size_t coverage = 0;
};
// Per-dimension mean over points within half_width of the polyline
// (inclusive); zero vector when nothing is covered.
AggregatedFeatures AggregateFeatures(const RoadSegment& road,
                                     std::span<const FeaturePoint> points,
                                     std::size_t dims,
                                     double half_width = kDefaultBufferHalfWidth);

// Each node links to its k nearest midpoints (ties by ascending road id);
// the adjacency is the union-symmetrization of those relations.
SpatialWeights KnnWeights(std::span<const Point2> midpoints,
                          std::span<const std::string> road_ids,
                          std::size_t k = kDefaultKnnK);

// Roads are adjacent when their polylines intersect, touch, or come within
// `snap` meters of each other.
SpatialWeights QueenWeights(std::span<const RoadSegment> roads,
                            double snap = kDefaultQueenSnap);

// Per-column min-max to [0, 1]; constant columns become 0.
DenseMatrix NormalizeFeatures(const DenseMatrix& x);

struct CityGraphOptions {
  WeightScheme scheme = WeightScheme::kKnn;
  std::size_t knn_k = kDefaultKnnK;
  double queen_snap = kDefaultQueenSnap;
  double buffer_half_width = kDefaultBufferHalfWidth;
  bool normalize = true;
};

// Street-structure vectors (road_id -> values) are appended to the spatial
// group after any point-aggregated spatial columns. Roads missing from a
// nonempty map get a zero vector.
CityGraph AssembleCityGraph(std::span<const RoadSegment> roads,
                            std::span<const FeaturePoint> points,
                            const FeatureSchema& schema,
                            const std::map<std::string, int>& labels,
                            const CityGraphOptions& options = {},
                            const std::map<std::string, std::vector<double>>& street_vectors = {});

// --- file formats ---------------------------------------------------------

// "road_id; x1 y1; x2 y2; ..."
std::vector<RoadSegment> ReadRoads(const std::filesystem::path& path);
void WriteRoads(const std::filesystem::path& path, std::span<const RoadSegment> roads);

// Header "x y <group>.<name> ...", then "x y v1 ... vD" rows. Columns are
// reordered into canonical group order.
struct FeaturePointTable {
  FeatureSchema schema;
  std::vector<std::string> column_names;  // canonical order
  std::vector<FeaturePoint> points;
};
FeaturePointTable ReadFeaturePoints(const std::filesystem::path& path);
void WriteFeaturePoints(const std::filesystem::path& path, const FeaturePointTable& table);

// "road_id,class" with class in {low, medium, high}; an optional third
// column (score) is ignored.
std::map<std::string, int> ReadLabels(const std::filesystem::path& path);
void WriteLabels(const std::filesystem::path& path, const std::map<std::string, int>& labels);

// Directory with nodes.txt, features.bin, adjacency.txt, labels.csv.
void WriteCityGraphBundle(const std::filesystem::path& dir, const CityGraph& graph);
CityGraph ReadCityGraphBundle(const std::filesystem::path& dir);

}  // namespace urbanrest

#endif  // URBANREST_CITY_GRAPH_HPP_
