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

#include "urbanrest/city_graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "urbanrest/entity_graph.hpp"
#include "urbanrest/error.hpp"
#include "urbanrest/io_util.hpp"

namespace urbanrest {
namespace fs = std::filesystem;

const char* ClassLabelName(int label) {
  switch (label) {
    case 0: return "low";
    case 1: return "medium";
    case 2: return "high";
    default: return "unlabeled";
  }
}

int ParseClassLabel(std::string_view name) {
  name = io::Trim(name);
  if (name == "low") return 0;
  if (name == "medium") return 1;
  if (name == "high") return 2;
  ThrowData("unknown class label '" + std::string(name) + "' (expected low|medium|high)");
}

const char* WeightSchemeName(WeightScheme s) {
  return s == WeightScheme::kKnn ? "knn" : "queen";
}

WeightScheme ParseWeightScheme(std::string_view name) {
  if (name == "knn") return WeightScheme::kKnn;
  if (name == "queen") return WeightScheme::kQueen;
  ThrowUsage("unknown weight scheme '" + std::string(name) + "' (expected knn|queen)");
}

void RoadSegment::Validate() const {
  if (polyline.size() < 2) ThrowData("road " + road_id + " has fewer than 2 vertices");
  for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
    if (polyline[i] == polyline[i + 1]) {
      ThrowData("road " + road_id + " has repeated consecutive vertices");
    }
  }
  for (const auto& p : polyline) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) ThrowData("road " + road_id + " has non-finite coordinates");
  }
}

void CityGraph::Validate() const {
  const std::size_t count = n();
  if (midpoints.size() != count || labels.size() != count || features.rows() != count ||
      weights.n() != count) {
    ThrowData("city graph components disagree on node count");
  }
  for (int l : labels) {
    if (l != kUnlabeled && (l < 0 || l >= kNumClasses)) ThrowData("invalid class label");
  }
  std::size_t expect = 0;
  for (const auto& g : group_spans) {
    if (g.begin != expect || g.end < g.begin) ThrowData("group spans do not partition the feature columns");
    expect = g.end;
  }
  if (expect != features.cols()) ThrowData("group spans do not cover the feature columns");
}

std::size_t CityGraph::LabeledCount() const {
  return static_cast<std::size_t>(
      std::count_if(labels.begin(), labels.end(), [](int l) { return l != kUnlabeled; }));
}

Point2 ArcMidpoint(const RoadSegment& road) {
  if (road.polyline.size() < 2) ThrowData("road " + road.road_id + " has fewer than 2 vertices");
  const double total = PolylineLength(road.polyline);
  if (!(total > 0.0)) ThrowData("road " + road.road_id + " has zero length");
  const double half = total / 2.0;
  double walked = 0.0;
  for (std::size_t i = 0; i + 1 < road.polyline.size(); ++i) {
    const Point2 a = road.polyline[i];
    const Point2 b = road.polyline[i + 1];
    const double len = Distance(a, b);
    if (walked + len >= half && len > 0.0) {
      const double t = (half - walked) / len;
      return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
    }
    walked += len;
  }
  return road.polyline.back();
}

AggregatedFeatures AggregateFeatures(const RoadSegment& road, std::span<const FeaturePoint> points,
                                     std::size_t dims, double half_width) {
  if (!(half_width > 0.0)) ThrowUsage("buffer half-width must be positive");
  AggregatedFeatures out;
  out.values.assign(dims, 0.0);
  for (const auto& p : points) {
    if (p.values.size() != dims) ThrowData("feature point has the wrong dimension");
    if (PointPolylineDistance(p.location, road.polyline) <= half_width) {
      for (std::size_t d = 0; d < dims; ++d) out.values[d] += p.values[d];
      ++out.coverage;
    }
  }
  if (out.coverage > 0) {
    for (double& v : out.values) v /= static_cast<double>(out.coverage);
  }
  return out;
}

SpatialWeights KnnWeights(std::span<const Point2> midpoints, std::span<const std::string> road_ids,
                          std::size_t k) {
  const std::size_t n = midpoints.size();
  if (road_ids.size() != n) ThrowUsage("knn_weights: ids and midpoints differ in length");
  if (k < 1) ThrowUsage("knn_weights: K must be >= 1");
  if (n <= k) {
    ThrowData("knn_weights needs more than K=" + std::to_string(k) + " nodes, got " + std::to_string(n));
  }
  SpatialWeights w;
  w.scheme = WeightScheme::kKnn;
  w.adjacency = Adjacency(n);
  std::vector<std::size_t> order;
  std::vector<double> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) dist[j] = Distance(midpoints[i], midpoints[j]);
    order.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) order.push_back(j);
    }
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::size_t a, std::size_t b) {
                        if (dist[a] != dist[b]) return dist[a] < dist[b];
                        return road_ids[a] < road_ids[b];
                      });
    for (std::size_t r = 0; r < k; ++r) w.adjacency.AddEdge(i, order[r]);
  }
  w.directed_relation_count = n * k;
  return w;
}

SpatialWeights QueenWeights(std::span<const RoadSegment> roads, double snap) {
  if (roads.size() < 2) ThrowData("queen_weights needs at least 2 roads");
  if (snap < 0.0) ThrowUsage("queen snap tolerance must be non-negative");
  struct Box {
    double x0, y0, x1, y1;
  };
  const std::size_t n = roads.size();
  std::vector<Box> boxes(n);
  for (std::size_t i = 0; i < n; ++i) {
    roads[i].Validate();
    Box b{roads[i].polyline[0].x, roads[i].polyline[0].y, roads[i].polyline[0].x,
          roads[i].polyline[0].y};
    for (const auto& p : roads[i].polyline) {
      b.x0 = std::min(b.x0, p.x);
      b.y0 = std::min(b.y0, p.y);
      b.x1 = std::max(b.x1, p.x);
      b.y1 = std::max(b.y1, p.y);
    }
    boxes[i] = {b.x0 - snap, b.y0 - snap, b.x1 + snap, b.y1 + snap};
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return boxes[a].x0 != boxes[b].x0 ? boxes[a].x0 < boxes[b].x0 : a < b;
  });

  auto touches = [&](const RoadSegment& r, const RoadSegment& s) {
    for (std::size_t a = 0; a + 1 < r.polyline.size(); ++a) {
      for (std::size_t b = 0; b + 1 < s.polyline.size(); ++b) {
        if (SegmentSegmentDistance(r.polyline[a], r.polyline[a + 1], s.polyline[b],
                                   s.polyline[b + 1]) <= snap) {
          return true;
        }
      }
    }
    return false;
  };

  SpatialWeights w;
  w.scheme = WeightScheme::kQueen;
  w.adjacency = Adjacency(n);
  for (std::size_t oi = 0; oi < n; ++oi) {
    const std::size_t i = order[oi];
    for (std::size_t oj = oi + 1; oj < n && boxes[order[oj]].x0 <= boxes[i].x1; ++oj) {
      const std::size_t j = order[oj];
      if (boxes[j].y0 > boxes[i].y1 || boxes[i].y0 > boxes[j].y1) continue;
      if (touches(roads[i], roads[j])) w.adjacency.AddEdge(i, j);
    }
  }
  w.directed_relation_count = 2 * w.adjacency.EdgeCount();
  return w;
}

DenseMatrix NormalizeFeatures(const DenseMatrix& x) {
  if (!x.AllFinite()) ThrowNumeric("feature matrix contains non-finite values");
  DenseMatrix out(x.rows(), x.cols());
  for (std::size_t c = 0; c < x.cols(); ++c) {
    double lo = 0.0, hi = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) {
      const double v = x(r, c);
      if (r == 0 || v < lo) lo = v;
      if (r == 0 || v > hi) hi = v;
    }
    const double range = hi - lo;
    for (std::size_t r = 0; r < x.rows(); ++r) {
      out(r, c) = range > 0.0 ? (x(r, c) - lo) / range : 0.0;
    }
  }
  return out;
}

CityGraph AssembleCityGraph(std::span<const RoadSegment> roads, std::span<const FeaturePoint> points,
                            const FeatureSchema& schema, const std::map<std::string, int>& labels,
                            const CityGraphOptions& options,
                            const std::map<std::string, std::vector<double>>& street_vectors) {
  std::set<std::string> seen;
  for (const auto& r : roads) {
    ValidateRoadId(r.road_id);
    r.Validate();
    if (!seen.insert(r.road_id).second) ThrowData("duplicate road id '" + r.road_id + "'");
  }
  for (const auto& [road, label] : labels) {
    if (!seen.contains(road)) ThrowData("label for unknown road '" + road + "'");
    if (label < 0 || label >= kNumClasses) ThrowData("invalid label for road '" + road + "'");
  }
  std::size_t street_dim = 0;
  for (const auto& [road, v] : street_vectors) {
    if (street_dim == 0) street_dim = v.size();
    if (v.size() != street_dim) ThrowData("street-structure vectors differ in length");
  }

  const std::size_t n = roads.size();
  const std::size_t p_dim = schema.dims[0];
  const std::size_t s_dim = schema.dims[1];
  const std::size_t e_dim = schema.dims[2];
  const std::size_t width = schema.total() + street_dim;

  CityGraph g;
  g.features = DenseMatrix(n, width);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& road = roads[i];
    g.road_ids.push_back(road.road_id);
    g.midpoints.push_back(ArcMidpoint(road));
    const auto agg = AggregateFeatures(road, points, schema.total(), options.buffer_half_width);
    auto row = g.features.Row(i);
    std::size_t c = 0;
    for (std::size_t d = 0; d < p_dim + s_dim; ++d) row[c++] = agg.values[d];
    if (street_dim > 0) {
      const auto it = street_vectors.find(road.road_id);
      for (std::size_t d = 0; d < street_dim; ++d) {
        row[c++] = it == street_vectors.end() ? 0.0 : it->second[d];
      }
    }
    for (std::size_t d = 0; d < e_dim; ++d) row[c++] = agg.values[p_dim + s_dim + d];
    const auto lit = labels.find(road.road_id);
    g.labels.push_back(lit == labels.end() ? kUnlabeled : lit->second);
  }
  if (options.normalize) g.features = NormalizeFeatures(g.features);

  std::size_t begin = 0;
  const std::size_t widths[3] = {p_dim, s_dim + street_dim, e_dim};
  for (int k = 0; k < 3; ++k) {
    if (widths[k] == 0) continue;
    g.group_spans.push_back({kFeatureGroups[k], begin, begin + widths[k]});
    begin += widths[k];
  }

  if (options.scheme == WeightScheme::kKnn) {
    g.weights = KnnWeights(g.midpoints, g.road_ids, options.knn_k);
  } else {
    g.weights = QueenWeights(roads, options.queen_snap);
  }
  g.Validate();
  return g;
}

std::vector<RoadSegment> ReadRoads(const fs::path& path) {
  std::vector<RoadSegment> roads;
  for (const auto& line : io::ReadDataLines(path)) {
    const auto parts = io::Split(line, ';');
    RoadSegment road;
    road.road_id = std::string(io::Trim(parts[0]));
    ValidateRoadId(road.road_id);
    for (std::size_t i = 1; i < parts.size(); ++i) {
      const auto xy = io::SplitWhitespace(parts[i]);
      if (xy.empty()) continue;
      if (xy.size() != 2) ThrowData(path.string() + ": bad vertex in road " + road.road_id);
      road.polyline.push_back({io::ParseDouble(xy[0], "x"), io::ParseDouble(xy[1], "y")});
    }
    road.Validate();
    roads.push_back(std::move(road));
  }
  return roads;
}

void WriteRoads(const fs::path& path, std::span<const RoadSegment> roads) {
  std::ostringstream out;
  out << io::FormatHeader("roads") << '\n';
  for (const auto& r : roads) {
    out << r.road_id;
    for (const auto& p : r.polyline) {
      out << "; " << io::FormatDouble(p.x) << ' ' << io::FormatDouble(p.y);
    }
    out << '\n';
  }
  io::WriteFile(path, out.str());
}

FeaturePointTable ReadFeaturePoints(const fs::path& path) {
  const auto lines = io::ReadDataLines(path);
  if (lines.empty()) ThrowData(path.string() + ": missing header");
  const auto header = io::SplitWhitespace(lines[0]);
  if (header.size() < 2 || header[0] != "x" || header[1] != "y") {
    ThrowData(path.string() + ": header must start with 'x y'");
  }
  // Source column -> group index.
  std::vector<int> group_of;
  FeaturePointTable table;
  std::vector<std::vector<std::string>> names(3);
  for (std::size_t c = 2; c < header.size(); ++c) {
    const std::string_view col = header[c];
    const auto dot = col.find('.');
    const std::string_view group = col.substr(0, dot);
    int gi = -1;
    for (int k = 0; k < 3; ++k) {
      if (group == kFeatureGroups[k]) gi = k;
    }
    if (gi < 0) ThrowData(path.string() + ": column '" + std::string(col) + "' names an unknown group");
    group_of.push_back(gi);
    names[gi].emplace_back(col);
    ++table.schema.dims[gi];
  }
  for (int k = 0; k < 3; ++k) {
    table.column_names.insert(table.column_names.end(), names[k].begin(), names[k].end());
  }
  std::size_t offsets[3] = {0, table.schema.dims[0], table.schema.dims[0] + table.schema.dims[1]};
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto t = io::SplitWhitespace(lines[li]);
    if (t.size() != header.size()) ThrowData(path.string() + ": row width differs from header");
    FeaturePoint p;
    p.location = {io::ParseDouble(t[0], "x"), io::ParseDouble(t[1], "y")};
    p.values.assign(table.schema.total(), 0.0);
    std::size_t fill[3] = {0, 0, 0};
    for (std::size_t c = 2; c < t.size(); ++c) {
      const int gi = group_of[c - 2];
      const double v = io::ParseDouble(t[c], "feature value");
      if (!std::isfinite(v)) ThrowData(path.string() + ": non-finite feature value");
      p.values[offsets[gi] + fill[gi]++] = v;
    }
    table.points.push_back(std::move(p));
  }
  return table;
}

void WriteFeaturePoints(const fs::path& path, const FeaturePointTable& table) {
  std::ostringstream out;
  out << io::FormatHeader("feature-points") << '\n' << "x y";
  for (const auto& name : table.column_names) out << ' ' << name;
  out << '\n';
  for (const auto& p : table.points) {
    out << io::FormatDouble(p.location.x) << ' ' << io::FormatDouble(p.location.y);
    for (double v : p.values) out << ' ' << io::FormatDouble(v);
    out << '\n';
  }
  io::WriteFile(path, out.str());
}

std::map<std::string, int> ReadLabels(const fs::path& path) {
  std::map<std::string, int> labels;
  for (const auto& line : io::ReadDataLines(path)) {
    const auto parts = io::Split(line, ',');
    if (parts.size() < 2) ThrowData(path.string() + ": expected 'road_id,class'");
    std::string road(io::Trim(parts[0]));
    if (road == "road_id") continue;  // optional column header
    const std::string_view cls = io::Trim(parts[1]);
    if (cls == "unlabeled") continue;
    if (!labels.emplace(road, ParseClassLabel(cls)).second) {
      ThrowData(path.string() + ": duplicate label for road " + road);
    }
  }
  return labels;
}

void WriteLabels(const fs::path& path, const std::map<std::string, int>& labels) {
  std::ostringstream out;
  out << io::FormatHeader("labels") << '\n';
  for (const auto& [road, l] : labels) out << road << ',' << ClassLabelName(l) << '\n';
  io::WriteFile(path, out.str());
}

void WriteCityGraphBundle(const fs::path& dir, const CityGraph& graph) {
  graph.Validate();
  fs::create_directories(dir);
  std::ostringstream nodes;
  nodes << io::FormatHeader("city-nodes") << '\n';
  for (std::size_t i = 0; i < graph.n(); ++i) {
    nodes << graph.road_ids[i] << ' ' << io::FormatDouble(graph.midpoints[i].x) << ' '
          << io::FormatDouble(graph.midpoints[i].y) << '\n';
  }
  io::WriteFile(dir / "nodes.txt", nodes.str());

  nlohmann::json header;
  header["format"] = "urbanrest.features";
  header["rows"] = graph.features.rows();
  header["cols"] = graph.features.cols();
  auto groups = nlohmann::json::array();
  for (const auto& g : graph.group_spans) {
    groups.push_back({{"name", g.name}, {"begin", g.begin}, {"end", g.end}});
  }
  header["groups"] = groups;
  io::WriteBinaryDoubles(dir / "features.bin", header, graph.features.data());

  std::ostringstream adj;
  adj << io::FormatHeader("adjacency") << '\n';
  adj << WeightSchemeName(graph.weights.scheme) << ' ' << graph.n() << ' '
      << graph.weights.directed_relation_count << '\n';
  for (const auto& [i, j] : graph.weights.adjacency.Edges()) adj << i << ' ' << j << '\n';
  io::WriteFile(dir / "adjacency.txt", adj.str());

  std::map<std::string, int> labels;
  for (std::size_t i = 0; i < graph.n(); ++i) {
    if (graph.labels[i] != kUnlabeled) labels[graph.road_ids[i]] = graph.labels[i];
  }
  WriteLabels(dir / "labels.csv", labels);
}

CityGraph ReadCityGraphBundle(const fs::path& dir) {
  if (!fs::is_directory(dir)) ThrowData("city graph bundle not found: " + dir.string());
  CityGraph g;
  for (const auto& line : io::ReadDataLines(dir / "nodes.txt", "city-nodes")) {
    const auto t = io::SplitWhitespace(line);
    if (t.size() != 3) ThrowData("nodes.txt: expected 'road_id x y'");
    g.road_ids.emplace_back(t[0]);
    g.midpoints.push_back({io::ParseDouble(t[1], "x"), io::ParseDouble(t[2], "y")});
  }
  const std::size_t n = g.road_ids.size();

  auto bin = io::ReadBinaryDoubles(dir / "features.bin", "urbanrest.features");
  const std::size_t rows = bin.header.at("rows").get<std::size_t>();
  const std::size_t cols = bin.header.at("cols").get<std::size_t>();
  if (rows != n || rows * cols != bin.values.size()) ThrowData("features.bin shape mismatch");
  g.features = DenseMatrix(rows, cols);
  g.features.data() = std::move(bin.values);
  for (const auto& grp : bin.header.at("groups")) {
    g.group_spans.push_back({grp.at("name").get<std::string>(), grp.at("begin").get<std::size_t>(),
                             grp.at("end").get<std::size_t>()});
  }

  const auto adj_lines = io::ReadDataLines(dir / "adjacency.txt", "adjacency");
  if (adj_lines.empty()) ThrowData("adjacency.txt: missing scheme line");
  const auto meta = io::SplitWhitespace(adj_lines[0]);
  if (meta.size() != 3) ThrowData("adjacency.txt: expected 'scheme n relations'");
  g.weights.scheme = ParseWeightScheme(meta[0]);
  if (static_cast<std::size_t>(io::ParseInt(meta[1], "node count")) != n) {
    ThrowData("adjacency.txt: node count mismatch");
  }
  g.weights.directed_relation_count = static_cast<std::size_t>(io::ParseInt(meta[2], "relations"));
  g.weights.adjacency = Adjacency(n);
  for (std::size_t li = 1; li < adj_lines.size(); ++li) {
    const auto t = io::SplitWhitespace(adj_lines[li]);
    if (t.size() != 2) ThrowData("adjacency.txt: expected 'i j'");
    g.weights.adjacency.AddEdge(static_cast<std::size_t>(io::ParseInt(t[0], "node")),
                                static_cast<std::size_t>(io::ParseInt(t[1], "node")));
  }

  g.labels.assign(n, kUnlabeled);
  const auto labels = ReadLabels(dir / "labels.csv");
  for (std::size_t i = 0; i < n; ++i) {
    const auto it = labels.find(g.road_ids[i]);
    if (it != labels.end()) g.labels[i] = it->second;
  }
  g.Validate();
  return g;
}

}  // namespace urbanrest
