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

#include "urbanrest/entity_graph.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "urbanrest/error.hpp"
#include "urbanrest/io_util.hpp"

namespace urbanrest {
namespace fs = std::filesystem;

void SegmentationMap::Validate() const {
  if (width <= 0 || height <= 0 || classes.empty()) {
    ThrowData("empty segmentation map");
  }
  if (classes.size() != static_cast<std::size_t>(width) * height) {
    ThrowData("segmentation map size does not match width x height");
  }
  for (int c : classes) {
    if (c < 0 || c >= kNumEntityClasses) {
      ThrowData("segmentation class id out of range: " + std::to_string(c));
    }
  }
}

void EntityGraph::AddNode(int class_id, Point2 centroid) {
  if (class_id < 0 || class_id >= kNumEntityClasses) {
    ThrowData("entity class id out of range: " + std::to_string(class_id));
  }
  nodes_[class_id] = centroid;
}

void EntityGraph::AddEdge(int a, int b) {
  if (a == b) ThrowData("entity graph self-loop on class " + std::to_string(a));
  if (!HasNode(a) || !HasNode(b)) ThrowData("entity graph edge references a missing node");
  edges_.emplace(std::min(a, b), std::max(a, b));
}

bool EntityGraph::HasEdge(int a, int b) const {
  return edges_.contains({std::min(a, b), std::max(a, b)});
}

int EntityGraph::Degree(int class_id) const {
  int d = 0;
  for (const auto& [a, b] : edges_) d += (a == class_id) + (b == class_id);
  return d;
}

std::vector<int> EntityGraph::Neighbors(int class_id) const {
  std::vector<int> out;
  for (const auto& [a, b] : edges_) {
    if (a == class_id) out.push_back(b);
    if (b == class_id) out.push_back(a);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> EntityGraph::ClassIds() const {
  std::vector<int> ids;
  ids.reserve(nodes_.size());
  for (const auto& [id, _] : nodes_) ids.push_back(id);
  return ids;
}

std::vector<EntityNode> ComputeClassCentroids(const SegmentationMap& map) {
  if (map.width <= 0 || map.height <= 0 || map.classes.empty()) {
    ThrowData("empty segmentation map");
  }
  map.Validate();
  std::vector<double> sx(kNumEntityClasses, 0.0), sy(kNumEntityClasses, 0.0);
  std::vector<std::size_t> count(kNumEntityClasses, 0);
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < map.width; ++x) {
      const int c = map.At(x, y);
      sx[c] += x;
      sy[c] += y;
      ++count[c];
    }
  }
  std::vector<EntityNode> nodes;
  for (int c = 0; c < kNumEntityClasses; ++c) {
    if (count[c] == 0) continue;
    const double n = static_cast<double>(count[c]);
    nodes.push_back({c, {sx[c] / n, sy[c] / n}});
  }
  return nodes;
}

EntityGraph BuildEntityGraph(std::span<const EntityNode> nodes, double threshold) {
  if (!(threshold > 0.0)) ThrowUsage("entity threshold must be positive");
  EntityGraph graph(threshold);
  for (const auto& n : nodes) graph.AddNode(n.class_id, n.centroid);
  const auto& placed = graph.nodes();
  for (auto i = placed.begin(); i != placed.end(); ++i) {
    for (auto j = std::next(i); j != placed.end(); ++j) {
      if (Distance(i->second, j->second) < threshold) graph.AddEdge(i->first, j->first);
    }
  }
  return graph;
}

EntityGraph MergeRoadGraphs(std::span<const EntityGraph> graphs) {
  if (graphs.empty()) ThrowData("road has no images");
  const double threshold = graphs.front().threshold();
  std::map<int, std::pair<Point2, int>> sums;
  for (const auto& g : graphs) {
    if (g.threshold() != threshold) ThrowData("cannot merge graphs built with different thresholds");
    for (const auto& [id, c] : g.nodes()) {
      auto& [sum, count] = sums[id];
      sum.x += c.x;
      sum.y += c.y;
      ++count;
    }
  }
  EntityGraph merged(threshold);
  for (const auto& [id, acc] : sums) {
    merged.AddNode(id, {acc.first.x / acc.second, acc.first.y / acc.second});
  }
  for (const auto& g : graphs) {
    for (const auto& [a, b] : g.edges()) merged.AddEdge(a, b);
  }
  return merged;
}

double DegreeCentrality(const EntityGraph& graph, int class_id) {
  if (graph.node_count() < 2) ThrowData("centrality undefined for graphs with fewer than 2 nodes");
  if (!graph.HasNode(class_id)) {
    ThrowData("class " + std::to_string(class_id) + " is not a node of the graph");
  }
  return static_cast<double>(graph.Degree(class_id)) /
         static_cast<double>(graph.node_count() - 1);
}

std::vector<CentralityEntry> TopCentrality(const EntityGraph& graph, std::size_t k) {
  if (k < 1) ThrowUsage("top_centrality requires k >= 1");
  std::vector<CentralityEntry> all;
  if (graph.empty()) return all;
  std::map<int, int> degree;
  for (const auto& [a, b] : graph.edges()) {
    ++degree[a];
    ++degree[b];
  }
  const double denom = graph.node_count() > 1 ? static_cast<double>(graph.node_count() - 1) : 1.0;
  for (const auto& [id, _] : graph.nodes()) {
    const auto it = degree.find(id);
    all.push_back({id, it == degree.end() ? 0.0 : it->second / denom});
  }
  std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    if (a.centrality != b.centrality) return a.centrality > b.centrality;
    return a.class_id < b.class_id;
  });
  if (all.size() > k) all.resize(k);
  return all;
}

ClassNames ClassNames::Load(const fs::path& path) {
  ClassNames names;
  for (const auto& line : io::ReadDataLines(path)) {
    const std::string_view sv = line;
    const auto sp = sv.find_first_of(" \t");
    if (sp == std::string_view::npos) ThrowData("class name line without a name: " + line);
    names.Set(static_cast<int>(io::ParseInt(sv.substr(0, sp), "class id")),
              std::string(io::Trim(sv.substr(sp))));
  }
  return names;
}

std::string ClassNames::Name(int id) const {
  const auto it = names_.find(id);
  return it == names_.end() ? "class_" + std::to_string(id) : it->second;
}

SegmentationMap ReadSegmentationRaster(const fs::path& path, std::string image_id,
                                       std::string road_id) {
  std::string text = io::ReadFile(path);
  if (text.starts_with("#")) {
    // Optional format header line.
    const auto eol = text.find('\n');
    const std::string header = text.substr(0, eol);
    if (header != io::FormatHeader("segmentation")) {
      ThrowData(path.string() + ": unsupported raster header '" + header + "'");
    }
    text.erase(0, eol == std::string::npos ? text.size() : eol + 1);
  }
  const auto tokens = io::SplitWhitespace(text);
  if (tokens.size() < 3) ThrowData(path.string() + ": empty segmentation map");
  SegmentationMap map;
  map.width = static_cast<int>(io::ParseInt(tokens[0], "raster width"));
  map.height = static_cast<int>(io::ParseInt(tokens[1], "raster height"));
  const long long k = io::ParseInt(tokens[2], "raster class count");
  if (k < 1 || k > kNumEntityClasses) ThrowData(path.string() + ": class count out of range");
  if (map.width <= 0 || map.height <= 0) ThrowData(path.string() + ": empty segmentation map");
  const std::size_t expected = static_cast<std::size_t>(map.width) * map.height;
  if (tokens.size() - 3 != expected) {
    ThrowData(path.string() + ": expected " + std::to_string(expected) + " class ids");
  }
  map.classes.reserve(expected);
  for (std::size_t i = 3; i < tokens.size(); ++i) {
    const long long c = io::ParseInt(tokens[i], "class id");
    if (c < 0 || c >= k) ThrowData(path.string() + ": class id " + std::to_string(c) + " >= K");
    map.classes.push_back(static_cast<int>(c));
  }
  map.image_id = image_id.empty() ? path.stem().string() : std::move(image_id);
  map.road_id = std::move(road_id);
  return map;
}

void WriteSegmentationRaster(const fs::path& path, const SegmentationMap& map) {
  map.Validate();
  std::ostringstream out;
  out << io::FormatHeader("segmentation") << '\n';
  out << map.width << ' ' << map.height << ' ' << kNumEntityClasses << '\n';
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < map.width; ++x) {
      if (x) out << ' ';
      out << map.At(x, y);
    }
    out << '\n';
  }
  io::WriteFile(path, out.str());
}

std::vector<RasterManifestEntry> ReadRasterManifest(const fs::path& path) {
  std::vector<RasterManifestEntry> entries;
  const fs::path base = path.parent_path();
  for (const auto& line : io::ReadDataLines(path)) {
    const auto parts = io::Split(line, ',');
    if (parts.size() != 2) ThrowData(path.string() + ": expected 'raster,road_id': " + line);
    fs::path raster(std::string(io::Trim(parts[0])));
    if (raster.is_relative()) raster = base / raster;
    std::string road(io::Trim(parts[1]));
    ValidateRoadId(road);
    entries.push_back({std::move(raster), std::move(road)});
  }
  return entries;
}

void WriteEntityGraph(const fs::path& nodes_file, const fs::path& edges_file,
                      const EntityGraph& graph) {
  std::ostringstream nodes;
  nodes << io::FormatHeader("entity-nodes") << '\n';
  for (const auto& [id, c] : graph.nodes()) {
    nodes << id << ' ' << io::FormatDouble(c.x) << ' ' << io::FormatDouble(c.y) << '\n';
  }
  std::ostringstream edges;
  edges << io::FormatHeader("entity-edges") << '\n';
  for (const auto& [a, b] : graph.edges()) edges << a << ' ' << b << '\n';
  io::WriteFile(nodes_file, nodes.str());
  io::WriteFile(edges_file, edges.str());
}

EntityGraph ReadEntityGraph(const fs::path& nodes_file, const fs::path& edges_file,
                            double threshold) {
  EntityGraph graph(threshold);
  for (const auto& line : io::ReadDataLines(nodes_file, "entity-nodes")) {
    const auto t = io::SplitWhitespace(line);
    if (t.size() != 3) ThrowData(nodes_file.string() + ": expected 'class_id x y'");
    graph.AddNode(static_cast<int>(io::ParseInt(t[0], "class id")),
                  {io::ParseDouble(t[1], "x"), io::ParseDouble(t[2], "y")});
  }
  for (const auto& line : io::ReadDataLines(edges_file, "entity-edges")) {
    const auto t = io::SplitWhitespace(line);
    if (t.size() != 2) ThrowData(edges_file.string() + ": expected 'class_i class_j'");
    graph.AddEdge(static_cast<int>(io::ParseInt(t[0], "class id")),
                  static_cast<int>(io::ParseInt(t[1], "class id")));
  }
  return graph;
}

void WriteEntityGraphDir(const fs::path& dir,
                         const std::vector<std::pair<std::string, EntityGraph>>& graphs) {
  fs::create_directories(dir);
  std::ostringstream index;
  index << io::FormatHeader("entity-graph-index") << '\n';
  for (const auto& [road, graph] : graphs) {
    ValidateRoadId(road);
    WriteEntityGraph(dir / (road + ".nodes"), dir / (road + ".edges"), graph);
    index << road << '\n';
  }
  io::WriteFile(dir / "roads.txt", index.str());
}

std::vector<std::pair<std::string, EntityGraph>> ReadEntityGraphDir(const fs::path& dir,
                                                                    double threshold) {
  std::vector<std::pair<std::string, EntityGraph>> graphs;
  for (const auto& road : io::ReadDataLines(dir / "roads.txt", "entity-graph-index")) {
    ValidateRoadId(road);
    graphs.emplace_back(road, ReadEntityGraph(dir / (road + ".nodes"),
                                              dir / (road + ".edges"), threshold));
  }
  return graphs;
}

void ValidateRoadId(const std::string& road_id) {
  if (road_id.empty()) ThrowData("empty road id");
  for (char c : road_id) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
    if (!ok) ThrowData("road id '" + road_id + "' may only contain [A-Za-z0-9_.-]");
  }
  if (road_id == "." || road_id == "..") ThrowData("invalid road id '" + road_id + "'");
}

}  // namespace urbanrest
