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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "urbanrest/entity_graph.hpp"
#include "urbanrest/error.hpp"
#include "urbanrest/geometry.hpp"
#include "urbanrest/io_util.hpp"
#include "urbanrest/rng.hpp"

using namespace urbanrest;

namespace {

SegmentationMap Map(int w, int h, std::vector<int> classes) {
  SegmentationMap m;
  m.width = w;
  m.height = h;
  m.classes = std::move(classes);
  return m;
}

std::vector<EntityNode> RandomNodes(Rng& rng, std::size_t count, double extent) {
  std::vector<int> ids(kNumEntityClasses);
  std::iota(ids.begin(), ids.end(), 0);
  rng.Shuffle(ids.begin(), ids.end());
  std::vector<EntityNode> nodes;
  for (std::size_t i = 0; i < count; ++i) {
    nodes.push_back({ids[i], {rng.Uniform(0, extent), rng.Uniform(0, extent)}});
  }
  return nodes;
}

std::vector<std::pair<int, int>> EdgeList(const EntityGraph& g) {
  return {g.edges().begin(), g.edges().end()};
}

EntityGraph RandomGraph(Rng& rng, std::size_t count, double p) {
  EntityGraph g;
  std::set<int> ids;
  while (ids.size() < count) ids.insert(static_cast<int>(rng.Below(kNumEntityClasses)));
  for (int id : ids) g.AddNode(id, {rng.Uniform(0, 90), rng.Uniform(0, 60)});
  for (int a : ids)
    for (int b : ids)
      if (a < b && rng.Uniform() < p) g.AddEdge(a, b);
  return g;
}

}  // namespace

TEST_SUITE("entity-graph") {
  TEST_CASE("centroids of a uniform raster sit at the grid center") {
    const auto nodes = ComputeClassCentroids(Map(4, 4, std::vector<int>(16, 7)));
    REQUIRE(nodes.size() == 1);
    CHECK(nodes[0].class_id == 7);
    CHECK(nodes[0].centroid == Point2{1.5, 1.5});
  }

  TEST_CASE("single-pixel classes map to their pixel coordinates") {
    const auto nodes = ComputeClassCentroids(Map(2, 1, {0, 1}));
    REQUIRE(nodes.size() == 2);
    CHECK(nodes[0].class_id == 0);
    CHECK(nodes[0].centroid == Point2{0, 0});
    CHECK(nodes[1].class_id == 1);
    CHECK(nodes[1].centroid == Point2{1, 0});
  }

  TEST_CASE("centroids match a brute-force pixel scan") {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<int> px(64);
      for (auto& c : px) c = static_cast<int>(rng.Below(3)) * 11;
      const auto nodes = ComputeClassCentroids(Map(8, 8, px));
      for (const auto& node : nodes) {
        double sx = 0, sy = 0, n = 0;
        for (int y = 0; y < 8; ++y)
          for (int x = 0; x < 8; ++x)
            if (px[y * 8 + x] == node.class_id) {
              sx += x;
              sy += y;
              n += 1;
            }
        REQUIRE(n > 0);
        CHECK(node.centroid.x == doctest::Approx(sx / n).epsilon(1e-12));
        CHECK(node.centroid.y == doctest::Approx(sy / n).epsilon(1e-12));
        // Centroid inside the bounding box of the producing pixels.
        CHECK(node.centroid.x >= 0);
        CHECK(node.centroid.x <= 7);
      }
      std::set<int> present(px.begin(), px.end());
      CHECK(nodes.size() == present.size());
    }
  }

  TEST_CASE("empty or invalid rasters are rejected") {
    CHECK_THROWS_WITH_AS(ComputeClassCentroids(Map(0, 0, {})), "empty segmentation map", Error);
    CHECK_THROWS_AS(ComputeClassCentroids(Map(2, 1, {0, 150})), Error);
    CHECK_THROWS_AS(ComputeClassCentroids(Map(2, 2, {0, 1})), Error);
  }

  TEST_CASE("threshold is strict") {
    const std::vector<EntityNode> near = {{1, {0, 0}}, {2, {44, 0}}};
    const std::vector<EntityNode> at = {{1, {0, 0}}, {2, {45, 0}}};
    CHECK(BuildEntityGraph(near, 45).edge_count() == 1);
    CHECK(BuildEntityGraph(at, 45).edge_count() == 0);
    CHECK(BuildEntityGraph(std::vector<EntityNode>{}, 45).empty());
    CHECK(kDefaultEntityThreshold == 45.0);
  }

  TEST_CASE("edges equal the all-pairs distance oracle") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
      const auto nodes = RandomNodes(rng, 10, 120);
      CHECK(EdgeList(BuildEntityGraph(nodes, 45)) == oracle::BruteForceEdges(nodes, 45));
    }
  }

  TEST_CASE("edge set is order-free, monotone in T and translation invariant") {
    Rng rng(12);
    for (int trial = 0; trial < 30; ++trial) {
      auto nodes = RandomNodes(rng, 12, 150);
      for (auto& n : nodes) n.centroid = {std::round(n.centroid.x), std::round(n.centroid.y)};
      const auto base = EdgeList(BuildEntityGraph(nodes, 45));
      auto shuffled = nodes;
      rng.Shuffle(shuffled.begin(), shuffled.end());
      CHECK(EdgeList(BuildEntityGraph(shuffled, 45)) == base);

      const auto wider = BuildEntityGraph(nodes, 60);
      for (const auto& [a, b] : base) CHECK(wider.HasEdge(a, b));

      // Integer coordinates keep the translated distances exact.
      auto moved = nodes;
      for (auto& n : moved) n.centroid = {n.centroid.x + 1024.0, n.centroid.y - 512.0};
      CHECK(EdgeList(BuildEntityGraph(moved, 45)) == base);
    }
  }

  TEST_CASE("merge is an idempotent union") {
    Rng rng(13);
    const auto g = BuildEntityGraph(RandomNodes(rng, 8, 100), 45);
    const std::vector<EntityGraph> twice = {g, g};
    const auto m = MergeRoadGraphs(twice);
    CHECK(m.edges() == g.edges());
    CHECK(m.nodes() == g.nodes());

    EntityGraph a, b;
    a.AddNode(1, {0, 0});
    b.AddNode(2, {200, 0});
    const std::vector<EntityGraph> disjoint = {a, b};
    const auto u = MergeRoadGraphs(disjoint);
    CHECK(u.node_count() == 2);
    CHECK(u.edge_count() == 0);

    CHECK_THROWS_WITH_AS(MergeRoadGraphs(std::vector<EntityGraph>{}), "road has no images", Error);
  }

  TEST_CASE("merge matches the set-union oracle and is order-free") {
    Rng rng(14);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<EntityGraph> gs = {RandomGraph(rng, 6, 0.4), RandomGraph(rng, 7, 0.4),
                                     RandomGraph(rng, 5, 0.4)};
      std::set<int> nodes;
      std::set<std::pair<int, int>> edges;
      std::map<int, std::pair<double, int>> xs;
      for (const auto& g : gs) {
        for (const auto& [id, c] : g.nodes()) {
          nodes.insert(id);
          xs[id].first += c.x;
          xs[id].second += 1;
        }
        edges.insert(g.edges().begin(), g.edges().end());
      }
      const auto m = MergeRoadGraphs(gs);
      const auto ids = m.ClassIds();
      CHECK(std::set<int>(ids.begin(), ids.end()) == nodes);
      CHECK(m.edges() == edges);
      for (const auto& [id, c] : m.nodes()) {
        CHECK(c.x == doctest::Approx(xs[id].first / xs[id].second).epsilon(1e-12));
      }
      // Commutative and associative at the node/edge-set level.
      std::vector<EntityGraph> rev = {gs[2], gs[1], gs[0]};
      const auto mr = MergeRoadGraphs(rev);
      CHECK(mr.edges() == m.edges());
      CHECK(mr.ClassIds() == m.ClassIds());
      const std::vector<EntityGraph> first = {gs[0], gs[1]};
      const std::vector<EntityGraph> nested = {MergeRoadGraphs(first), gs[2]};
      CHECK(MergeRoadGraphs(nested).edges() == m.edges());
    }
  }

  TEST_CASE("degree centrality on star, path and isolated nodes") {
    EntityGraph star;
    for (int i = 0; i < 4; ++i) star.AddNode(i, {0, 0});
    for (int i = 1; i < 4; ++i) star.AddEdge(0, i);
    CHECK(DegreeCentrality(star, 0) == 1.0);
    const auto top = TopCentrality(star, 1);
    REQUIRE(top.size() == 1);
    CHECK(top[0].class_id == 0);
    CHECK(top[0].centrality == 1.0);

    EntityGraph path;
    for (int i = 0; i < 4; ++i) path.AddNode(i, {0, 0});
    for (int i = 0; i < 3; ++i) path.AddEdge(i, i + 1);
    CHECK(DegreeCentrality(path, 0) == doctest::Approx(1.0 / 3.0));

    EntityGraph iso;
    for (int i = 0; i < 5; ++i) iso.AddNode(i, {0, 0});
    iso.AddEdge(0, 1);
    CHECK(DegreeCentrality(iso, 4) == 0.0);

    EntityGraph lone;
    lone.AddNode(3, {0, 0});
    CHECK_THROWS_AS(DegreeCentrality(lone, 3), Error);
    CHECK_THROWS_AS(DegreeCentrality(iso, 99), Error);
  }

  TEST_CASE("top centrality handles ties and short lists") {
    EntityGraph g;
    for (int i : {9, 4, 6}) g.AddNode(i, {0, 0});
    const auto top = TopCentrality(g, 5);
    REQUIRE(top.size() == 3);
    CHECK(top[0].class_id == 4);
    CHECK(top[1].class_id == 6);
    CHECK(top[2].class_id == 9);
    for (const auto& e : top) CHECK(e.centrality == 0.0);
    CHECK(TopCentrality(EntityGraph{}, 3).empty());
  }

  TEST_CASE("top centrality matches a full sort of per-node centralities") {
    Rng rng(15);
    for (int trial = 0; trial < 20; ++trial) {
      const auto g = RandomGraph(rng, 12, 0.3);
      std::vector<std::pair<double, int>> all;
      double degree_sum = 0;
      for (int id : g.ClassIds()) {
        int deg = 0;
        for (const auto& [a, b] : g.edges()) deg += (a == id) + (b == id);
        degree_sum += deg;
        all.push_back({-deg / 11.0, id});
        const double c = DegreeCentrality(g, id);
        CHECK(c >= 0.0);
        CHECK(c <= 1.0);
      }
      CHECK(degree_sum == 2.0 * static_cast<double>(g.edge_count()));
      std::sort(all.begin(), all.end());
      const auto top = TopCentrality(g, 10);
      REQUIRE(top.size() == 10);
      for (std::size_t i = 0; i < 10; ++i) {
        CHECK(top[i].class_id == all[i].second);
        CHECK(top[i].centrality == doctest::Approx(-all[i].first).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("raster and graph files round-trip") {
    oracle::TempDir tmp("eg");
    SegmentationMap m = Map(3, 2, {0, 1, 2, 2, 1, 149});
    WriteSegmentationRaster(tmp.path / "a.seg", m);
    const auto back = ReadSegmentationRaster(tmp.path / "a.seg");
    CHECK(back.width == 3);
    CHECK(back.height == 2);
    CHECK(back.classes == m.classes);

    io::WriteFile(tmp.path / "plain.seg", "2 1 150\n5 6\n");
    CHECK(ReadSegmentationRaster(tmp.path / "plain.seg").classes == std::vector<int>{5, 6});
    io::WriteFile(tmp.path / "future.seg", "# urbanrest-segmentation v9\n2 1 150\n5 6\n");
    CHECK_THROWS_AS(ReadSegmentationRaster(tmp.path / "future.seg"), Error);
    io::WriteFile(tmp.path / "bad.seg", "2 1 150\n5 150\n");
    CHECK_THROWS_AS(ReadSegmentationRaster(tmp.path / "bad.seg"), Error);

    Rng rng(16);
    const auto g = RandomGraph(rng, 9, 0.3);
    WriteEntityGraph(tmp.path / "g.nodes", tmp.path / "g.edges", g);
    const auto rg = ReadEntityGraph(tmp.path / "g.nodes", tmp.path / "g.edges");
    CHECK(rg.nodes() == g.nodes());
    CHECK(rg.edges() == g.edges());
  }

  TEST_CASE("class names fall back to class_<id>") {
    ClassNames names;
    names.Set(4, "tree");
    CHECK(names.Name(4) == "tree");
    CHECK(names.Name(77) == "class_77");
  }
}
