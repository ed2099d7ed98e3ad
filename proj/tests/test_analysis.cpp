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

#include <cmath>
#include <limits>

#include "doctest.h"
#include "oracles.hpp"
#include "urbanrest/analysis.hpp"
#include "urbanrest/error.hpp"
#include "urbanrest/io_util.hpp"

using namespace urbanrest;

namespace {

// `per` points around each center with the given spread.
DenseMatrix Clouds(const std::vector<std::vector<double>>& centers, std::size_t per, double spread,
                   Rng& rng) {
  const std::size_t d = centers[0].size();
  DenseMatrix x(centers.size() * per, d);
  for (std::size_t c = 0; c < centers.size(); ++c)
    for (std::size_t i = 0; i < per; ++i)
      for (std::size_t j = 0; j < d; ++j) x(c * per + i, j) = centers[c][j] + rng.Normal(0, spread);
  return x;
}

double Sse(const DenseMatrix& x, const std::vector<int>& assign, std::size_t k) {
  DenseMatrix mean(k, x.cols());
  std::vector<double> count(k, 0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    ++count[static_cast<std::size_t>(assign[i])];
    for (std::size_t j = 0; j < x.cols(); ++j) mean(static_cast<std::size_t>(assign[i]), j) += x(i, j);
  }
  double s = 0;
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) {
      const auto c = static_cast<std::size_t>(assign[i]);
      const double diff = x(i, j) - mean(c, j) / count[c];
      s += diff * diff;
    }
  return s;
}

EntityGraph Star(int center, std::vector<int> leaves) {
  EntityGraph g;
  g.AddNode(center, {0, 0});
  for (int l : leaves) {
    g.AddNode(l, {10, 0});
    g.AddEdge(center, l);
  }
  return g;
}

}  // namespace

TEST_SUITE("analysis") {
  TEST_CASE("kmeans recovers separated clouds") {
    Rng rng(61);
    const auto x = Clouds({{0, 0}, {10, 0}, {0, 10}}, 20, 0.5, rng);
    const auto r = KMeans(x, 3, 4);
    CHECK(r.k == 3);
    CHECK(r.centers.rows() == 3);
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t i = 1; i < 20; ++i) CHECK(r.assignments[c * 20 + i] == r.assignments[c * 20]);
    CHECK(r.assignments[0] != r.assignments[20]);
    CHECK(r.assignments[20] != r.assignments[40]);
    CHECK(r.sse == doctest::Approx(Sse(x, r.assignments, 3)).epsilon(1e-9));
    for (std::size_t i = 1; i < r.sse_trace.size(); ++i) CHECK(r.sse_trace[i] <= r.sse_trace[i - 1] + 1e-9);
    CHECK(KMeans(x, 3, 4).assignments == r.assignments);
  }

  TEST_CASE("kmeans errors") {
    DenseMatrix same(6, 2, 1.0);
    try {
      KMeans(same, 2, 1);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("degenerate breaks in data") != std::string::npos);
    }
    CHECK_THROWS_AS(KMeans(DenseMatrix(3, 2), 4, 1), Error);
    CHECK_THROWS_AS(KMeans(DenseMatrix(3, 2), 1, 1), Error);
    DenseMatrix bad = {{0, 0}, {1, std::numeric_limits<double>::quiet_NaN()}, {2, 2}};
    CHECK_THROWS_AS(KMeans(bad, 2, 1), Error);
  }

  TEST_CASE("kmeans finds the optimal two-partition on small inputs") {
    Rng rng(62);
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const DenseMatrix x = oracle::RandomMatrix(8, 2, rng);
      double best = std::numeric_limits<double>::infinity();
      for (unsigned mask = 1; mask < (1u << 7); ++mask) {
        std::vector<int> a(8, 0);
        for (int i = 0; i < 7; ++i) a[static_cast<std::size_t>(i)] = mask >> i & 1;
        best = std::min(best, Sse(x, a, 2));
      }
      hits += std::abs(KMeans(x, 2, seed).sse - best) <= 1e-9;
    }
    CHECK(hits >= 9);
  }

  TEST_CASE("silhouette") {
    Rng rng(63);
    const auto x = Clouds({{0, 0}, {50, 50}}, 15, 0.5, rng);
    std::vector<int> truth(30);
    for (std::size_t i = 15; i < 30; ++i) truth[i] = 1;
    CHECK(Silhouette(x, truth) > 0.95);

    const auto blob = Clouds({{0, 0}}, 200, 1.0, rng);
    CHECK(KMeans(blob, 2, 1).silhouette < 0.5);
    std::vector<int> half(200);
    for (std::size_t i = 0; i < 200; ++i) half[i] = blob(i, 0) > 0;
    CHECK(Silhouette(blob, half) < 0.5);

    // Singletons contribute 0.
    const DenseMatrix three = {{0}, {1}, {10}};
    CHECK(Silhouette(three, std::vector<int>{0, 0, 1}) == doctest::Approx((0.9 + 1.0 - 1.0 / 9.0) / 3));
    CHECK_THROWS_AS(Silhouette(three, std::vector<int>{0, 1}), Error);
  }

  TEST_CASE("silhouette sweep recovers planted k") {
    for (std::size_t k : {2u, 3u, 4u}) {
      Rng rng(64 + k);
      std::vector<std::vector<double>> centers;
      for (std::size_t c = 0; c < k; ++c) centers.push_back({20.0 * std::cos(c * 2.0), 20.0 * std::sin(c * 2.0), 5.0 * c});
      const auto x = Clouds(centers, 25, 1.0, rng);
      const auto sweep = SilhouetteSweep(x, 2, 8, 5);
      CHECK(sweep.best_k == k);
      CHECK(sweep.ks.size() == 7);
      CHECK(sweep.best.silhouette == sweep.scores[k - 2]);
    }
    CHECK_THROWS_AS(SilhouetteSweep(DenseMatrix(5, 2), 2, 5, 1), Error);
    CHECK_THROWS_AS(SilhouetteSweep(DenseMatrix(5, 2), 3, 2, 1), Error);
  }

  TEST_CASE("class structure graphs") {
    std::map<std::string, std::vector<EntityGraph>> groups;
    groups["high"] = {Star(5, {1, 2}), Star(5, {3, 4})};
    groups["low"] = {};
    EntityGraph single;
    single.AddNode(9, {0, 0});
    groups["medium"] = {single};
    const auto out = ClassStructureGraphs(groups, 3);
    REQUIRE(out.size() == 1);
    CHECK(out[0].group == "high");
    CHECK(out[0].road_count == 2);
    CHECK(out[0].merged.node_count() == 5);
    REQUIRE(out[0].top.size() == 3);
    CHECK(out[0].top[0].class_id == 5);
    CHECK(out[0].top[0].centrality == doctest::Approx(1.0));
    CHECK(out[0].top[1].class_id == 1);
    CHECK(out[0].top[1].centrality == doctest::Approx(0.25));

    ClassNames names;
    names.Set(5, "tree");
    const auto report = FormatStructureReport(out, names);
    CHECK(report.find("high (2 roads)") != std::string::npos);
    CHECK(report.find("tree\t1.0000") != std::string::npos);
    CHECK(report.find("class_1\t0.2500") != std::string::npos);
  }

  TEST_CASE("output tables") {
    Rng rng(65);
    const auto x = Clouds({{0, 0}, {9, 9}}, 5, 0.2, rng);
    const auto sweep = SilhouetteSweep(x, 2, 3, 1);
    oracle::TempDir tmp("analysis");
    WriteSilhouetteTable(tmp.path / "s.csv", sweep);
    CHECK(io::ReadFile(tmp.path / "s.csv").find("# best_k 2") != std::string::npos);
    std::vector<std::string> ids;
    for (int i = 0; i < 10; ++i) ids.push_back("r" + std::to_string(i));
    WriteClusterAssignments(tmp.path / "c.csv", ids, sweep.best);
    CHECK(io::ReadDataLines(tmp.path / "c.csv", "clusters").size() == 11);
    CHECK_THROWS_AS(WriteClusterAssignments(tmp.path / "c.csv", std::vector<std::string>{"a"}, sweep.best), Error);
  }
}
