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

#include "doctest.h"
#include "oracles.hpp"
#include "urbanrest/error.hpp"
#include "urbanrest/fixture.hpp"
#include "urbanrest/gnn.hpp"
#include "urbanrest/io_util.hpp"

using namespace urbanrest;

namespace {

oracle::Dense ToDense(const Adjacency& a) {
  oracle::Dense d(a.n(), std::vector<double>(a.n(), 0.0));
  for (const auto& [i, j] : a.Edges()) d[i][j] = d[j][i] = 1.0;
  return d;
}

oracle::Dense ToDense(const DenseMatrix& m) {
  oracle::Dense d(m.rows(), std::vector<double>(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) d[i][j] = m(i, j);
  return d;
}

void CheckClose(const DenseMatrix& got, const oracle::Dense& want, double tol) {
  REQUIRE(got.rows() == want.size());
  for (std::size_t i = 0; i < got.rows(); ++i) {
    REQUIRE(got.cols() == want[i].size());
    for (std::size_t j = 0; j < got.cols(); ++j) CHECK(std::abs(got(i, j) - want[i][j]) <= tol);
  }
}

double LeakyRelu(double x) { return x > 0 ? x : kLeakyReluSlope * x; }

// Planted 3-class features, linearly separable.
struct Separable {
  DenseMatrix x;
  Adjacency adj;
  std::vector<int> labels;
};

Separable MakeSeparable(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Separable s{DenseMatrix(n, 4), Adjacency(n), std::vector<int>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const int c = static_cast<int>(i % 3);
    s.labels[i] = c;
    for (std::size_t d = 0; d < 4; ++d) s.x(i, d) = rng.Normal(0, 0.3);
    s.x(i, static_cast<std::size_t>(c)) += 3.0;
  }
  // Sparse same-class ring plus a few random links.
  for (std::size_t i = 0; i + 3 < n; ++i) s.adj.AddEdge(i, i + 3);
  for (int k = 0; k < 10; ++k) {
    const std::size_t a = rng.Below(n), b = rng.Below(n);
    if (a != b) s.adj.AddEdge(a, b);
  }
  return s;
}

}  // namespace

TEST_SUITE("gnn-engine") {
  TEST_CASE("normalized adjacency examples") {
    CheckClose(NormalizeAdjacency(Adjacency(1)), {{1.0}}, 0);
    Adjacency two(2);
    two.AddEdge(0, 1);
    CheckClose(NormalizeAdjacency(two), {{0.5, 0.5}, {0.5, 0.5}}, 1e-15);
    Adjacency path(3);
    path.AddEdge(0, 1);
    path.AddEdge(1, 2);
    const double r = 1.0 / std::sqrt(6.0);
    CheckClose(NormalizeAdjacency(path), {{0.5, r, 0}, {r, 1.0 / 3.0, r}, {0, r, 0.5}}, 1e-15);
  }

  TEST_CASE("normalized adjacency equals direct evaluation for all graphs up to 4 nodes") {
    for (std::size_t n = 1; n <= 4; ++n) {
      const std::size_t pairs = n * (n - 1) / 2;
      for (std::size_t mask = 0; mask < (std::size_t{1} << pairs); ++mask) {
        Adjacency a(n);
        std::size_t bit = 0;
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = i + 1; j < n; ++j, ++bit)
            if (mask >> bit & 1) a.AddEdge(i, j);
        const auto got = NormalizeAdjacency(a);
        CheckClose(got, oracle::NormalizedAdjacency(ToDense(a)), 1e-14);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j) CHECK(got(i, j) == got(j, i));
      }
    }
  }

  TEST_CASE("normalized adjacency has spectral radius at most one") {
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t n = 3 + rng.Below(10);
      const auto m = NormalizeAdjacency(oracle::RandomAdjacency(n, 0.4, rng));
      std::vector<double> v(n);
      for (auto& x : v) x = rng.Uniform(-1, 1);
      double lambda = 0;
      for (int it = 0; it < 500; ++it) {
        std::vector<double> w(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j) w[i] += m(i, j) * v[j];
        double norm = 0;
        for (double x : w) norm += x * x;
        norm = std::sqrt(norm);
        if (norm == 0) break;
        lambda = norm / std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
        for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / norm;
      }
      CHECK(lambda <= 1.0 + 1e-9);
    }
  }

  TEST_CASE("gcn forward") {
    Rng rng(32);
    const DenseMatrix h = oracle::RandomMatrix(4, 3, rng);
    Adjacency a(4);
    a.AddEdge(0, 1);
    a.AddEdge(1, 2);
    a.AddEdge(0, 3);
    const DenseMatrix an = NormalizeAdjacency(a);
    const DenseMatrix zero = GcnForward(h, an, DenseMatrix(3, 2), Activation::kRelu);
    for (double v : zero.data()) CHECK(v == 0.0);

    const DenseMatrix one = {{-1.5, 2.0}};
    const DenseMatrix relu = GcnForward(one, DenseMatrix{{1.0}}, DenseMatrix::Identity(2), Activation::kRelu);
    CHECK(relu(0, 0) == 0.0);
    CHECK(relu(0, 1) == 2.0);

    const DenseMatrix w = oracle::RandomMatrix(3, 2, rng);
    const auto want = oracle::NaiveMatMul(oracle::NaiveMatMul(ToDense(an), ToDense(h)), ToDense(w));
    CheckClose(GcnForward(h, an, w, Activation::kIdentity), want, 1e-12);
    CheckClose(GcnForward(h, NormalizeAdjacencySparse(a), w, Activation::kIdentity), want, 1e-12);
    CHECK_THROWS_AS(GcnForward(h, DenseMatrix::Identity(3), w, Activation::kRelu), Error);
  }

  TEST_CASE("gat forward attention") {
    Rng rng(33);
    std::vector<GatHead> heads = {{oracle::RandomMatrix(2, 3, rng), oracle::RandomMatrix(1, 3, rng),
                                   oracle::RandomMatrix(1, 3, rng)}};
    Adjacency two(2);
    two.AddEdge(0, 1);
    const DenseMatrix same = {{0.3, -0.2}, {0.3, -0.2}};
    const auto r = GatForward(same, WithSelfLoops(two), heads, HeadCombine::kConcat, Activation::kIdentity);
    for (const auto& row : r.attention[0]) {
      CHECK(row[0] == doctest::Approx(0.5));
      CHECK(row[1] == doctest::Approx(0.5));
    }

    const DenseMatrix lone = {{0.7, -1.1}};
    const auto s = GatForward(lone, WithSelfLoops(Adjacency(1)), heads, HeadCombine::kConcat, Activation::kRelu);
    CHECK(s.attention[0][0][0] == 1.0);
    const DenseMatrix wh = MatMul(lone, heads[0].w);
    for (std::size_t c = 0; c < 3; ++c) CHECK(s.h(0, c) == doctest::Approx(std::max(0.0, wh(0, c))));

    CHECK_THROWS_AS(GatForward(lone, NeighborLists(1), heads, HeadCombine::kConcat, Activation::kRelu), Error);
  }

  TEST_CASE("gat forward matches a hand-rolled oracle") {
    Rng rng(34);
    for (int trial = 0; trial < 10; ++trial) {
      const std::size_t n = 5;
      const Adjacency a = oracle::RandomAdjacency(n, 0.5, rng);
      const DenseMatrix h = oracle::RandomMatrix(n, 3, rng);
      std::vector<GatHead> heads;
      for (int k = 0; k < 2; ++k) {
        heads.push_back({oracle::RandomMatrix(3, 2, rng), oracle::RandomMatrix(1, 2, rng),
                         oracle::RandomMatrix(1, 2, rng)});
      }
      for (HeadCombine combine : {HeadCombine::kConcat, HeadCombine::kMean}) {
        const auto got = GatForward(h, WithSelfLoops(a), heads, combine, Activation::kIdentity);
        oracle::Dense want(n, std::vector<double>(combine == HeadCombine::kConcat ? 4 : 2, 0.0));
        for (std::size_t k = 0; k < heads.size(); ++k) {
          const auto z = oracle::NaiveMatMul(ToDense(h), ToDense(heads[k].w));
          for (std::size_t i = 0; i < n; ++i) {
            std::vector<std::size_t> nb = {i};
            for (std::size_t j : a.Neighbors(i)) nb.push_back(j);
            std::vector<double> e;
            double denom = 0;
            for (std::size_t j : nb) {
              double s = 0;
              for (std::size_t c = 0; c < 2; ++c) s += heads[k].att_self(0, c) * z[i][c] + heads[k].att_neigh(0, c) * z[j][c];
              e.push_back(std::exp(LeakyRelu(s)));
              denom += e.back();
            }
            double sum = 0;
            for (std::size_t t = 0; t < nb.size(); ++t) {
              const double alpha = e[t] / denom;
              sum += alpha;
              for (std::size_t c = 0; c < 2; ++c) {
                if (combine == HeadCombine::kConcat) {
                  want[i][2 * k + c] += alpha * z[nb[t]][c];
                } else {
                  want[i][c] += alpha * z[nb[t]][c] / 2.0;
                }
              }
            }
            CHECK(sum == doctest::Approx(1.0));
          }
        }
        CheckClose(got.h, want, 1e-12);
        for (const auto& head : got.attention) {
          for (const auto& row : head) {
            CHECK(std::abs(std::accumulate(row.begin(), row.end(), 0.0) - 1.0) <= 1e-12);
          }
        }
      }
    }
  }

  TEST_CASE("sage forward") {
    Rng rng(35);
    const DenseMatrix h = oracle::RandomMatrix(4, 3, rng);
    const DenseMatrix ws = oracle::RandomMatrix(3, 2, rng), wn = oracle::RandomMatrix(3, 2, rng);
    const auto none = SageForward(h, NeighborLists(4), ws, wn, Activation::kRelu);
    DenseMatrix want = MatMul(h, ws);
    ReluInPlace(want);
    CHECK(none == want);

    NeighborLists complete(4);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j)
        if (i != j) complete[i].push_back(j);
    DenseMatrix same(4, 3, 0.4);
    const auto sym = SageForward(same, complete, ws, wn, Activation::kRelu);
    for (std::size_t i = 1; i < 4; ++i)
      for (std::size_t c = 0; c < 2; ++c) CHECK(sym(i, c) == doctest::Approx(sym(0, c)).epsilon(1e-14));

    for (int trial = 0; trial < 10; ++trial) {
      const Adjacency a = oracle::RandomAdjacency(6, 0.4, rng);
      const DenseMatrix x = oracle::RandomMatrix(6, 3, rng);
      NeighborLists nb(6);
      for (std::size_t i = 0; i < 6; ++i) nb[i] = a.Neighbors(i);
      const auto got = SageForward(x, nb, ws, wn, Activation::kIdentity);
      oracle::Dense oracle_out(6, std::vector<double>(2, 0.0));
      for (std::size_t i = 0; i < 6; ++i) {
        std::vector<double> mean(3, 0.0);
        for (std::size_t j : nb[i])
          for (std::size_t d = 0; d < 3; ++d) mean[d] += x(j, d) / static_cast<double>(nb[i].size());
        for (std::size_t c = 0; c < 2; ++c)
          for (std::size_t d = 0; d < 3; ++d) oracle_out[i][c] += x(i, d) * ws(d, c) + mean[d] * wn(d, c);
      }
      CheckClose(got, oracle_out, 1e-12);
    }
  }

  TEST_CASE("softmax rows are distributions") {
    Rng rng(36);
    DenseMatrix logits = oracle::RandomMatrix(20, 3, rng);
    for (auto& v : logits.data()) v *= 50;
    const auto p = SoftmaxRows(logits);
    for (std::size_t i = 0; i < 20; ++i) {
      double s = 0;
      for (std::size_t c = 0; c < 3; ++c) {
        CHECK(p(i, c) >= 0.0);
        CHECK(p(i, c) <= 1.0);
        s += p(i, c);
      }
      CHECK(std::abs(s - 1.0) <= 1e-9);
    }
    const auto q = SoftmaxRows(DenseMatrix{{1, 2, 3}});
    for (std::size_t c = 0; c < 3; ++c) {
      CHECK(q(0, c) > 0.0);
      CHECK(q(0, c) < 1.0);
    }
  }

  TEST_CASE("cross-entropy examples") {
    const std::vector<int> labels = {0, 2};
    const std::vector<std::size_t> mask = {0, 1};
    CHECK(CrossEntropyLoss(DenseMatrix{{1, 0, 0}, {0, 0, 1}}, labels, mask) == 0.0);
    const double third = 1.0 / 3.0;
    CHECK(CrossEntropyLoss(DenseMatrix{{third, third, third}, {third, third, third}}, labels, mask) ==
          doctest::Approx(std::log(3.0)).epsilon(1e-12));
    // Clamped at 1e-12.
    CHECK(CrossEntropyLoss(DenseMatrix{{0, 1, 0}}, std::vector<int>{0}, std::vector<std::size_t>{0}) ==
          doctest::Approx(-std::log(1e-12)));
    CHECK_THROWS_AS(CrossEntropyLoss(DenseMatrix{{1, 0, 0}}, std::vector<int>{0}, std::vector<std::size_t>{}), Error);

    Rng rng(37);
    const auto p = SoftmaxRows(oracle::RandomMatrix(12, 3, rng));
    std::vector<int> y(12);
    for (auto& v : y) v = static_cast<int>(rng.Below(3));
    const std::vector<std::size_t> m = {1, 3, 4, 8, 11};
    double want = 0;
    for (std::size_t i : m) want -= std::log(p(i, static_cast<std::size_t>(y[i])));
    want /= 5;
    CHECK(std::abs(CrossEntropyLoss(p, y, m) - want) <= 1e-12);
  }

  TEST_CASE("evaluation metrics") {
    const std::vector<int> truth = {0, 0, 0, 1, 1, 1, 2, 2, 2};
    std::vector<std::size_t> all(9);
    std::iota(all.begin(), all.end(), 0);
    const auto perfect = Evaluate(truth, truth, all);
    CHECK(perfect.accuracy == 1.0);
    CHECK(perfect.macro_f1 == 1.0);
    for (int i = 0; i < 3; ++i) CHECK(perfect.confusion[i][i] == 3);

    const std::vector<int> constant(9, 0);
    const auto c = Evaluate(constant, truth, all);
    CHECK(c.accuracy == doctest::Approx(1.0 / 3.0));
    CHECK(c.macro_f1 == doctest::Approx(0.5 / 3.0));
    CHECK(c.confusion[1][0] == 3);

    std::vector<int> ten = {0, 1, 2, 0, 1, 2, 0, 1, 2, 0};
    std::vector<int> pred = ten;
    pred[4] = 2;
    std::vector<std::size_t> m10(10);
    std::iota(m10.begin(), m10.end(), 0);
    CHECK(Evaluate(pred, ten, m10).accuracy == doctest::Approx(0.9));
    CHECK_THROWS_AS(Evaluate(pred, ten, std::vector<std::size_t>{}), Error);
  }

  TEST_CASE("analytic gradients match central differences for every layer type") {
    for (Arch arch : {Arch::kGcn, Arch::kGat, Arch::kSage, Arch::kMlp}) {
      for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const auto r = oracle::GradientCheck(arch, seed);
        INFO(ArchName(arch) << " seed " << seed);
        CHECK(r.checked > 0);
        CHECK(r.max_rel_error < 1e-5);
      }
    }
  }

  TEST_CASE("training separates planted classes") {
    const auto s = MakeSeparable(60, 38);
    for (Arch arch : {Arch::kGcn, Arch::kGat, Arch::kSage, Arch::kMlp}) {
      ModelConfig cfg;
      cfg.arch = arch;
      cfg.seed = 3;
      const auto result = Train(s.x, s.adj, s.labels, cfg);
      INFO(ArchName(arch));
      CHECK(result.report.train_accuracy >= 0.95);
      CHECK(result.report.loss_curve.size() == 500);
      CHECK(result.report.loss_curve.back() < result.report.loss_curve.front());
      std::size_t rows = 0;
      for (auto& row : result.report.test.confusion)
        for (std::size_t v : row) rows += v;
      CHECK(rows == result.split.test.size());
    }
  }

  TEST_CASE("collapse mode predicts the only training class") {
    auto s = MakeSeparable(30, 39);
    std::fill(s.labels.begin(), s.labels.end(), 1);
    ModelConfig cfg;
    cfg.epochs = 100;
    cfg.allow_degenerate_labels = true;
    auto result = Train(s.x, s.adj, s.labels, cfg);
    const auto pred = result.model.Predict(s.x, PreparedGraph(s.adj));
    for (int p : pred) CHECK(p == 1);

    cfg.allow_degenerate_labels = false;
    CHECK_THROWS_AS(Train(s.x, s.adj, s.labels, cfg), Error);
  }

  TEST_CASE("training is bit-deterministic for a fixed seed") {
    const auto s = MakeSeparable(45, 40);
    for (Arch arch : {Arch::kGcn, Arch::kGat, Arch::kSage, Arch::kMlp}) {
      ModelConfig cfg;
      cfg.arch = arch;
      cfg.epochs = 50;
      cfg.seed = 9;
      const auto a = Train(s.x, s.adj, s.labels, cfg);
      const auto b = Train(s.x, s.adj, s.labels, cfg);
      CHECK(a.report.loss_curve == b.report.loss_curve);
      CHECK(a.split.test == b.split.test);
    }
  }

  TEST_CASE("layers are permutation equivariant") {
    Rng rng(41);
    const std::size_t n = 9;
    const Adjacency a = oracle::RandomAdjacency(n, 0.35, rng);
    const DenseMatrix x = oracle::RandomMatrix(n, 4, rng);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    rng.Shuffle(perm.begin(), perm.end());
    Adjacency pa(n);
    for (const auto& [i, j] : a.Edges()) pa.AddEdge(perm[i], perm[j]);
    DenseMatrix px(n, 4);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t d = 0; d < 4; ++d) px(perm[i], d) = x(i, d);
    for (Arch arch : {Arch::kGcn, Arch::kGat, Arch::kSage, Arch::kMlp}) {
      ModelConfig cfg;
      cfg.arch = arch;
      cfg.hidden = {8, 4};
      GnnModel model = GnnModel::Build(cfg, 4);
      const auto base = model.Logits(x, PreparedGraph(a));
      const auto moved = model.Logits(px, PreparedGraph(pa));
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < 3; ++c) CHECK(std::abs(moved(perm[i], c) - base(i, c)) <= 1e-12);
    }
  }

  TEST_CASE("checkpoint round-trip preserves predictions") {
    const auto s = MakeSeparable(30, 42);
    oracle::TempDir tmp("model");
    for (Arch arch : {Arch::kGcn, Arch::kGat, Arch::kSage, Arch::kMlp}) {
      ModelConfig cfg;
      cfg.arch = arch;
      cfg.epochs = 20;
      auto result = Train(s.x, s.adj, s.labels, cfg);
      result.model.Save(tmp.path / "m.bin");
      GnnModel loaded = GnnModel::Load(tmp.path / "m.bin");
      CHECK(loaded.config().arch == arch);
      const PreparedGraph g(s.adj);
      CHECK(loaded.Logits(s.x, g) == result.model.Logits(s.x, g));
    }
    io::WriteFile(tmp.path / "junk.bin", "not a model");
    CHECK_THROWS_AS(GnnModel::Load(tmp.path / "junk.bin"), Error);
  }

  TEST_CASE("ablation masks columns") {
    FixtureSpec spec;
    spec.roads = 40;
    spec.perception_dims = 5;
    spec.spatial_dims = 10;
    spec.socioeconomic_dims = 5;
    spec.images_per_road = 0;
    spec.rating_corpus = false;
    const auto g = FixtureCityGraph(GenerateFixture(spec));
    CHECK(g.features.cols() == 20);
    const std::vector<std::string> keep = {"spatial", "socioeconomic"};
    const auto kept = KeepGroups(g, keep);
    CHECK(kept.features.cols() == 15);
    CHECK(kept.group_spans[0] == GroupSpan{"spatial", 0, 10});
    CHECK(kept.features(3, 0) == g.features(3, 5));

    ModelConfig cfg;
    cfg.epochs = 30;
    const std::vector<std::string> all = {"perception", "spatial", "socioeconomic"};
    CHECK(Ablate(g, all, cfg).loss_curve == Train(g, cfg).report.loss_curve);
    CHECK_THROWS_AS(KeepGroups(g, std::vector<std::string>{}), Error);
    CHECK_THROWS_AS(KeepGroups(g, std::vector<std::string>{"weather"}), Error);
    CHECK(StandardAblationBattery().size() == 5);
  }

  TEST_CASE("zeroed features fall back to the majority rate") {
    FixtureSpec spec;
    spec.roads = 120;
    spec.images_per_road = 0;
    spec.rating_corpus = false;
    auto g = FixtureCityGraph(GenerateFixture(spec));
    g.features.Fill(0.0);
    ModelConfig cfg;
    cfg.epochs = 100;
    double acc = 0, majority = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      cfg.seed = seed;
      const auto r = Train(g, cfg);
      acc += r.report.test.accuracy;
      std::size_t counts[3] = {};
      for (std::size_t i : r.split.test) ++counts[g.labels[i]];
      majority += static_cast<double>(*std::max_element(counts, counts + 3)) / r.split.test.size();
    }
    CHECK(std::abs(acc / 10 - majority / 10) <= 0.10);
  }

  TEST_CASE("null-signal fixtures hover at the majority rate") {
    // MLP on the autocorrelated fixture, and every architecture on a
    // spatially independent one.
    struct Case {
      Arch arch;
      bool autocorrelated;
    };
    for (const Case c : {Case{Arch::kMlp, true}, Case{Arch::kGcn, false}, Case{Arch::kGat, false},
                         Case{Arch::kSage, false}}) {
      FixtureSpec spec;
      spec.roads = 150;
      spec.signal = 0.0;
      spec.autocorrelated = c.autocorrelated;
      spec.images_per_road = 0;
      spec.rating_corpus = false;
      const auto g = FixtureCityGraph(GenerateFixture(spec));
      ModelConfig cfg;
      cfg.arch = c.arch;
      cfg.epochs = 100;
      double acc = 0, majority = 0;
      for (std::uint64_t seed = 0; seed < 10; ++seed) {
        cfg.seed = seed;
        const auto r = Train(g, cfg);
        acc += r.report.test.accuracy;
        std::size_t counts[3] = {};
        for (std::size_t i : r.split.test) ++counts[g.labels[i]];
        majority += static_cast<double>(*std::max_element(counts, counts + 3)) / r.split.test.size();
      }
      INFO(ArchName(c.arch));
      CHECK(std::abs(acc / 10 - majority / 10) <= 0.10);
    }
  }

  TEST_CASE("model configuration validation") {
    ModelConfig cfg;
    CHECK(cfg.epochs == 500);
    CHECK(cfg.hidden == std::vector<std::size_t>{64, 32});
    CHECK(cfg.heads == 4);
    cfg.hidden = {};
    CHECK_THROWS_AS(cfg.Validate(), Error);
    cfg = ModelConfig{};
    cfg.train_fraction = 0.9;
    CHECK_THROWS_AS(cfg.Validate(), Error);
    CHECK(ParseArch("sage") == Arch::kSage);
    CHECK_THROWS_AS(ParseArch("rnn"), Error);
  }
}
