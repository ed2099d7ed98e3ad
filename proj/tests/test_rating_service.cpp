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

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "oracles.hpp"
#include "urbanrest/error.hpp"
#include "urbanrest/io_util.hpp"
#include "urbanrest/rating_service.hpp"

using namespace urbanrest;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Five images with planted quality q0 < q1 < ... < q4.
std::vector<ImageEntry> Corpus(const fs::path& dir, std::size_t n = 5) {
  fs::create_directories(dir / "img");
  std::vector<ImageEntry> out;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string id = "q" + std::to_string(i);
    io::WriteFile(dir / "img" / (id + ".ppm"), "P3\n1 1\n255\n" + std::to_string(i * 50) + " 0 0\n");
    out.push_back({id, dir / "img" / (id + ".ppm"), {static_cast<double>(i), 0}});
  }
  return out;
}

RatingServiceOptions Options(const fs::path& dir) {
  RatingServiceOptions o;
  o.ledger_path = dir / "ledger.jsonl";
  o.seed = 3;
  return o;
}

const char* PlantedVote(const json& pair) {
  const std::string l = pair["left_image_id"], r = pair["right_image_id"];
  return l > r ? "left" : "right";
}

}  // namespace

TEST_SUITE("rating-service") {
  TEST_CASE("handlers validate requests") {
    oracle::TempDir tmp("svc");
    RatingService svc(Corpus(tmp.path), Options(tmp.path));
    const auto pair = svc.GetPair(std::string("extent"));
    CHECK(pair.status == 200);
    const auto p = json::parse(pair.body);
    CHECK(p["indicator"] == "extent");
    CHECK(p["left_image_ref"] == "/api/images/" + p["left_image_id"].get<std::string>());
    CHECK(p["left_image_id"] != p["right_image_id"]);

    CHECK(svc.GetPair(std::string("beauty")).status == 400);
    CHECK(svc.PostVote("{oops").status == 400);
    CHECK(svc.PostVote(R"({"pair_id": 3, "outcome": "left"})").status == 400);
    CHECK(svc.PostVote(json{{"pair_id", p["pair_id"]}, {"outcome", "sideways"}}.dump()).status == 400);
    CHECK(svc.PostVote(R"({"pair_id": "nope", "outcome": "left"})").status == 409);

    const std::string vote = json{{"pair_id", p["pair_id"]}, {"outcome", "both"}}.dump();
    const auto ok = svc.PostVote(vote);
    CHECK(ok.status == 200);
    CHECK(json::parse(ok.body)["seq"] == 1);
    CHECK(svc.PostVote(vote).status == 409);

    const auto progress = json::parse(svc.GetProgress().body);
    CHECK(progress["votes"] == 1);
    CHECK(progress["images"] == 5);
    CHECK(progress["min_count"] == 0);

    const auto image = svc.GetImage("q2");
    CHECK(image.status == 200);
    CHECK(image.content_type == "image/x-portable-pixmap");
    CHECK(image.body.find("100 0 0") != std::string::npos);
    CHECK(svc.GetImage("zz").status == 404);

    const auto scores = json::parse(svc.GetScores().body);
    CHECK(scores["incomplete"].size() == 5);
  }

  TEST_CASE("constructor errors") {
    oracle::TempDir tmp("svc-err");
    auto one = Corpus(tmp.path, 1);
    CHECK_THROWS_AS(RatingService(one, Options(tmp.path)), Error);
    CHECK_THROWS_AS(RatingService(Corpus(tmp.path), RatingServiceOptions{}), Error);
  }

  TEST_CASE("scripted session over HTTP recovers the planted order") {
    oracle::TempDir tmp("svc-http");
    const auto images = Corpus(tmp.path);
    RatingState final_state;
    {
      RatingService svc(images, Options(tmp.path));
      const int port = svc.Start("127.0.0.1", 0);
      REQUIRE(port > 0);
      httplib::Client cli("127.0.0.1", port);
      for (int v = 0; v < 100; ++v) {
        const auto pr = cli.Get("/api/pair");
        REQUIRE(pr);
        REQUIRE(pr->status == 200);
        const auto pair = json::parse(pr->body);
        const auto vr = cli.Post("/api/vote", json{{"pair_id", pair["pair_id"]}, {"outcome", PlantedVote(pair)}}.dump(),
                                 "application/json");
        REQUIRE(vr);
        CHECK(vr->status == 200);
      }
      const auto img = cli.Get("/api/images/q4");
      REQUIRE(img);
      CHECK(img->status == 200);
      CHECK(cli.Get("/api/images/nothere")->status == 404);
      CHECK(cli.Get("/api/pair?indicator=nonsense")->status == 400);

      const auto sr = cli.Get("/api/scores");
      REQUIRE(sr);
      const auto scores = json::parse(sr->body);
      CHECK(scores["incomplete"].empty());
      std::vector<std::pair<double, std::string>> ranked;
      for (const auto& [id, s] : scores["scores"].items()) ranked.emplace_back(s.get<double>(), id);
      std::sort(ranked.begin(), ranked.end());
      REQUIRE(ranked.size() == 5);
      for (std::size_t i = 0; i < 5; ++i) CHECK(ranked[i].second == "q" + std::to_string(i));

      const auto progress = json::parse(cli.Get("/api/progress")->body);
      CHECK(progress["votes"] == 100);
      final_state = svc.Snapshot();
      svc.Stop();
    }

    // Ledger replay reproduces the ratings bit-exactly, also via a restart.
    std::vector<std::string> ids;
    for (const auto& e : images) ids.push_back(e.image_id);
    const auto ledger = ReadLedger(tmp.path / "ledger.jsonl");
    CHECK(ledger.size() == 100);
    const auto replayed = ReplayLedger(ids, ledger, TrueSkillParams{});
    CHECK(replayed == final_state);
    for (const auto& id : ids)
      for (Indicator ind : kAllIndicators) CHECK(replayed.GetRating(id, ind) == final_state.GetRating(id, ind));
    RatingService restarted(images, Options(tmp.path));
    CHECK(restarted.Snapshot() == final_state);
  }

  TEST_CASE("double submit registers one ledger entry") {
    oracle::TempDir tmp("svc-dup");
    RatingService svc(Corpus(tmp.path), Options(tmp.path));
    const int port = svc.Start("127.0.0.1", 0);
    const auto pair = json::parse(svc.GetPair(std::nullopt).body);
    const std::string body = json{{"pair_id", pair["pair_id"]}, {"outcome", "left"}}.dump();
    std::vector<int> statuses(2);
    std::vector<std::thread> clicks;
    for (int c = 0; c < 2; ++c) {
      clicks.emplace_back([&, c] {
        httplib::Client cli("127.0.0.1", port);
        const auto r = cli.Post("/api/vote", body, "application/json");
        statuses[static_cast<std::size_t>(c)] = r ? r->status : -1;
      });
    }
    for (auto& t : clicks) t.join();
    std::sort(statuses.begin(), statuses.end());
    CHECK(statuses == std::vector<int>{200, 409});
    CHECK(ReadLedger(tmp.path / "ledger.jsonl").size() == 1);
    svc.Stop();
  }

  TEST_CASE("static bundle is served at the root") {
    oracle::TempDir tmp("svc-static");
    fs::create_directories(tmp.path / "ui");
    io::WriteFile(tmp.path / "ui" / "index.html", "<html>rate</html>");
    auto opts = Options(tmp.path);
    opts.static_dir = tmp.path / "ui";
    RatingService svc(Corpus(tmp.path), opts);
    const int port = svc.Start("127.0.0.1", 0);
    httplib::Client cli("127.0.0.1", port);
    const auto r = cli.Get("/index.html");
    REQUIRE(r);
    CHECK(r->body == "<html>rate</html>");
    svc.Stop();
  }
}
