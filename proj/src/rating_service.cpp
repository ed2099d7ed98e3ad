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

#include "urbanrest/rating_service.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include "httplib.h"
#include "json.hpp"
#include "urbanrest/error.hpp"
#include "urbanrest/io_util.hpp"
#include "urbanrest/rng.hpp"

namespace urbanrest {
namespace {

using nlohmann::json;

std::int64_t NowMs() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

HttpReply JsonReply(int status, const json& body) { return {status, "application/json", body.dump()}; }

HttpReply ErrorReply(int status, const std::string& message) {
  return JsonReply(status, {{"accepted", false}, {"error", message}});
}

std::string ContentType(const std::filesystem::path& p) {
  const std::string ext = p.extension().string();
  if (ext == ".png") return "image/png";
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".ppm") return "image/x-portable-pixmap";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".webp") return "image/webp";
  return "application/octet-stream";
}

}  // namespace

RatingService::RatingService(std::vector<ImageEntry> images, RatingServiceOptions options)
    : options_(std::move(options)), state_(options_.params) {
  for (auto& e : images) {
    state_.RegisterImage(e.image_id);
    images_.emplace(e.image_id, std::move(e));
  }
  if (state_.image_count() < 2) ThrowData("rating service needs at least 2 images");
  if (options_.ledger_path.empty()) ThrowUsage("rating service needs a ledger path");
  if (std::filesystem::exists(options_.ledger_path)) {
    for (const auto& r : ReadLedger(options_.ledger_path)) {
      used_pair_ids_[r.pair_id] = true;
      state_.Apply(r);
    }
  } else {
    io::AppendLineDurable(options_.ledger_path, io::FormatHeader("ledger"));
  }
  session_ = io::Hex64(MixSeed(static_cast<std::uint64_t>(NowMs()), state_.ledger().size()))
                 .substr(0, 8);
}

RatingService::~RatingService() { Stop(); }

json RatingService::ProgressJson() const {
  std::size_t complete = 0;
  for (const auto& id : state_.ImageIds()) complete += state_.ComparisonCount(id) >= kTargetComparisons;
  return {{"images", state_.image_count()},
          {"min_count", state_.MinComparisonCount()},
          {"votes", state_.ledger().size()},
          {"complete_fraction",
           static_cast<double>(complete) / static_cast<double>(state_.image_count())}};
}

HttpReply RatingService::GetPair(const std::optional<std::string>& indicator) {
  std::lock_guard lock(mu_);
  Indicator ind;
  if (indicator && !indicator->empty()) {
    try {
      ind = ParseIndicator(*indicator);
    } catch (const Error& e) {
      return ErrorReply(400, e.what());
    }
  } else {
    ind = kAllIndicators[rotation_++ % kNumIndicators];
  }
  auto [left, right] = NextPair(state_, ind, options_.seed);
  const std::string pair_id = session_ + "-" + std::to_string(++issued_);
  pending_[pair_id] = {left, right, ind};
  return JsonReply(200, {{"pair_id", pair_id},
                         {"indicator", IndicatorName(ind)},
                         {"left_image_ref", "/api/images/" + left},
                         {"right_image_ref", "/api/images/" + right},
                         {"left_image_id", left},
                         {"right_image_id", right},
                         {"progress", ProgressJson()}});
}

HttpReply RatingService::PostVote(const std::string& body) {
  json req;
  try {
    req = json::parse(body);
  } catch (const json::exception&) {
    return ErrorReply(400, "request body is not valid JSON");
  }
  if (!req.is_object() || !req.contains("pair_id") || !req.contains("outcome") ||
      !req["pair_id"].is_string() || !req["outcome"].is_string()) {
    return ErrorReply(400, "expected {pair_id, outcome}");
  }
  VoteOutcome outcome;
  try {
    outcome = ParseOutcome(req["outcome"].get<std::string>());
  } catch (const Error& e) {
    return ErrorReply(400, e.what());
  }
  const std::string pair_id = req["pair_id"].get<std::string>();

  std::lock_guard lock(mu_);
  if (used_pair_ids_.contains(pair_id)) return ErrorReply(409, "pair already voted: " + pair_id);
  const auto it = pending_.find(pair_id);
  if (it == pending_.end()) return ErrorReply(409, "unknown pair_id: " + pair_id);

  VoteRecord r;
  r.seq = state_.ledger().size() + 1;
  r.pair_id = pair_id;
  r.indicator = it->second.indicator;
  r.left = it->second.left;
  r.right = it->second.right;
  r.outcome = outcome;
  r.timestamp_ms = NowMs();
  // Write-ahead: the ledger line is durable before state changes.
  try {
    io::AppendLineDurable(options_.ledger_path, LedgerLine(r));
  } catch (const Error& e) {
    return ErrorReply(500, e.what());
  }
  state_.Apply(r);
  used_pair_ids_[pair_id] = true;
  pending_.erase(it);
  return JsonReply(200, {{"accepted", true}, {"seq", r.seq}, {"progress", ProgressJson()}});
}

HttpReply RatingService::GetProgress() const {
  std::lock_guard lock(mu_);
  return JsonReply(200, ProgressJson());
}

HttpReply RatingService::GetScores() const {
  std::lock_guard lock(mu_);
  const CompositeScores cs = ComputeCompositeScores(state_);
  json scores = json::object();
  for (const auto& [id, s] : cs.scores) scores[id] = s;
  return JsonReply(200, {{"scores", scores}, {"incomplete", cs.incomplete}});
}

HttpReply RatingService::GetImage(const std::string& image_id) const {
  const auto it = images_.find(image_id);
  if (it == images_.end()) return ErrorReply(404, "unknown image: " + image_id);
  std::ifstream in(it->second.path, std::ios::binary);
  if (!in) return ErrorReply(404, "image file missing for " + image_id);
  std::ostringstream buf;
  buf << in.rdbuf();
  return {200, ContentType(it->second.path), buf.str()};
}

RatingState RatingService::Snapshot() const {
  std::lock_guard lock(mu_);
  return state_;
}

void RatingService::Mount() {
  server_ = std::make_unique<httplib::Server>();
  auto send = [](httplib::Response& res, const HttpReply& r) {
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  server_->Get("/api/pair", [this, send](const httplib::Request& req, httplib::Response& res) {
    std::optional<std::string> ind;
    if (req.has_param("indicator")) ind = req.get_param_value("indicator");
    send(res, GetPair(ind));
  });
  server_->Post("/api/vote", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, PostVote(req.body));
  });
  server_->Get("/api/progress", [this, send](const httplib::Request&, httplib::Response& res) {
    send(res, GetProgress());
  });
  server_->Get("/api/scores", [this, send](const httplib::Request&, httplib::Response& res) {
    send(res, GetScores());
  });
  server_->Get(R"(/api/images/([A-Za-z0-9_.\-]+))",
               [this, send](const httplib::Request& req, httplib::Response& res) {
                 send(res, GetImage(req.matches[1]));
               });
  if (!options_.static_dir.empty()) server_->set_mount_point("/", options_.static_dir.string());
}

int RatingService::Start(const std::string& host, int port) {
  if (server_) ThrowUsage("rating service already running");
  Mount();
  int bound = port;
  if (port == 0) {
    bound = server_->bind_to_any_port(host);
  } else if (!server_->bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) {
    server_.reset();
    ThrowUsage("cannot bind " + host + ":" + std::to_string(port));
  }
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void RatingService::Listen(const std::string& host, int port) {
  Start(host, port);
  if (thread_.joinable()) thread_.join();
}

void RatingService::Stop() {
  if (server_) server_->stop();
  if (thread_.joinable() && thread_.get_id() != std::this_thread::get_id()) thread_.join();
}

}  // namespace urbanrest
