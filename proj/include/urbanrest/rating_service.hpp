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

#ifndef URBANREST_RATING_SERVICE_HPP_
#define URBANREST_RATING_SERVICE_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "urbanrest/labeling.hpp"

namespace httplib {
class Server;
}

namespace urbanrest {

struct RatingServiceOptions {
  std::filesystem::path ledger_path;
  std::filesystem::path static_dir;  // optional UI bundle served at "/"
  TrueSkillParams params;
  std::uint64_t seed = 1;
};

struct HttpReply {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

// Pairwise rating backend. Votes are serialized through one mutex and each
// accepted vote is fsync-appended to the ledger before it is applied.
class RatingService {
 public:
  // Replays any existing ledger at ledger_path.
  RatingService(std::vector<ImageEntry> images, RatingServiceOptions options);
  ~RatingService();
  RatingService(const RatingService&) = delete;
  RatingService& operator=(const RatingService&) = delete;

  // Endpoint handlers, callable without a socket.
  HttpReply GetPair(const std::optional<std::string>& indicator);
  HttpReply PostVote(const std::string& body);
  HttpReply GetProgress() const;
  HttpReply GetScores() const;
  HttpReply GetImage(const std::string& image_id) const;

  // Binds and serves on a background thread. port 0 picks a free port.
  int Start(const std::string& host, int port);
  // Blocks until Stop() is called from another thread or a signal handler.
  void Listen(const std::string& host, int port);
  void Stop();

  RatingState Snapshot() const;

 private:
  struct PendingPair {
    std::string left;
    std::string right;
    Indicator indicator;
  };
  nlohmann::json ProgressJson() const;  // caller holds mu_
  void Mount();

  std::map<std::string, ImageEntry> images_;
  RatingServiceOptions options_;
  mutable std::mutex mu_;
  RatingState state_;
  std::map<std::string, PendingPair> pending_;
  std::map<std::string, bool> used_pair_ids_;
  std::uint64_t issued_ = 0;
  std::string session_;
  std::size_t rotation_ = 0;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace urbanrest

#endif  // URBANREST_RATING_SERVICE_HPP_
