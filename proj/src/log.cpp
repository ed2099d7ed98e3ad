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

#include "urbanrest/log.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <string>

#include "urbanrest/error.hpp"

namespace urbanrest::log {
namespace {

std::atomic<int>& LevelSlot() {
  static std::atomic<int> level = [] {
    const char* env = std::getenv("URBANREST_LOG");
    if (env == nullptr || *env == '\0') return static_cast<int>(Level::kWarn);
    try {
      return static_cast<int>(ParseLevel(env));
    } catch (const urbanrest::Error&) {
      return static_cast<int>(Level::kWarn);
    }
  }();
  return level;
}

const char* Tag(Level l) {
  switch (l) {
    case Level::kDebug: return "debug";
    case Level::kInfo: return "info";
    case Level::kWarn: return "warn";
    case Level::kError: return "error";
    case Level::kOff: break;
  }
  return "";
}

}  // namespace

Level GetLevel() { return static_cast<Level>(LevelSlot().load()); }
void SetLevel(Level level) { LevelSlot().store(static_cast<int>(level)); }

Level ParseLevel(std::string_view name) {
  if (name == "debug") return Level::kDebug;
  if (name == "info") return Level::kInfo;
  if (name == "warn") return Level::kWarn;
  if (name == "error") return Level::kError;
  if (name == "off") return Level::kOff;
  ThrowUsage("unknown log level '" + std::string(name) + "'");
}

void Write(Level level, std::string_view message) {
  if (level < GetLevel() || level == Level::kOff) return;
  static std::mutex mu;
  std::lock_guard lock(mu);
  std::fprintf(stderr, "[urbanrest %s] %.*s\n", Tag(level), static_cast<int>(message.size()),
               message.data());
}

}  // namespace urbanrest::log
