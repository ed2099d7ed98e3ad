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

#include "urbanrest/config.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

#include "urbanrest/error.hpp"
#include "urbanrest/io_util.hpp"

namespace urbanrest {
namespace {

namespace fs = std::filesystem;

std::uint64_t ParseU64(std::string_view v, std::string_view key) {
  const long long x = io::ParseInt(v, key);
  if (x < 0) ThrowUsage(std::string(key) + " must be non-negative");
  return static_cast<std::uint64_t>(x);
}

bool ParseBool(std::string_view v, std::string_view key) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  ThrowUsage(std::string(key) + ": expected a boolean, got '" + std::string(v) + "'");
}

std::string JoinSizes(const std::vector<std::size_t>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + std::to_string(xs[i]);
  return s;
}

struct Binding {
  const char* key;
  std::function<std::string(const PipelineConfig&)> get;
  std::function<void(PipelineConfig&, std::string_view, const fs::path&)> set;
};

Binding PathKey(const char* key, fs::path PipelinePaths::*member) {
  return {key, [member](const PipelineConfig& c) { return (c.paths.*member).string(); },
          [member](PipelineConfig& c, std::string_view v, const fs::path& base) {
            fs::path p{std::string(v)};
            if (!p.empty() && p.is_relative() && !base.empty()) p = base / p;
            c.paths.*member = p.lexically_normal();
          }};
}

template <typename T, typename Owner>
Binding SizeKey(const char* key, Owner owner, T member) {
  return {key, [=](const PipelineConfig& c) { return std::to_string(owner(c).*member); },
          [=](PipelineConfig& c, std::string_view v, const fs::path&) {
            owner(c).*member = static_cast<std::remove_reference_t<decltype(owner(c).*member)>>(
                ParseU64(v, key));
          }};
}

template <typename T, typename Owner>
Binding DoubleKey(const char* key, Owner owner, T member) {
  return {key, [=](const PipelineConfig& c) { return io::FormatDouble(owner(c).*member); },
          [=](PipelineConfig& c, std::string_view v, const fs::path&) {
            owner(c).*member = io::ParseDouble(v, key);
          }};
}

// Owner accessors; const and non-const overloads through one generic lambda.
inline constexpr auto kSelf = [](auto& c) -> auto& { return c; };
inline constexpr auto kCity = [](auto& c) -> auto& { return c.city; };
inline constexpr auto kWalk = [](auto& c) -> auto& { return c.walk; };
inline constexpr auto kModel = [](auto& c) -> auto& { return c.model; };
inline constexpr auto kTs = [](auto& c) -> auto& { return c.trueskill; };

const std::vector<Binding>& Bindings() {
  static const std::vector<Binding> kBindings = [] {
    std::vector<Binding> b;
    b.push_back(PathKey("paths.roads", &PipelinePaths::roads));
    b.push_back(PathKey("paths.rasters", &PipelinePaths::rasters));
    b.push_back(PathKey("paths.feature_points", &PipelinePaths::feature_points));
    b.push_back(PathKey("paths.labels", &PipelinePaths::labels));
    b.push_back(PathKey("paths.images", &PipelinePaths::images));
    b.push_back(PathKey("paths.ledger", &PipelinePaths::ledger));
    b.push_back(PathKey("paths.class_names", &PipelinePaths::class_names));
    b.push_back(PathKey("paths.static_dir", &PipelinePaths::static_dir));
    b.push_back(PathKey("paths.out_dir", &PipelinePaths::out_dir));
    b.push_back(DoubleKey("entity.threshold", kSelf, &PipelineConfig::entity_threshold));
    b.push_back({"city.scheme",
                 [](const PipelineConfig& c) { return std::string(WeightSchemeName(c.city.scheme)); },
                 [](PipelineConfig& c, std::string_view v, const fs::path&) {
                   c.city.scheme = ParseWeightScheme(v);
                 }});
    b.push_back(SizeKey("city.knn_k", kCity, &CityGraphOptions::knn_k));
    b.push_back(DoubleKey("city.queen_snap", kCity, &CityGraphOptions::queen_snap));
    b.push_back(DoubleKey("city.buffer_half_width", kCity, &CityGraphOptions::buffer_half_width));
    b.push_back({"city.normalize",
                 [](const PipelineConfig& c) { return std::string(c.city.normalize ? "true" : "false"); },
                 [](PipelineConfig& c, std::string_view v, const fs::path&) {
                   c.city.normalize = ParseBool(v, "city.normalize");
                 }});
    b.push_back(SizeKey("walk.walks_per_node", kWalk, &WalkConfig::walks_per_node));
    b.push_back(SizeKey("walk.walk_length", kWalk, &WalkConfig::walk_length));
    b.push_back(SizeKey("walk.window", kWalk, &WalkConfig::window));
    b.push_back(SizeKey("walk.embed_dim", kWalk, &WalkConfig::embed_dim));
    b.push_back(SizeKey("walk.negatives", kWalk, &WalkConfig::negatives));
    b.push_back(SizeKey("walk.epochs", kWalk, &WalkConfig::epochs));
    b.push_back(DoubleKey("walk.learning_rate", kWalk, &WalkConfig::learning_rate));
    b.push_back(SizeKey("walk.seed", kWalk, &WalkConfig::seed));
    b.push_back(SizeKey("walk.projection_seed", kSelf, &PipelineConfig::projection_seed));
    b.push_back({"model.arch", [](const PipelineConfig& c) { return std::string(ArchName(c.model.arch)); },
                 [](PipelineConfig& c, std::string_view v, const fs::path&) { c.model.arch = ParseArch(v); }});
    b.push_back({"model.hidden", [](const PipelineConfig& c) { return JoinSizes(c.model.hidden); },
                 [](PipelineConfig& c, std::string_view v, const fs::path&) {
                   c.model.hidden.clear();
                   for (auto part : io::Split(v, ',')) {
                     c.model.hidden.push_back(ParseU64(io::Trim(part), "model.hidden"));
                   }
                 }});
    b.push_back(SizeKey("model.heads", kModel, &ModelConfig::heads));
    b.push_back(SizeKey("model.epochs", kModel, &ModelConfig::epochs));
    b.push_back(DoubleKey("model.learning_rate", kModel, &ModelConfig::learning_rate));
    b.push_back(DoubleKey("model.weight_decay", kModel, &ModelConfig::weight_decay));
    b.push_back(SizeKey("model.seed", kModel, &ModelConfig::seed));
    b.push_back({"model.split",
                 [](const PipelineConfig& c) {
                   return io::FormatDouble(c.model.train_fraction) + "," +
                          io::FormatDouble(c.model.val_fraction) + "," +
                          io::FormatDouble(c.model.test_fraction);
                 },
                 [](PipelineConfig& c, std::string_view v, const fs::path&) {
                   const auto parts = io::Split(v, ',');
                   if (parts.size() != 3) ThrowUsage("model.split: expected train,val,test");
                   c.model.train_fraction = io::ParseDouble(parts[0], "model.split");
                   c.model.val_fraction = io::ParseDouble(parts[1], "model.split");
                   c.model.test_fraction = io::ParseDouble(parts[2], "model.split");
                 }});
    b.push_back(SizeKey("train.runs", kSelf, &PipelineConfig::runs));
    b.push_back({"train.compare",
                 [](const PipelineConfig& c) { return std::string(c.compare ? "true" : "false"); },
                 [](PipelineConfig& c, std::string_view v, const fs::path&) {
                   c.compare = ParseBool(v, "train.compare");
                 }});
    b.push_back(SizeKey("ablate.runs", kSelf, &PipelineConfig::ablation_runs));
    b.push_back(DoubleKey("trueskill.mu0", kTs, &TrueSkillParams::mu0));
    b.push_back(DoubleKey("trueskill.sigma0", kTs, &TrueSkillParams::sigma0));
    b.push_back(DoubleKey("trueskill.beta", kTs, &TrueSkillParams::beta));
    b.push_back(DoubleKey("trueskill.tau", kTs, &TrueSkillParams::tau));
    b.push_back(DoubleKey("trueskill.draw_probability", kTs, &TrueSkillParams::draw_probability));
    b.push_back(SizeKey("rating.seed", kSelf, &PipelineConfig::rating_seed));
    b.push_back({"rating.host", [](const PipelineConfig& c) { return c.serve_host; },
                 [](PipelineConfig& c, std::string_view v, const fs::path&) { c.serve_host = std::string(v); }});
    b.push_back(SizeKey("rating.port", kSelf, &PipelineConfig::serve_port));
    b.push_back(SizeKey("cluster.k_min", kSelf, &PipelineConfig::cluster_k_min));
    b.push_back(SizeKey("cluster.k_max", kSelf, &PipelineConfig::cluster_k_max));
    b.push_back(SizeKey("cluster.restarts", kSelf, &PipelineConfig::cluster_restarts));
    b.push_back(SizeKey("cluster.seed", kSelf, &PipelineConfig::cluster_seed));
    b.push_back({"cluster.class", [](const PipelineConfig& c) { return c.cluster_class; },
                 [](PipelineConfig& c, std::string_view v, const fs::path&) {
                   ParseClassLabel(v);
                   c.cluster_class = std::string(v);
                 }});
    b.push_back(SizeKey("report.top_k", kSelf, &PipelineConfig::top_k));
    return b;
  }();
  return kBindings;
}

}  // namespace

KeyValueConfig KeyValueConfig::Parse(std::string_view text, std::string_view origin) {
  KeyValueConfig cfg;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string_view line = io::Trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    const std::string where = std::string(origin) + ":" + std::to_string(lineno);
    if (line.front() == '[') {
      if (line.back() != ']') ThrowUsage(where + ": malformed section header");
      section = std::string(io::Trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) ThrowUsage(where + ": expected 'key = value'");
    const std::string_view key = io::Trim(line.substr(0, eq));
    if (key.empty()) ThrowUsage(where + ": empty key");
    const std::string full = section.empty() ? std::string(key) : section + "." + std::string(key);
    cfg.values_[full] = std::string(io::Trim(line.substr(eq + 1)));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::Load(const fs::path& path) {
  if (!fs::exists(path)) ThrowUsage("config file not found: " + path.string());
  return Parse(io::ReadFile(path), path.string());
}

void KeyValueConfig::SetAssignment(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) ThrowUsage("override must be key=value: " + std::string(assignment));
  const std::string key(io::Trim(assignment.substr(0, eq)));
  if (key.empty()) ThrowUsage("override has an empty key");
  values_[key] = std::string(io::Trim(assignment.substr(eq + 1)));
}

PipelineConfig PipelineConfig::FromKeyValues(const KeyValueConfig& kv, const fs::path& base_dir) {
  PipelineConfig cfg;
  const auto& bindings = Bindings();
  for (const auto& [key, value] : kv.values()) {
    const auto it = std::find_if(bindings.begin(), bindings.end(),
                                 [&](const Binding& b) { return key == b.key; });
    if (it == bindings.end()) ThrowUsage("unknown config key '" + key + "'");
    try {
      it->set(cfg, value, base_dir);
    } catch (const Error& e) {
      ThrowUsage("config key '" + key + "': " + e.what());
    }
  }
  cfg.Validate();
  return cfg;
}

PipelineConfig PipelineConfig::Load(const fs::path& path, const std::vector<std::string>& overrides) {
  KeyValueConfig kv = KeyValueConfig::Load(path);
  for (const auto& o : overrides) kv.SetAssignment(o);
  return FromKeyValues(kv, path.parent_path());
}

KeyValueConfig PipelineConfig::ToKeyValues() const {
  KeyValueConfig kv;
  for (const auto& b : Bindings()) kv.Set(b.key, b.get(*this));
  return kv;
}

std::string PipelineConfig::Canonical() const {
  const KeyValueConfig kv = ToKeyValues();
  std::string out;
  for (const auto& [k, v] : kv.values()) out += k + " = " + v + "\n";
  return out;
}

void PipelineConfig::Validate() const {
  if (!(entity_threshold > 0.0)) ThrowUsage("entity.threshold must be positive");
  if (!(city.buffer_half_width > 0.0)) ThrowUsage("city.buffer_half_width must be positive");
  if (city.knn_k < 1) ThrowUsage("city.knn_k must be >= 1");
  if (!(city.queen_snap >= 0.0)) ThrowUsage("city.queen_snap must be non-negative");
  walk.Validate();
  model.Validate();
  trueskill.Validate();
  if (runs < 1 || ablation_runs < 1) ThrowUsage("train.runs and ablate.runs must be >= 1");
  if (cluster_k_min < 2 || cluster_k_max < cluster_k_min) {
    ThrowUsage("cluster.k_min must be >= 2 and <= cluster.k_max");
  }
  if (cluster_restarts < 1) ThrowUsage("cluster.restarts must be >= 1");
  if (serve_port < 0 || serve_port > 65535) ThrowUsage("rating.port out of range");
  if (top_k < 1) ThrowUsage("report.top_k must be >= 1");
}

}  // namespace urbanrest
