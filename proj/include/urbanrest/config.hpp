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

#ifndef URBANREST_CONFIG_HPP_
#define URBANREST_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "urbanrest/city_graph.hpp"
#include "urbanrest/gnn.hpp"
#include "urbanrest/labeling.hpp"
#include "urbanrest/street_embed.hpp"

namespace urbanrest {

// "key = value" lines; "[section]" prefixes following keys with "section.".
// '#' starts a comment line.
class KeyValueConfig {
 public:
  static KeyValueConfig Parse(std::string_view text, std::string_view origin = "<config>");
  static KeyValueConfig Load(const std::filesystem::path& path);

  // "key=value" override.
  void SetAssignment(std::string_view assignment);
  void Set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool Has(const std::string& key) const { return values_.contains(key); }
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

struct PipelinePaths {
  std::filesystem::path roads;
  std::filesystem::path rasters;  // segmentation manifest
  std::filesystem::path feature_points;
  std::filesystem::path labels;
  std::filesystem::path images;  // image manifest for the rating service
  std::filesystem::path ledger;
  std::filesystem::path class_names;
  std::filesystem::path static_dir;
  std::filesystem::path out_dir = "out";
};

struct PipelineConfig {
  PipelinePaths paths;
  double entity_threshold = kDefaultEntityThreshold;
  CityGraphOptions city;
  WalkConfig walk;
  std::uint64_t projection_seed = 7;
  ModelConfig model;
  std::size_t runs = 1;        // repeated training runs in the train stage
  bool compare = false;        // train the standard model variants
  std::size_t ablation_runs = 1;
  TrueSkillParams trueskill;
  std::uint64_t rating_seed = 1;
  std::string serve_host = "127.0.0.1";
  int serve_port = 8080;
  std::size_t cluster_k_min = 2;
  std::size_t cluster_k_max = 20;
  std::size_t cluster_restarts = 10;
  std::uint64_t cluster_seed = 1;
  std::string cluster_class = "high";
  std::size_t top_k = 10;

  // Unknown keys and out-of-range values are usage errors. Relative paths
  // resolve against base_dir.
  static PipelineConfig FromKeyValues(const KeyValueConfig& kv,
                                      const std::filesystem::path& base_dir = {});
  static PipelineConfig Load(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides = {});
  KeyValueConfig ToKeyValues() const;
  // Canonical text; its FNV-1a hash identifies a run.
  std::string Canonical() const;
  void Validate() const;
};

}  // namespace urbanrest

#endif  // URBANREST_CONFIG_HPP_
