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

#ifndef URBANREST_PIPELINE_HPP_
#define URBANREST_PIPELINE_HPP_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "urbanrest/config.hpp"

namespace urbanrest {

enum class Stage {
  kBuildEntityGraphs,
  kEmbedStreets,
  kLabel,
  kBuildCityGraph,
  kTrain,
  kEvaluate,
  kAblate,
  kCluster,
  kReport,
};
const char* StageName(Stage s);
Stage ParseStage(std::string_view name);

struct StageResult {
  Stage stage;
  std::filesystem::path dir;
  double seconds = 0.0;
  std::string summary;  // human-readable, may include timings
  bool skipped = false;
};

// Each stage writes into <out_dir>/<stage-name>/ along with provenance.json.
// A stage directory holding an INCOMPLETE marker did not finish.
class Pipeline {
 public:
  explicit Pipeline(PipelineConfig config);

  StageResult Run(Stage stage);
  // All stages whose inputs are configured, in dependency order.
  std::vector<StageResult> RunAll();

  const PipelineConfig& config() const { return config_; }
  std::filesystem::path StageDir(Stage stage) const;

 private:
  StageResult RunUnchecked(Stage stage);
  StageResult BuildEntityGraphs();
  StageResult EmbedStreets();
  StageResult Label();
  StageResult BuildCityGraph();
  StageResult Train();
  StageResult Evaluate();
  StageResult Ablate();
  StageResult Cluster();
  StageResult Report();

  PipelineConfig config_;
};

// Checks that every configured input path exists (roads is mandatory).
void CheckInputPaths(const PipelineConfig& config);

}  // namespace urbanrest

#endif  // URBANREST_PIPELINE_HPP_
