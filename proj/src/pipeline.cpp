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

#include "urbanrest/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <map>
#include <sstream>

#include "json.hpp"
#include "urbanrest/analysis.hpp"
#include "urbanrest/entity_graph.hpp"
#include "urbanrest/error.hpp"
#include "urbanrest/io_util.hpp"
#include "urbanrest/labeling.hpp"
#include "urbanrest/log.hpp"
#include "urbanrest/street_embed.hpp"

namespace urbanrest {
namespace {

namespace fs = std::filesystem;

constexpr const char* kIncomplete = "INCOMPLETE";

constexpr Stage kAllStages[] = {Stage::kBuildEntityGraphs, Stage::kEmbedStreets, Stage::kLabel,
                                Stage::kBuildCityGraph,    Stage::kTrain,        Stage::kEvaluate,
                                Stage::kAblate,            Stage::kCluster,      Stage::kReport};

std::string Fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string FormatReport(const TrainReport& r, const ModelConfig& cfg, std::size_t in_dim) {
  std::ostringstream out;
  out << io::FormatHeader("train-report") << '\n';
  out << "arch " << ArchName(cfg.arch) << '\n';
  out << "seed " << r.seed << '\n';
  out << "in_dim " << in_dim << '\n';
  out << "epochs " << r.loss_curve.size() << '\n';
  out << "final_loss " << io::FormatDouble(r.loss_curve.empty() ? 0.0 : r.loss_curve.back()) << '\n';
  out << "train_accuracy " << io::FormatDouble(r.train_accuracy) << '\n';
  out << "val_accuracy " << io::FormatDouble(r.val_accuracy) << '\n';
  out << "test_accuracy " << io::FormatDouble(r.test.accuracy) << '\n';
  out << "test_macro_f1 " << io::FormatDouble(r.test.macro_f1) << '\n';
  out << "# confusion rows = true class, columns = predicted (low medium high)\n";
  for (int t = 0; t < kNumClasses; ++t) {
    out << "confusion " << ClassLabelName(t);
    for (int p = 0; p < kNumClasses; ++p) out << ' ' << r.test.confusion[t][p];
    out << '\n';
  }
  out << "# loss per epoch\n";
  for (std::size_t e = 0; e < r.loss_curve.size(); ++e) {
    out << "loss " << e + 1 << ' ' << io::FormatDouble(r.loss_curve[e]) << '\n';
  }
  return out.str();
}

struct Prediction {
  std::string road_id;
  int predicted = 0;
};

std::vector<Prediction> ReadPredictions(const fs::path& path) {
  if (!fs::exists(path)) ThrowData("missing " + path.string() + " (run the evaluate stage first)");
  std::vector<Prediction> out;
  for (const auto& line : io::ReadDataLines(path, "predictions")) {
    const auto parts = io::Split(line, ',');
    if (parts.size() < 2) ThrowData(path.string() + ": malformed prediction row");
    if (io::Trim(parts[0]) == "road_id") continue;
    out.push_back({std::string(io::Trim(parts[0])), ParseClassLabel(io::Trim(parts[1]))});
  }
  return out;
}

void RequireFile(const fs::path& p, std::string_view hint) {
  if (!fs::exists(p)) ThrowData("missing " + p.string() + " (" + std::string(hint) + ")");
}

}  // namespace

const char* StageName(Stage s) {
  switch (s) {
    case Stage::kBuildEntityGraphs: return "build-entity-graphs";
    case Stage::kEmbedStreets: return "embed-streets";
    case Stage::kLabel: return "label";
    case Stage::kBuildCityGraph: return "build-city-graph";
    case Stage::kTrain: return "train";
    case Stage::kEvaluate: return "evaluate";
    case Stage::kAblate: return "ablate";
    case Stage::kCluster: return "cluster";
    case Stage::kReport: return "report";
  }
  return "?";
}

Stage ParseStage(std::string_view name) {
  for (Stage s : kAllStages) {
    if (name == StageName(s)) return s;
  }
  ThrowUsage("unknown stage '" + std::string(name) + "'");
}

void CheckInputPaths(const PipelineConfig& config) {
  const auto& p = config.paths;
  if (p.roads.empty()) ThrowUsage("paths.roads is required");
  const std::pair<const char*, const fs::path*> inputs[] = {
      {"paths.roads", &p.roads},           {"paths.rasters", &p.rasters},
      {"paths.feature_points", &p.feature_points}, {"paths.labels", &p.labels},
      {"paths.images", &p.images},         {"paths.class_names", &p.class_names},
      {"paths.static_dir", &p.static_dir},
  };
  for (const auto& [key, path] : inputs) {
    if (!path->empty() && !fs::exists(*path)) {
      ThrowUsage(std::string(key) + ": no such file or directory: " + path->string());
    }
  }
}

Pipeline::Pipeline(PipelineConfig config) : config_(std::move(config)) {
  config_.Validate();
  CheckInputPaths(config_);
}

fs::path Pipeline::StageDir(Stage stage) const { return config_.paths.out_dir / StageName(stage); }

StageResult Pipeline::Run(Stage stage) {
  const fs::path dir = StageDir(stage);
  const auto start = std::chrono::steady_clock::now();
  StageResult result;
  try {
    fs::remove_all(dir);
    fs::create_directories(dir);
    io::WriteFile(dir / kIncomplete, "stage started\n");
    result = RunUnchecked(stage);
  } catch (const Error& e) {
    throw Error(e.kind(), std::string("stage '") + StageName(stage) + "': " + e.what());
  } catch (const fs::filesystem_error& e) {
    throw Error(ErrorKind::kData, std::string("stage '") + StageName(stage) + "': " + e.what());
  }
  result.stage = stage;
  result.dir = dir;
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const std::string canonical = config_.Canonical();
  nlohmann::json prov = {
      {"format", "urbanrest.provenance"},
      {"version", io::kFormatVersion},
      {"stage", StageName(stage)},
      {"config_hash", io::Hex64(io::Fnv1a(canonical))},
      {"config", canonical},
      {"seeds",
       {{"model", config_.model.seed},
        {"walk", config_.walk.seed},
        {"projection", config_.projection_seed},
        {"cluster", config_.cluster_seed},
        {"rating", config_.rating_seed}}},
      {"seconds", result.seconds},
      {"skipped", result.skipped},
  };
  nlohmann::json outputs = nlohmann::json::object();
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto name = fs::relative(entry.path(), dir).generic_string();
    if (name == kIncomplete || name == "provenance.json") continue;
    outputs[name] = io::Hex64(io::Fnv1a(io::ReadFile(entry.path())));
  }
  prov["outputs"] = outputs;
  io::WriteFile(dir / "provenance.json", prov.dump(2) + "\n");
  fs::remove(dir / kIncomplete);
  log::Info(std::string("stage ") + StageName(stage) + " done in " + Fixed(result.seconds, 3) + " s");
  return result;
}

std::vector<StageResult> Pipeline::RunAll() {
  std::vector<StageResult> results;
  const bool rasters = !config_.paths.rasters.empty();
  const bool rating = !config_.paths.images.empty() && !config_.paths.ledger.empty();
  for (Stage s : kAllStages) {
    if ((s == Stage::kBuildEntityGraphs || s == Stage::kEmbedStreets || s == Stage::kReport) &&
        !rasters) {
      continue;
    }
    if (s == Stage::kLabel && !rating) continue;
    results.push_back(Run(s));
  }
  return results;
}

StageResult Pipeline::RunUnchecked(Stage stage) {
  switch (stage) {
    case Stage::kBuildEntityGraphs: return BuildEntityGraphs();
    case Stage::kEmbedStreets: return EmbedStreets();
    case Stage::kLabel: return Label();
    case Stage::kBuildCityGraph: return BuildCityGraph();
    case Stage::kTrain: return Train();
    case Stage::kEvaluate: return Evaluate();
    case Stage::kAblate: return Ablate();
    case Stage::kCluster: return Cluster();
    case Stage::kReport: return Report();
  }
  ThrowUsage("unhandled stage");
}

StageResult Pipeline::BuildEntityGraphs() {
  if (config_.paths.rasters.empty()) ThrowUsage("paths.rasters is not configured");
  const auto manifest = ReadRasterManifest(config_.paths.rasters);
  std::vector<std::string> order;
  std::map<std::string, std::vector<EntityGraph>> per_road;
  for (const auto& entry : manifest) {
    const SegmentationMap map = ReadSegmentationRaster(entry.raster, {}, entry.road_id);
    map.Validate();
    const auto nodes = ComputeClassCentroids(map);
    if (!per_road.contains(entry.road_id)) order.push_back(entry.road_id);
    per_road[entry.road_id].push_back(BuildEntityGraph(nodes, config_.entity_threshold));
  }
  std::vector<std::pair<std::string, EntityGraph>> graphs;
  for (const auto& road : order) graphs.emplace_back(road, MergeRoadGraphs(per_road[road]));
  WriteEntityGraphDir(StageDir(Stage::kBuildEntityGraphs) / "graphs", graphs);
  StageResult r;
  r.summary = std::to_string(graphs.size()) + " road graphs from " + std::to_string(manifest.size()) +
              " rasters";
  return r;
}

StageResult Pipeline::EmbedStreets() {
  const fs::path in = StageDir(Stage::kBuildEntityGraphs) / "graphs";
  RequireFile(in / "roads.txt", "run build-entity-graphs first");
  const auto graphs = ReadEntityGraphDir(in, config_.entity_threshold);
  std::vector<StreetStructureVector> vectors;
  for (const auto& [road, graph] : graphs) {
    vectors.push_back(EmbedRoad(road, graph, config_.walk, config_.projection_seed));
  }
  WriteStreetVectors(StageDir(Stage::kEmbedStreets) / "street_vectors.txt", vectors);
  StageResult r;
  r.summary = std::to_string(vectors.size()) + " street-structure vectors";
  return r;
}

StageResult Pipeline::Label() {
  if (config_.paths.images.empty() || config_.paths.ledger.empty()) {
    ThrowUsage("the label stage needs paths.images and paths.ledger");
  }
  RequireFile(config_.paths.ledger, "paths.ledger");
  const auto images = ReadImageManifest(config_.paths.images);
  std::vector<std::string> ids;
  for (const auto& e : images) ids.push_back(e.image_id);
  const auto ledger = ReadLedger(config_.paths.ledger);
  const RatingState state = ReplayLedger(ids, ledger, config_.trueskill);
  const CompositeScores composite = ComputeCompositeScores(state);
  if (!composite.incomplete.empty()) {
    log::Warn(std::to_string(composite.incomplete.size()) +
              " images lack comparisons on some indicator and are not scored");
  }
  std::vector<ScoredSample> samples;
  std::ostringstream scores;
  scores << io::FormatHeader("image-scores") << '\n' << "image_id,score,comparisons\n";
  for (const auto& e : images) {
    const auto it = composite.scores.find(e.image_id);
    if (it == composite.scores.end()) continue;
    samples.push_back({e.image_id, e.location, it->second});
    scores << e.image_id << ',' << io::FormatDouble(it->second) << ','
           << state.ComparisonCount(e.image_id) << '\n';
  }
  const auto roads = ReadRoads(config_.paths.roads);
  const LabelSet labels = LabelRoads(samples, roads, config_.city.buffer_half_width);
  const fs::path dir = StageDir(Stage::kLabel);
  io::WriteFile(dir / "image_scores.csv", scores.str());
  WriteLabelSet(dir / "labels.csv", labels);
  std::size_t counts[kNumClasses] = {};
  for (const auto& [_, c] : labels.classes) ++counts[c];
  StageResult r;
  r.summary = std::to_string(labels.classes.size()) + " roads labeled (low " +
              std::to_string(counts[0]) + ", medium " + std::to_string(counts[1]) + ", high " +
              std::to_string(counts[2]) + ") from " + std::to_string(ledger.size()) + " votes";
  return r;
}

StageResult Pipeline::BuildCityGraph() {
  const auto roads = ReadRoads(config_.paths.roads);
  FeaturePointTable points;
  if (!config_.paths.feature_points.empty()) points = ReadFeaturePoints(config_.paths.feature_points);
  std::map<std::string, int> labels;
  if (!config_.paths.labels.empty()) {
    labels = ReadLabels(config_.paths.labels);
  } else if (!config_.paths.images.empty() && !config_.paths.ledger.empty()) {
    const fs::path derived = StageDir(Stage::kLabel) / "labels.csv";
    RequireFile(derived, "run the label stage first or set paths.labels");
    labels = ReadLabels(derived);
  }
  std::map<std::string, std::vector<double>> street;
  if (!config_.paths.rasters.empty()) {
    const fs::path sv = StageDir(Stage::kEmbedStreets) / "street_vectors.txt";
    RequireFile(sv, "run embed-streets first");
    street = ReadStreetVectors(sv);
  }
  const CityGraph graph =
      AssembleCityGraph(roads, points.points, points.schema, labels, config_.city, street);
  WriteCityGraphBundle(StageDir(Stage::kBuildCityGraph) / "graph", graph);
  StageResult r;
  r.summary = std::to_string(graph.n()) + " roads, " + std::to_string(graph.features.cols()) +
              " features, " + std::to_string(graph.weights.adjacency.EdgeCount()) + " " +
              WeightSchemeName(graph.weights.scheme) + " edges (" +
              std::to_string(graph.weights.directed_relation_count) + " directed relations), " +
              std::to_string(graph.LabeledCount()) + " labeled";
  return r;
}

StageResult Pipeline::Train() {
  const fs::path bundle = StageDir(Stage::kBuildCityGraph) / "graph";
  RequireFile(bundle / "nodes.txt", "run build-city-graph first");
  const CityGraph graph = ReadCityGraphBundle(bundle);
  const fs::path dir = StageDir(Stage::kTrain);
  TrainResult result = urbanrest::Train(graph, config_.model);
  result.model.Save(dir / "model.bin");
  io::WriteFile(dir / "report.txt", FormatReport(result.report, config_.model, graph.features.cols()));
  std::ostringstream summary;
  summary << ArchName(config_.model.arch) << " test accuracy " << Fixed(result.report.test.accuracy)
          << ", macro-F1 " << Fixed(result.report.test.macro_f1) << " in "
          << Fixed(result.report.wall_seconds, 2) << " s";
  if (config_.runs > 1) {
    const RunSummary rs =
        RepeatTraining(graph, config_.model, config_.runs, ArchName(config_.model.arch));
    io::WriteFile(dir / "runs.txt", FormatRunTable(std::span(&rs, 1), false));
    summary << "\n" << FormatRunTable(std::span(&rs, 1), true);
  }
  if (config_.compare) {
    std::vector<RunSummary> rows;
    for (const auto& [name, cfg] : StandardModelVariants(config_.model)) {
      rows.push_back(RepeatTraining(graph, cfg, config_.runs, name));
    }
    io::WriteFile(dir / "compare.txt", FormatRunTable(rows, false));
    summary << "\n" << FormatRunTable(rows, true);
  }
  StageResult r;
  r.summary = summary.str();
  return r;
}

StageResult Pipeline::Evaluate() {
  const fs::path bundle = StageDir(Stage::kBuildCityGraph) / "graph";
  const fs::path model_path = StageDir(Stage::kTrain) / "model.bin";
  RequireFile(bundle / "nodes.txt", "run build-city-graph first");
  RequireFile(model_path, "run train first");
  const CityGraph graph = ReadCityGraphBundle(bundle);
  GnnModel model = GnnModel::Load(model_path);
  if (model.in_dim() != graph.features.cols()) {
    ThrowData("model expects " + std::to_string(model.in_dim()) + " features, graph has " +
              std::to_string(graph.features.cols()));
  }
  const PreparedGraph prepared(model.config().arch == Arch::kMlp ? Adjacency(graph.n())
                                                                 : graph.weights.adjacency);
  const DenseMatrix probs = model.Probabilities(graph.features, prepared);
  std::vector<int> pred(graph.n());
  std::ostringstream rows;
  rows << io::FormatHeader("predictions") << '\n' << "road_id,predicted,p_low,p_medium,p_high,label\n";
  for (std::size_t i = 0; i < graph.n(); ++i) {
    int best = 0;
    for (int c = 1; c < kNumClasses; ++c) {
      if (probs(i, static_cast<std::size_t>(c)) > probs(i, static_cast<std::size_t>(best))) best = c;
    }
    pred[i] = best;
    rows << graph.road_ids[i] << ',' << ClassLabelName(best);
    for (int c = 0; c < kNumClasses; ++c) rows << ',' << io::FormatDouble(probs(i, static_cast<std::size_t>(c)));
    rows << ',' << (graph.labels[i] == kUnlabeled ? "unlabeled" : ClassLabelName(graph.labels[i])) << '\n';
  }
  const fs::path dir = StageDir(Stage::kEvaluate);
  io::WriteFile(dir / "predictions.csv", rows.str());

  std::ostringstream metrics;
  metrics << io::FormatHeader("metrics") << '\n';
  auto emit = [&](const char* name, const std::vector<std::size_t>& mask) {
    if (mask.empty()) {
      metrics << name << " n 0\n";
      return Metrics{};
    }
    const Metrics m = urbanrest::Evaluate(pred, graph.labels, mask);
    metrics << name << " n " << mask.size() << " accuracy " << io::FormatDouble(m.accuracy)
            << " macro_f1 " << io::FormatDouble(m.macro_f1) << '\n';
    for (int t = 0; t < kNumClasses; ++t) {
      metrics << name << " confusion " << ClassLabelName(t);
      for (int p = 0; p < kNumClasses; ++p) metrics << ' ' << m.confusion[t][p];
      metrics << '\n';
    }
    return m;
  };
  std::vector<std::size_t> labeled;
  for (std::size_t i = 0; i < graph.n(); ++i) {
    if (graph.labels[i] != kUnlabeled) labeled.push_back(i);
  }
  const DataSplit split = StratifiedSplit(graph.labels, model.config());
  const Metrics test = emit("test", split.test);
  emit("labeled", labeled);
  io::WriteFile(dir / "metrics.txt", metrics.str());
  StageResult r;
  r.summary = std::to_string(graph.n()) + " predictions; test accuracy " + Fixed(test.accuracy) +
              " on " + std::to_string(split.test.size()) + " nodes";
  return r;
}

StageResult Pipeline::Ablate() {
  const fs::path bundle = StageDir(Stage::kBuildCityGraph) / "graph";
  RequireFile(bundle / "nodes.txt", "run build-city-graph first");
  const CityGraph graph = ReadCityGraphBundle(bundle);
  std::vector<RunSummary> rows;
  for (const auto& exp : StandardAblationBattery()) {
    std::vector<std::string> keep;
    for (const auto& g : exp.keep) {
      const bool present = std::any_of(graph.group_spans.begin(), graph.group_spans.end(),
                                       [&](const GroupSpan& s) { return s.name == g; });
      if (present) keep.push_back(g);
    }
    if (keep.empty()) {
      log::Warn("ablation '" + exp.name + "' keeps no present feature group, skipped");
      continue;
    }
    rows.push_back(RepeatTraining(KeepGroups(graph, keep), config_.model, config_.ablation_runs, exp.name));
  }
  io::WriteFile(StageDir(Stage::kAblate) / "ablation.txt", FormatRunTable(rows, false));
  StageResult r;
  r.summary = FormatRunTable(rows, true);
  return r;
}

StageResult Pipeline::Cluster() {
  const fs::path bundle = StageDir(Stage::kBuildCityGraph) / "graph";
  RequireFile(bundle / "nodes.txt", "run build-city-graph first");
  const CityGraph graph = ReadCityGraphBundle(bundle);
  const auto preds = ReadPredictions(StageDir(Stage::kEvaluate) / "predictions.csv");
  const int target = ParseClassLabel(config_.cluster_class);
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < graph.n(); ++i) index[graph.road_ids[i]] = i;
  std::vector<std::string> ids;
  for (const auto& p : preds) {
    if (p.predicted == target && index.contains(p.road_id)) ids.push_back(p.road_id);
  }
  const fs::path dir = StageDir(Stage::kCluster);
  StageResult r;
  if (ids.size() < 3) {
    log::Warn("cluster: only " + std::to_string(ids.size()) + " roads predicted '" +
              config_.cluster_class + "', nothing to cluster");
    io::WriteFile(dir / "clusters.csv", io::FormatHeader("clusters") + "\n# skipped\nroad_id,cluster\n");
    r.skipped = true;
    r.summary = "skipped: fewer than 3 roads in class " + config_.cluster_class;
    return r;
  }
  DenseMatrix x(ids.size(), graph.features.cols());
  for (std::size_t r_i = 0; r_i < ids.size(); ++r_i) {
    const auto row = graph.features.Row(index[ids[r_i]]);
    std::copy(row.begin(), row.end(), x.Row(r_i).begin());
  }
  const std::size_t k_max = std::min(config_.cluster_k_max, ids.size() - 1);
  const std::size_t k_min = std::min(config_.cluster_k_min, k_max);
  KMeansOptions opts;
  opts.restarts = config_.cluster_restarts;
  const SilhouetteSweepResult sweep = SilhouetteSweep(x, k_min, k_max, config_.cluster_seed, opts);
  WriteSilhouetteTable(dir / "silhouette.csv", sweep);
  WriteClusterAssignments(dir / "clusters.csv", ids, sweep.best);
  r.summary = std::to_string(ids.size()) + " '" + config_.cluster_class + "' roads, best k " +
              std::to_string(sweep.best_k) + " (silhouette " + Fixed(sweep.best.silhouette) + ")";
  return r;
}

StageResult Pipeline::Report() {
  const fs::path graphs_dir = StageDir(Stage::kBuildEntityGraphs) / "graphs";
  RequireFile(graphs_dir / "roads.txt", "run build-entity-graphs first");
  const auto graphs = ReadEntityGraphDir(graphs_dir, config_.entity_threshold);
  std::map<std::string, const EntityGraph*> by_road;
  for (const auto& [road, g] : graphs) by_road[road] = &g;
  const auto preds = ReadPredictions(StageDir(Stage::kEvaluate) / "predictions.csv");
  ClassNames names;
  if (!config_.paths.class_names.empty()) names = ClassNames::Load(config_.paths.class_names);

  std::map<std::string, std::vector<EntityGraph>> by_class;
  for (int c = 0; c < kNumClasses; ++c) by_class[std::to_string(c) + "-" + ClassLabelName(c)];
  for (const auto& p : preds) {
    const auto it = by_road.find(p.road_id);
    if (it != by_road.end()) {
      by_class[std::to_string(p.predicted) + "-" + ClassLabelName(p.predicted)].push_back(*it->second);
    }
  }
  const auto class_groups = ClassStructureGraphs(by_class, config_.top_k);
  const fs::path dir = StageDir(Stage::kReport);
  io::WriteFile(dir / "structure_by_class.txt", FormatStructureReport(class_groups, names));

  std::size_t cluster_groups = 0;
  const fs::path clusters = StageDir(Stage::kCluster) / "clusters.csv";
  if (fs::exists(clusters)) {
    std::map<std::string, std::vector<EntityGraph>> by_cluster;
    for (const auto& line : io::ReadDataLines(clusters, "clusters")) {
      const auto parts = io::Split(line, ',');
      if (parts.size() != 2 || io::Trim(parts[0]) == "road_id") continue;
      const auto it = by_road.find(std::string(io::Trim(parts[0])));
      if (it == by_road.end()) continue;
      by_cluster["cluster-" + std::string(io::Trim(parts[1]))].push_back(*it->second);
    }
    const auto groups = ClassStructureGraphs(by_cluster, config_.top_k);
    cluster_groups = groups.size();
    io::WriteFile(dir / "structure_by_cluster.txt", FormatStructureReport(groups, names));
  }
  StageResult r;
  r.summary = std::to_string(class_groups.size()) + " class groups, " + std::to_string(cluster_groups) +
              " cluster groups";
  return r;
}

}  // namespace urbanrest
