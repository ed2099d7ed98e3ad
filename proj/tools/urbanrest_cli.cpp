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

// Command-line front end. Talks to the library only through urbanrest.h.

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "urbanrest/urbanrest.h"

namespace {

std::atomic<bool> g_stop{false};

void OnSignal(int) { g_stop.store(true); }

int ExitCode(ur_status s) {
  switch (s) {
    case UR_OK: return 0;
    case UR_ERR_USAGE: return 1;
    case UR_ERR_DATA: return 2;
    case UR_ERR_NUMERIC: return 3;
    case UR_ERR_INTERNAL: return 2;
  }
  return 2;
}

int Report(ur_status s) {
  if (s != UR_OK) std::fprintf(stderr, "urbanrest: error: %s\n", ur_last_error());
  return ExitCode(s);
}

struct Globals {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string log_level;
};

// Loads the config file (if any) and applies --set overrides.
ur_status MakeConfig(const Globals& g, ur_config** out) {
  ur_status s = g.config_path.empty() ? ur_config_create(out) : ur_config_load(g.config_path.c_str(), out);
  if (s != UR_OK) return s;
  for (const auto& o : g.overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) {
      ur_config_free(*out);
      *out = nullptr;
      std::fprintf(stderr, "urbanrest: error: --set expects key=value, got '%s'\n", o.c_str());
      return UR_ERR_USAGE;
    }
    s = ur_config_set(*out, o.substr(0, eq).c_str(), o.substr(eq + 1).c_str());
    if (s != UR_OK) {
      ur_config_free(*out);
      *out = nullptr;
      return s;
    }
  }
  return UR_OK;
}

int RunStage(const Globals& g, const std::string& stage,
             const std::vector<std::pair<std::string, std::string>>& extra) {
  ur_config* cfg = nullptr;
  ur_status s = MakeConfig(g, &cfg);
  if (s != UR_OK) return Report(s);
  for (const auto& [k, v] : extra) {
    if ((s = ur_config_set(cfg, k.c_str(), v.c_str())) != UR_OK) {
      ur_config_free(cfg);
      return Report(s);
    }
  }
  char* summary = nullptr;
  s = stage == "all" ? ur_run_pipeline(cfg, &summary) : ur_run_stage(cfg, stage.c_str(), &summary);
  if (s == UR_OK && summary != nullptr) std::printf("%s\n", summary);
  ur_string_free(summary);
  ur_config_free(cfg);
  return Report(s);
}

int Serve(const Globals& g, const std::string& host, int port) {
  ur_config* cfg = nullptr;
  ur_status s = MakeConfig(g, &cfg);
  if (s != UR_OK) return Report(s);
  ur_rating_service* svc = nullptr;
  s = ur_rating_service_create(cfg, &svc);
  ur_config_free(cfg);
  if (s != UR_OK) return Report(s);
  int bound = 0;
  if ((s = ur_rating_service_start(svc, host.empty() ? nullptr : host.c_str(), port, &bound)) != UR_OK) {
    ur_rating_service_free(svc);
    return Report(s);
  }
  std::printf("rating service listening on port %d\n", bound);
  std::fflush(stdout);
  std::signal(SIGINT, OnSignal);
  std::signal(SIGTERM, OnSignal);
  while (!g_stop.load()) std::this_thread::sleep_for(std::chrono::milliseconds(200));
  s = ur_rating_service_stop(svc);
  ur_rating_service_free(svc);
  return Report(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"urbanrest: street-view restoration-quality pipeline"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ur_version());
  Globals g;
  app.add_option("-c,--config", g.config_path, "Pipeline config file (key = value)");
  app.add_option("--set", g.overrides, "Override a config key: key=value (repeatable)");
  app.add_option("--log-level", g.log_level, "debug|info|warn|error|off (default from URBANREST_LOG)");

  const std::vector<std::pair<std::string, std::string>> stages = {
      {"build-entity-graphs", "Build per-road entity graphs from segmentation rasters"},
      {"embed-streets", "Embed entity graphs into street-structure vectors"},
      {"build-city-graph", "Assemble the road-level graph, features and spatial weights"},
      {"evaluate", "Predict every road with the trained model and score the test split"},
      {"label", "Derive road labels from the rating ledger (TrueSkill + Jenks)"},
      {"cluster", "K-means with silhouette selection over one predicted class"},
      {"report", "Entity-structure centrality report per class and cluster"},
  };
  std::string chosen;
  std::vector<std::pair<std::string, std::string>> extra;
  for (const auto& [name, help] : stages) {
    app.add_subcommand(name, help)->callback([&chosen, name = name] { chosen = name; });
  }

  bool compare = false;
  std::size_t runs = 0;
  auto* train = app.add_subcommand("train", "Train the configured model");
  train->add_flag("--compare", compare, "Also train the standard model variants");
  train->add_option("--runs", runs, "Repeated runs with consecutive seeds");
  train->callback([&] {
    chosen = "train";
    if (compare) extra.emplace_back("train.compare", "true");
    if (runs > 0) extra.emplace_back("train.runs", std::to_string(runs));
  });

  std::size_t ablate_runs = 0;
  auto* ablate = app.add_subcommand("ablate", "Run the feature-group ablation battery");
  ablate->add_option("--runs", ablate_runs, "Runs per ablation experiment");
  ablate->callback([&] {
    chosen = "ablate";
    if (ablate_runs > 0) extra.emplace_back("ablate.runs", std::to_string(ablate_runs));
  });

  app.add_subcommand("run", "Run every configured stage in order")->callback([&] { chosen = "all"; });

  std::string host;
  int port = -1;
  auto* serve = app.add_subcommand("rate-serve", "Serve the pairwise rating HTTP API");
  serve->add_option("--host", host, "Bind address (default rating.host)");
  serve->add_option("--port", port, "Port (0 picks a free one; default rating.port)");
  serve->callback([&] { chosen = "rate-serve"; });

  std::string fixture_dir;
  ur_fixture_options fx = ur_fixture_options_default();
  std::string signal_groups;
  bool no_autocorrelation = false;
  bool no_rating = false;
  auto* fixture = app.add_subcommand("fixture", "Generate a synthetic dataset");
  fixture->add_option("dir", fixture_dir, "Output directory")->required();
  fixture->add_option("--roads", fx.roads, "Number of roads (>= 10)");
  fixture->add_option("--signal", fx.signal, "Loading of the latent field on signal columns");
  fixture->add_option("--noise", fx.noise, "Per-point observation noise");
  fixture->add_option("--seed", fx.seed, "Random seed");
  fixture->add_option("--images-per-road", fx.images_per_road, "Segmentation rasters per road");
  fixture->add_option("--signal-groups", signal_groups, "Comma-separated groups carrying signal");
  fixture->add_flag("--no-autocorrelation", no_autocorrelation, "Independent latent values per road");
  fixture->add_flag("--no-rating", no_rating, "Skip the rating corpus and simulated ledger");
  fixture->callback([&] { chosen = "fixture"; });

  app.add_subcommand("config", "Print the effective configuration")->callback([&] { chosen = "config"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  if (!g.log_level.empty()) {
    if (ur_status s = ur_set_log_level(g.log_level.c_str()); s != UR_OK) return Report(s);
  }

  if (chosen == "fixture") {
    fx.autocorrelated = no_autocorrelation ? 0 : 1;
    fx.rating_corpus = no_rating ? 0 : 1;
    fx.signal_groups = signal_groups.empty() ? nullptr : signal_groups.c_str();
    const ur_status s = ur_generate_fixture(fixture_dir.c_str(), &fx);
    if (s == UR_OK) std::printf("fixture written to %s\n", fixture_dir.c_str());
    return Report(s);
  }
  if (chosen == "config") {
    ur_config* cfg = nullptr;
    ur_status s = MakeConfig(g, &cfg);
    if (s != UR_OK) return Report(s);
    char* text = nullptr;
    s = ur_config_dump(cfg, &text);
    if (s == UR_OK) std::printf("%s", text);
    ur_string_free(text);
    ur_config_free(cfg);
    return Report(s);
  }
  if (chosen == "rate-serve") return Serve(g, host, port);
  return RunStage(g, chosen, extra);
}
