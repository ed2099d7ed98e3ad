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

#include "urbanrest/urbanrest.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <string>

#include "urbanrest/analysis.hpp"
#include "urbanrest/city_graph.hpp"
#include "urbanrest/config.hpp"
#include "urbanrest/entity_graph.hpp"
#include "urbanrest/error.hpp"
#include "urbanrest/fixture.hpp"
#include "urbanrest/gnn.hpp"
#include "urbanrest/io_util.hpp"
#include "urbanrest/labeling.hpp"
#include "urbanrest/log.hpp"
#include "urbanrest/pipeline.hpp"
#include "urbanrest/rating_service.hpp"

struct ur_config {
  urbanrest::KeyValueConfig values;
  std::filesystem::path base_dir;
};

struct ur_rating_service {
  std::unique_ptr<urbanrest::RatingService> service;
  std::string host;
  int port = 0;
};

struct ur_entity_graph {
  urbanrest::EntityGraph graph;
};

struct ur_city_graph {
  urbanrest::CityGraph graph;
};

struct ur_model {
  urbanrest::GnnModel model;
};

namespace {

thread_local std::string g_last_error;

ur_status Fail(ur_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Runs body, translating exceptions into status codes.
template <typename F>
ur_status Guard(F&& body) {
  try {
    g_last_error.clear();
    body();
    return UR_OK;
  } catch (const urbanrest::Error& e) {
    return Fail(static_cast<ur_status>(static_cast<int>(e.kind())), e.what());
  } catch (const std::bad_alloc&) {
    return Fail(UR_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return Fail(UR_ERR_DATA, e.what());
  } catch (...) {
    return Fail(UR_ERR_INTERNAL, "unknown error");
  }
}

void Require(const void* p, const char* what) {
  if (p == nullptr) urbanrest::ThrowUsage(std::string(what) + " must not be NULL");
}

char* CopyString(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

urbanrest::PipelineConfig Effective(const ur_config* config) {
  Require(config, "config");
  return urbanrest::PipelineConfig::FromKeyValues(config->values, config->base_dir);
}

}  // namespace

extern "C" {

const char* ur_version(void) { return "0.1.0"; }

const char* ur_last_error(void) { return g_last_error.c_str(); }

ur_status ur_set_log_level(const char* level) {
  return Guard([&] {
    Require(level, "level");
    urbanrest::log::SetLevel(urbanrest::log::ParseLevel(level));
  });
}

void ur_string_free(char* s) { std::free(s); }

ur_status ur_config_create(ur_config** out) {
  return Guard([&] {
    Require(out, "out");
    *out = new ur_config();
  });
}

ur_status ur_config_load(const char* path, ur_config** out) {
  return Guard([&] {
    Require(path, "path");
    Require(out, "out");
    auto cfg = std::make_unique<ur_config>();
    cfg->values = urbanrest::KeyValueConfig::Load(path);
    cfg->base_dir = std::filesystem::path(path).parent_path();
    urbanrest::PipelineConfig::FromKeyValues(cfg->values, cfg->base_dir);
    *out = cfg.release();
  });
}

ur_status ur_config_set(ur_config* config, const char* key, const char* value) {
  return Guard([&] {
    Require(config, "config");
    Require(key, "key");
    Require(value, "value");
    urbanrest::KeyValueConfig next = config->values;
    next.Set(key, value);
    urbanrest::PipelineConfig::FromKeyValues(next, config->base_dir);
    config->values = std::move(next);
  });
}

ur_status ur_config_dump(const ur_config* config, char** text_out) {
  return Guard([&] {
    Require(text_out, "text_out");
    *text_out = CopyString(Effective(config).Canonical());
  });
}

void ur_config_free(ur_config* config) { delete config; }

ur_status ur_run_stage(const ur_config* config, const char* stage, char** summary_out) {
  return Guard([&] {
    Require(stage, "stage");
    urbanrest::Pipeline pipeline(Effective(config));
    const auto result = pipeline.Run(urbanrest::ParseStage(stage));
    if (summary_out != nullptr) *summary_out = CopyString(result.summary);
  });
}

ur_status ur_run_pipeline(const ur_config* config, char** summary_out) {
  return Guard([&] {
    urbanrest::Pipeline pipeline(Effective(config));
    std::string summary;
    for (const auto& r : pipeline.RunAll()) {
      summary += std::string("[") + urbanrest::StageName(r.stage) + "] " + r.summary + "\n";
    }
    if (summary_out != nullptr) *summary_out = CopyString(summary);
  });
}

ur_fixture_options ur_fixture_options_default(void) {
  const urbanrest::FixtureSpec spec;
  ur_fixture_options o;
  o.roads = spec.roads;
  o.signal = spec.signal;
  o.noise = spec.noise;
  o.seed = spec.seed;
  o.autocorrelated = spec.autocorrelated ? 1 : 0;
  o.images_per_road = spec.images_per_road;
  o.rating_corpus = spec.rating_corpus ? 1 : 0;
  o.signal_groups = nullptr;
  return o;
}

ur_status ur_generate_fixture(const char* dir, const ur_fixture_options* options) {
  return Guard([&] {
    Require(dir, "dir");
    Require(options, "options");
    urbanrest::FixtureSpec spec;
    spec.roads = options->roads;
    spec.signal = options->signal;
    spec.noise = options->noise;
    spec.seed = options->seed;
    spec.autocorrelated = options->autocorrelated != 0;
    spec.images_per_road = options->images_per_road;
    spec.rating_corpus = options->rating_corpus != 0;
    if (options->signal_groups != nullptr) {
      spec.signal_groups.clear();
      for (auto g : urbanrest::io::Split(options->signal_groups, ',')) {
        const auto t = urbanrest::io::Trim(g);
        if (!t.empty()) spec.signal_groups.emplace_back(t);
      }
    }
    urbanrest::WriteFixture(urbanrest::GenerateFixture(spec), dir);
  });
}

ur_status ur_rating_service_create(const ur_config* config, ur_rating_service** out) {
  return Guard([&] {
    Require(out, "out");
    const auto cfg = Effective(config);
    if (cfg.paths.images.empty()) urbanrest::ThrowUsage("paths.images is required for rating");
    if (cfg.paths.ledger.empty()) urbanrest::ThrowUsage("paths.ledger is required for rating");
    urbanrest::CheckInputPaths(cfg);
    urbanrest::RatingServiceOptions opts;
    opts.ledger_path = cfg.paths.ledger;
    opts.static_dir = cfg.paths.static_dir;
    opts.params = cfg.trueskill;
    opts.seed = cfg.rating_seed;
    auto svc = std::make_unique<ur_rating_service>();
    svc->host = cfg.serve_host;
    svc->port = cfg.serve_port;
    svc->service = std::make_unique<urbanrest::RatingService>(
        urbanrest::ReadImageManifest(cfg.paths.images), opts);
    *out = svc.release();
  });
}

ur_status ur_rating_service_start(ur_rating_service* service, const char* host, int port,
                                  int* bound_port) {
  return Guard([&] {
    Require(service, "service");
    const int bound = service->service->Start(host != nullptr ? std::string(host) : service->host,
                                              port >= 0 ? port : service->port);
    if (bound_port != nullptr) *bound_port = bound;
  });
}

ur_status ur_rating_service_stop(ur_rating_service* service) {
  return Guard([&] {
    Require(service, "service");
    service->service->Stop();
  });
}

void ur_rating_service_free(ur_rating_service* service) { delete service; }

ur_trueskill_params ur_trueskill_params_default(void) {
  const urbanrest::TrueSkillParams p;
  return {p.mu0, p.sigma0, p.beta, p.tau, p.draw_probability};
}

ur_status ur_trueskill_update(const ur_trueskill_params* params, double mu_a, double sigma_a,
                              double mu_b, double sigma_b, int outcome, double out[4]) {
  return Guard([&] {
    Require(params, "params");
    Require(out, "out");
    urbanrest::TrueSkillParams p{params->mu0, params->sigma0, params->beta, params->tau,
                                 params->draw_probability};
    p.Validate();
    if (!(sigma_a > 0.0) || !(sigma_b > 0.0)) urbanrest::ThrowUsage("sigma must be positive");
    const urbanrest::Rating a{mu_a, sigma_a};
    const urbanrest::Rating b{mu_b, sigma_b};
    std::pair<urbanrest::Rating, urbanrest::Rating> r;
    if (outcome == 0) {
      r = urbanrest::TrueSkillWin(a, b, p);
    } else if (outcome == 1) {
      r = urbanrest::TrueSkillDraw(a, b, p);
    } else {
      urbanrest::ThrowUsage("outcome must be 0 (a wins) or 1 (draw)");
    }
    out[0] = r.first.mu;
    out[1] = r.first.sigma;
    out[2] = r.second.mu;
    out[3] = r.second.sigma;
  });
}

ur_status ur_jenks_breaks(const double* values, size_t n, size_t k, double* breaks_out,
                          int* classes_out, double* ssd_out) {
  return Guard([&] {
    Require(values, "values");
    const auto r = urbanrest::JenksBreaks(std::span(values, n), k);
    if (breaks_out != nullptr) std::copy(r.breaks.begin(), r.breaks.end(), breaks_out);
    if (classes_out != nullptr) std::copy(r.classes.begin(), r.classes.end(), classes_out);
    if (ssd_out != nullptr) *ssd_out = r.ssd;
  });
}

namespace {
urbanrest::DenseMatrix Rows(const double* x, size_t n, size_t d) {
  Require(x, "x");
  urbanrest::DenseMatrix m(n, d);
  std::copy(x, x + n * d, m.data().begin());
  return m;
}
}  // namespace

ur_status ur_kmeans(const double* x, size_t n, size_t d, size_t k, uint64_t seed,
                    int* assignments_out, double* sse_out, double* silhouette_out) {
  return Guard([&] {
    const auto r = urbanrest::KMeans(Rows(x, n, d), k, seed);
    if (assignments_out != nullptr) std::copy(r.assignments.begin(), r.assignments.end(), assignments_out);
    if (sse_out != nullptr) *sse_out = r.sse;
    if (silhouette_out != nullptr) *silhouette_out = r.silhouette;
  });
}

ur_status ur_silhouette_sweep(const double* x, size_t n, size_t d, size_t k_min, size_t k_max,
                              uint64_t seed, size_t* best_k_out, double* scores_out) {
  return Guard([&] {
    const auto r = urbanrest::SilhouetteSweep(Rows(x, n, d), k_min, k_max, seed);
    if (best_k_out != nullptr) *best_k_out = r.best_k;
    if (scores_out != nullptr) std::copy(r.scores.begin(), r.scores.end(), scores_out);
  });
}

ur_status ur_entity_graph_from_raster(const char* raster_path, double threshold,
                                      ur_entity_graph** out) {
  return Guard([&] {
    Require(raster_path, "raster_path");
    Require(out, "out");
    const auto map = urbanrest::ReadSegmentationRaster(raster_path);
    map.Validate();
    const auto nodes = urbanrest::ComputeClassCentroids(map);
    *out = new ur_entity_graph{urbanrest::BuildEntityGraph(nodes, threshold)};
  });
}

size_t ur_entity_graph_node_count(const ur_entity_graph* graph) {
  return graph == nullptr ? 0 : graph->graph.node_count();
}

size_t ur_entity_graph_edge_count(const ur_entity_graph* graph) {
  return graph == nullptr ? 0 : graph->graph.edge_count();
}

ur_status ur_entity_graph_top_centrality(const ur_entity_graph* graph, size_t k, int* class_ids_out,
                                         double* centrality_out, size_t* count_out) {
  return Guard([&] {
    Require(graph, "graph");
    const auto top = urbanrest::TopCentrality(graph->graph, k);
    for (size_t i = 0; i < top.size(); ++i) {
      if (class_ids_out != nullptr) class_ids_out[i] = top[i].class_id;
      if (centrality_out != nullptr) centrality_out[i] = top[i].centrality;
    }
    if (count_out != nullptr) *count_out = top.size();
  });
}

void ur_entity_graph_free(ur_entity_graph* graph) { delete graph; }

ur_status ur_city_graph_load(const char* bundle_dir, ur_city_graph** out) {
  return Guard([&] {
    Require(bundle_dir, "bundle_dir");
    Require(out, "out");
    *out = new ur_city_graph{urbanrest::ReadCityGraphBundle(bundle_dir)};
  });
}

size_t ur_city_graph_node_count(const ur_city_graph* graph) {
  return graph == nullptr ? 0 : graph->graph.n();
}

size_t ur_city_graph_feature_count(const ur_city_graph* graph) {
  return graph == nullptr ? 0 : graph->graph.features.cols();
}

size_t ur_city_graph_relation_count(const ur_city_graph* graph) {
  return graph == nullptr ? 0 : graph->graph.weights.directed_relation_count;
}

void ur_city_graph_free(ur_city_graph* graph) { delete graph; }

ur_status ur_knn_relation_count(const double* xy, size_t n, size_t k, size_t* count_out) {
  return Guard([&] {
    Require(xy, "xy");
    Require(count_out, "count_out");
    std::vector<urbanrest::Point2> pts(n);
    std::vector<std::string> ids(n);
    for (size_t i = 0; i < n; ++i) {
      pts[i] = {xy[2 * i], xy[2 * i + 1]};
      ids[i] = std::to_string(i);
    }
    *count_out = urbanrest::KnnWeights(pts, ids, k).directed_relation_count;
  });
}

ur_status ur_model_train(const ur_city_graph* graph, const ur_config* config, ur_model** model_out,
                         ur_train_report* report_out) {
  return Guard([&] {
    Require(graph, "graph");
    const auto cfg = Effective(config);
    auto result = urbanrest::Train(graph->graph, cfg.model);
    if (report_out != nullptr) {
      const auto& r = result.report;
      report_out->train_accuracy = r.train_accuracy;
      report_out->val_accuracy = r.val_accuracy;
      report_out->test_accuracy = r.test.accuracy;
      report_out->test_macro_f1 = r.test.macro_f1;
      report_out->final_loss = r.loss_curve.empty() ? 0.0 : r.loss_curve.back();
      report_out->wall_seconds = r.wall_seconds;
      report_out->epochs = r.loss_curve.size();
    }
    if (model_out != nullptr) *model_out = new ur_model{std::move(result.model)};
  });
}

ur_status ur_model_save(const ur_model* model, const char* path) {
  return Guard([&] {
    Require(model, "model");
    Require(path, "path");
    model->model.Save(path);
  });
}

ur_status ur_model_load(const char* path, ur_model** out) {
  return Guard([&] {
    Require(path, "path");
    Require(out, "out");
    *out = new ur_model{urbanrest::GnnModel::Load(path)};
  });
}

ur_status ur_model_predict(ur_model* model, const ur_city_graph* graph, int* predictions_out,
                           size_t n) {
  return Guard([&] {
    Require(model, "model");
    Require(graph, "graph");
    Require(predictions_out, "predictions_out");
    const auto& g = graph->graph;
    if (n < g.n()) urbanrest::ThrowUsage("predictions buffer too small");
    if (model->model.in_dim() != g.features.cols()) {
      urbanrest::ThrowData("model feature width does not match the graph");
    }
    const urbanrest::PreparedGraph prepared(model->model.config().arch == urbanrest::Arch::kMlp
                                                ? urbanrest::Adjacency(g.n())
                                                : g.weights.adjacency);
    const auto pred = model->model.Predict(g.features, prepared);
    std::copy(pred.begin(), pred.end(), predictions_out);
  });
}

void ur_model_free(ur_model* model) { delete model; }

}  // extern "C"
