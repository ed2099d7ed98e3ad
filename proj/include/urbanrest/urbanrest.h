/*
 * Copyright 2026 The urbanrest Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to the urbanrest library. All functions are thread-safe with
 * respect to distinct handles. On failure a function returns a nonzero
 * ur_status and ur_last_error() describes the failure on the calling thread. */
#ifndef URBANREST_URBANREST_H_
#define URBANREST_URBANREST_H_

#include <stddef.h>
#include <stdint.h>

#if defined(URBANREST_BUILDING_LIBRARY)
#define UR_API __attribute__((visibility("default")))
#else
#define UR_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ur_status {
  UR_OK = 0,
  UR_ERR_USAGE = 1,
  UR_ERR_DATA = 2,
  UR_ERR_NUMERIC = 3,
  UR_ERR_INTERNAL = 4
} ur_status;

UR_API const char* ur_version(void);
/* Message for the last failed call on this thread; "" if none. */
UR_API const char* ur_last_error(void);
/* debug | info | warn | error | off */
UR_API ur_status ur_set_log_level(const char* level);
/* Frees strings returned through char** out-parameters. */
UR_API void ur_string_free(char* s);

/* ---- configuration ---------------------------------------------------- */
typedef struct ur_config ur_config;
UR_API ur_status ur_config_create(ur_config** out);
/* Relative paths in the file resolve against its directory. */
UR_API ur_status ur_config_load(const char* path, ur_config** out);
/* Override one key ("model.epochs", "paths.roads", ...). Relative paths
 * resolve against the config file directory when one was loaded. */
UR_API ur_status ur_config_set(ur_config* config, const char* key, const char* value);
/* Canonical "key = value" text of the effective configuration. */
UR_API ur_status ur_config_dump(const ur_config* config, char** text_out);
UR_API void ur_config_free(ur_config* config);

/* ---- pipeline --------------------------------------------------------- */
/* stage: build-entity-graphs | embed-streets | label | build-city-graph |
 * train | evaluate | ablate | cluster | report */
UR_API ur_status ur_run_stage(const ur_config* config, const char* stage, char** summary_out);
UR_API ur_status ur_run_pipeline(const ur_config* config, char** summary_out);

/* ---- synthetic fixtures ------------------------------------------------ */
typedef struct ur_fixture_options {
  size_t roads;
  double signal;
  double noise;
  uint64_t seed;
  int autocorrelated;
  size_t images_per_road;
  int rating_corpus;
  /* Comma-separated feature groups carrying signal; NULL means all. */
  const char* signal_groups;
} ur_fixture_options;
UR_API ur_fixture_options ur_fixture_options_default(void);
UR_API ur_status ur_generate_fixture(const char* dir, const ur_fixture_options* options);

/* ---- rating service --------------------------------------------------- */
typedef struct ur_rating_service ur_rating_service;
/* Uses paths.images, paths.ledger, paths.static_dir, trueskill.* and rating.seed. */
UR_API ur_status ur_rating_service_create(const ur_config* config, ur_rating_service** out);
/* Serves on a background thread. host NULL and port < 0 fall back to
 * rating.host / rating.port; port 0 picks a free port. */
UR_API ur_status ur_rating_service_start(ur_rating_service* service, const char* host, int port,
                                         int* bound_port);
UR_API ur_status ur_rating_service_stop(ur_rating_service* service);
UR_API void ur_rating_service_free(ur_rating_service* service);

/* ---- labeling primitives ---------------------------------------------- */
typedef struct ur_trueskill_params {
  double mu0;
  double sigma0;
  double beta;
  double tau;
  double draw_probability;
} ur_trueskill_params;
UR_API ur_trueskill_params ur_trueskill_params_default(void);
/* outcome: 0 = a wins, 1 = draw. out = {mu_a, sigma_a, mu_b, sigma_b}. */
UR_API ur_status ur_trueskill_update(const ur_trueskill_params* params, double mu_a, double sigma_a,
                                     double mu_b, double sigma_b, int outcome, double out[4]);
/* breaks_out holds k - 1 values, classes_out n values. */
UR_API ur_status ur_jenks_breaks(const double* values, size_t n, size_t k, double* breaks_out,
                                 int* classes_out, double* ssd_out);

/* ---- analysis primitives ---------------------------------------------- */
/* x is row-major n x d. */
UR_API ur_status ur_kmeans(const double* x, size_t n, size_t d, size_t k, uint64_t seed,
                           int* assignments_out, double* sse_out, double* silhouette_out);
/* scores_out holds k_max - k_min + 1 values. */
UR_API ur_status ur_silhouette_sweep(const double* x, size_t n, size_t d, size_t k_min,
                                     size_t k_max, uint64_t seed, size_t* best_k_out,
                                     double* scores_out);

/* ---- entity graphs ---------------------------------------------------- */
typedef struct ur_entity_graph ur_entity_graph;
UR_API ur_status ur_entity_graph_from_raster(const char* raster_path, double threshold,
                                             ur_entity_graph** out);
UR_API size_t ur_entity_graph_node_count(const ur_entity_graph* graph);
UR_API size_t ur_entity_graph_edge_count(const ur_entity_graph* graph);
/* Writes up to k entries; count_out receives the number written. */
UR_API ur_status ur_entity_graph_top_centrality(const ur_entity_graph* graph, size_t k,
                                                int* class_ids_out, double* centrality_out,
                                                size_t* count_out);
UR_API void ur_entity_graph_free(ur_entity_graph* graph);

/* ---- city graphs and models ------------------------------------------- */
typedef struct ur_city_graph ur_city_graph;
UR_API ur_status ur_city_graph_load(const char* bundle_dir, ur_city_graph** out);
UR_API size_t ur_city_graph_node_count(const ur_city_graph* graph);
UR_API size_t ur_city_graph_feature_count(const ur_city_graph* graph);
UR_API size_t ur_city_graph_relation_count(const ur_city_graph* graph);
UR_API void ur_city_graph_free(ur_city_graph* graph);
/* Directed KNN relation count for n points (row-major x, y). */
UR_API ur_status ur_knn_relation_count(const double* xy, size_t n, size_t k, size_t* count_out);

typedef struct ur_train_report {
  double train_accuracy;
  double val_accuracy;
  double test_accuracy;
  double test_macro_f1;
  double final_loss;
  double wall_seconds;
  size_t epochs;
} ur_train_report;

typedef struct ur_model ur_model;
/* Uses the model.* keys of config. */
UR_API ur_status ur_model_train(const ur_city_graph* graph, const ur_config* config,
                                ur_model** model_out, ur_train_report* report_out);
UR_API ur_status ur_model_save(const ur_model* model, const char* path);
UR_API ur_status ur_model_load(const char* path, ur_model** out);
/* predictions_out holds one class index (0 low, 1 medium, 2 high) per node. */
UR_API ur_status ur_model_predict(ur_model* model, const ur_city_graph* graph,
                                  int* predictions_out, size_t n);
UR_API void ur_model_free(ur_model* model);

#ifdef __cplusplus
}
#endif

#endif /* URBANREST_URBANREST_H_ */
