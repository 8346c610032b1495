/*
 * Copyright 2026 The FedTrust Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/*
 * C interface to the FedTrust federated contribution-scoring engine.
 *
 * All objects are opaque handles created and destroyed through this API.
 * Functions return an ft_status; on failure a description is available from
 * ft_last_error() on the same thread until the next call that fails.
 */

#ifndef FEDTRUST_FEDTRUST_H_
#define FEDTRUST_FEDTRUST_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(FEDTRUST_BUILDING_LIBRARY)
#define FT_API __declspec(dllexport)
#else
#define FT_API __declspec(dllimport)
#endif
#else
#define FT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Values 2-4 double as CLI exit codes. */
typedef enum ft_status {
  FT_OK = 0,
  FT_ERR_CONFIG = 2,
  FT_ERR_DATA = 3,
  FT_ERR_NUMERIC = 4,
  FT_ERR_INPUT = 5,
  FT_ERR_METRIC_UNDEFINED = 6,
  FT_ERR_IO = 7,
  FT_ERR_INTERNAL = 8
} ft_status;

typedef enum ft_metric {
  FT_METRIC_PERF = 0,
  FT_METRIC_FAIR = 1,
  FT_METRIC_REL = 2,
  FT_METRIC_RES = 3
} ft_metric;

typedef struct ft_config ft_config;
typedef struct ft_model ft_model;
typedef struct ft_dataset ft_dataset;

FT_API const char* ft_version(void);
FT_API const char* ft_last_error(void);
FT_API const char* ft_status_name(ft_status status);

/* ---- Experiment configuration ---------------------------------------- */

FT_API ft_status ft_config_default(ft_config** out);
FT_API ft_status ft_config_load(const char* path, ft_config** out);
/* Same keys as the config file, e.g. ("valuation.eps1", "0.001"). */
FT_API ft_status ft_config_set(ft_config* cfg, const char* key,
                               const char* value);
/* Canonical text form. Writes at most `capacity` bytes including the
 * terminator; *required receives the full size including the terminator. */
FT_API ft_status ft_config_to_text(const ft_config* cfg, char* buffer,
                                   size_t capacity, size_t* required);
FT_API void ft_config_free(ft_config* cfg);

/* ---- Commands ---------------------------------------------------------- */

typedef struct ft_run_summary {
  size_t folds_completed;
  size_t folds_failed;
  /* Status of the first failed fold, FT_OK when none failed. */
  ft_status first_failure;
} ft_run_summary;

/* Full experiment: every fold, scores, accumulated totals and the report. */
FT_API ft_status ft_run(const ft_config* cfg, ft_run_summary* summary);

/* Regenerates report.json, report.csv and heatmap.csv from persisted
 * scores under run_dir. */
FT_API ft_status ft_analyze(const char* run_dir);

/* Writes the configured dataset as canonical CSV (f0..f{d-1},s,y). */
FT_API ft_status ft_generate_data(const ft_config* cfg, const char* out_path,
                                  size_t* rows_written);

typedef struct ft_fig1_result {
  double perf;
  double gap;
  double fair;
  double attack_success;
  double res;
  int matches; /* 1 when all values are within 1e-9 of the reference */
} ft_fig1_result;

FT_API ft_status ft_demo_fig1(ft_fig1_result* out);

/* ---- Models, datasets and single metric evaluation --------------------- */

FT_API ft_status ft_model_load(const char* path, ft_model** out);
FT_API size_t ft_model_input_dim(const ft_model* model);
FT_API ft_status ft_model_predict(const ft_model* model, const double* x,
                                  size_t dim, size_t* label);
FT_API void ft_model_free(ft_model* model);

/* Canonical CSV produced by ft_generate_data. */
FT_API ft_status ft_dataset_load(const char* path, ft_dataset** out);
FT_API size_t ft_dataset_size(const ft_dataset* data);
FT_API size_t ft_dataset_feature_dim(const ft_dataset* data);
FT_API void ft_dataset_free(ft_dataset* data);

typedef struct ft_metric_params {
  size_t target_class;   /* fair */
  double sigma;          /* rel */
  uint64_t noise_seed;   /* rel */
  double epsilon;        /* res */
  double step_size;      /* res */
  size_t steps;          /* res */
} ft_metric_params;

/* Defaults: target class 1, sigma 0.1, PGD eps 0.3 / step 0.007 / 40. */
FT_API void ft_metric_params_default(ft_metric_params* params);

FT_API ft_status ft_evaluate(const ft_model* model, const ft_dataset* data,
                             ft_metric metric, const ft_metric_params* params,
                             double* value);

#ifdef __cplusplus
}
#endif

#endif /* FEDTRUST_FEDTRUST_H_ */
