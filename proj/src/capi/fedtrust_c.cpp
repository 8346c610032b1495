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

#include "fedtrust/fedtrust.h"

#include <algorithm>
#include <cstring>
#include <exception>
#include <new>
#include <span>
#include <string>

#include "common/error.hpp"
#include "data/dataset.hpp"
#include "experiment/config.hpp"
#include "experiment/experiment.hpp"
#include "metrics/trust_metrics.hpp"
#include "nn/mlp.hpp"

struct ft_config {
  fedtrust::experiment::ExperimentConfig cfg;
};

struct ft_model {
  fedtrust::nn::ModelParams params;
};

struct ft_dataset {
  fedtrust::data::Dataset data;
};

namespace {

thread_local std::string g_last_error;

ft_status ToStatus(fedtrust::ErrorKind kind) {
  using fedtrust::ErrorKind;
  switch (kind) {
    case ErrorKind::kConfig:
      return FT_ERR_CONFIG;
    case ErrorKind::kData:
      return FT_ERR_DATA;
    case ErrorKind::kNumeric:
      return FT_ERR_NUMERIC;
    case ErrorKind::kInput:
      return FT_ERR_INPUT;
    case ErrorKind::kMetricUndefined:
      return FT_ERR_METRIC_UNDEFINED;
    case ErrorKind::kIo:
      return FT_ERR_IO;
  }
  return FT_ERR_INTERNAL;
}

template <typename Fn>
ft_status Guard(Fn&& fn) {
  try {
    fn();
    return FT_OK;
  } catch (const fedtrust::Error& e) {
    g_last_error = e.what();
    return ToStatus(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return FT_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return FT_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return FT_ERR_INTERNAL;
  }
}

ft_status NullArgument(const char* what) {
  g_last_error = std::string("null argument: ") + what;
  return FT_ERR_INPUT;
}

}  // namespace

extern "C" {

const char* ft_version(void) { return "1.0.0"; }

const char* ft_last_error(void) { return g_last_error.c_str(); }

const char* ft_status_name(ft_status status) {
  switch (status) {
    case FT_OK:
      return "ok";
    case FT_ERR_CONFIG:
      return "config error";
    case FT_ERR_DATA:
      return "data error";
    case FT_ERR_NUMERIC:
      return "numeric error";
    case FT_ERR_INPUT:
      return "input error";
    case FT_ERR_METRIC_UNDEFINED:
      return "metric undefined";
    case FT_ERR_IO:
      return "io error";
    case FT_ERR_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

ft_status ft_config_default(ft_config** out) {
  if (out == nullptr) return NullArgument("out");
  return Guard([&] { *out = new ft_config{}; });
}

ft_status ft_config_load(const char* path, ft_config** out) {
  if (path == nullptr || out == nullptr) return NullArgument("path/out");
  return Guard([&] {
    *out = new ft_config{fedtrust::experiment::LoadConfig(path)};
  });
}

ft_status ft_config_set(ft_config* cfg, const char* key, const char* value) {
  if (cfg == nullptr || key == nullptr || value == nullptr) {
    return NullArgument("cfg/key/value");
  }
  return Guard([&] {
    fedtrust::experiment::SetConfigValue(&cfg->cfg, key, value);
  });
}

ft_status ft_config_to_text(const ft_config* cfg, char* buffer,
                            size_t capacity, size_t* required) {
  if (cfg == nullptr) return NullArgument("cfg");
  return Guard([&] {
    const std::string text = fedtrust::experiment::ConfigToText(cfg->cfg);
    if (required != nullptr) *required = text.size() + 1;
    if (buffer != nullptr && capacity > 0) {
      const size_t n = std::min(capacity - 1, text.size());
      std::memcpy(buffer, text.data(), n);
      buffer[n] = '\0';
    }
  });
}

void ft_config_free(ft_config* cfg) { delete cfg; }

ft_status ft_run(const ft_config* cfg, ft_run_summary* summary) {
  if (cfg == nullptr) return NullArgument("cfg");
  return Guard([&] {
    const auto s = fedtrust::experiment::RunExperiment(cfg->cfg);
    if (summary != nullptr) {
      summary->folds_completed = s.completed_folds.size();
      summary->folds_failed = s.failures.size();
      summary->first_failure =
          s.failures.empty() ? FT_OK : ToStatus(s.failures.front().kind);
    }
    if (!s.failures.empty()) {
      g_last_error = "fold " + std::to_string(s.failures.front().fold) +
                     ": " + s.failures.front().message;
    }
  });
}

ft_status ft_analyze(const char* run_dir) {
  if (run_dir == nullptr) return NullArgument("run_dir");
  return Guard([&] { fedtrust::experiment::AnalyzeRun(run_dir); });
}

ft_status ft_generate_data(const ft_config* cfg, const char* out_path,
                           size_t* rows_written) {
  if (cfg == nullptr || out_path == nullptr) return NullArgument("cfg/out_path");
  return Guard([&] {
    const size_t n = fedtrust::experiment::GenerateData(cfg->cfg, out_path);
    if (rows_written != nullptr) *rows_written = n;
  });
}

ft_status ft_demo_fig1(ft_fig1_result* out) {
  if (out == nullptr) return NullArgument("out");
  return Guard([&] {
    const auto r = fedtrust::experiment::DemoFig1();
    *out = {r.perf, r.gap, r.fair, r.attack_success, r.res, r.matches ? 1 : 0};
  });
}

ft_status ft_model_load(const char* path, ft_model** out) {
  if (path == nullptr || out == nullptr) return NullArgument("path/out");
  return Guard([&] { *out = new ft_model{fedtrust::nn::LoadParams(path)}; });
}

size_t ft_model_input_dim(const ft_model* model) {
  return model == nullptr ? 0 : model->params.architecture().input_dim();
}

ft_status ft_model_predict(const ft_model* model, const double* x, size_t dim,
                           size_t* label) {
  if (model == nullptr || x == nullptr || label == nullptr) {
    return NullArgument("model/x/label");
  }
  return Guard([&] {
    *label = fedtrust::nn::Predict(model->params,
                                   std::span<const double>(x, dim));
  });
}

void ft_model_free(ft_model* model) { delete model; }

ft_status ft_dataset_load(const char* path, ft_dataset** out) {
  if (path == nullptr || out == nullptr) return NullArgument("path/out");
  return Guard([&] {
    *out = new ft_dataset{fedtrust::data::ReadCanonicalCsv(path)};
  });
}

size_t ft_dataset_size(const ft_dataset* data) {
  return data == nullptr ? 0 : data->data.size();
}

size_t ft_dataset_feature_dim(const ft_dataset* data) {
  return data == nullptr ? 0 : data->data.feature_dim();
}

void ft_dataset_free(ft_dataset* data) { delete data; }

void ft_metric_params_default(ft_metric_params* params) {
  if (params == nullptr) return;
  const fedtrust::metrics::MetricConfig d;
  *params = {d.fairness.target_class, d.noise.sigma, d.noise.seed,
             d.attack.epsilon, d.attack.step_size, d.attack.steps};
}

ft_status ft_evaluate(const ft_model* model, const ft_dataset* data,
                      ft_metric metric, const ft_metric_params* params,
                      double* value) {
  if (model == nullptr || data == nullptr || value == nullptr) {
    return NullArgument("model/data/value");
  }
  return Guard([&] {
    fedtrust::metrics::MetricConfig cfg;
    if (params != nullptr) {
      cfg.fairness.target_class = params->target_class;
      cfg.noise.sigma = params->sigma;
      cfg.noise.seed = params->noise_seed;
      cfg.attack.epsilon = params->epsilon;
      cfg.attack.step_size = params->step_size;
      cfg.attack.steps = params->steps;
    }
    if (static_cast<int>(metric) < 0 || static_cast<int>(metric) > 3) {
      fedtrust::ThrowInput("unknown metric id");
    }
    *value = fedtrust::metrics::Evaluate(
        static_cast<fedtrust::metrics::Metric>(metric), model->params,
        data->data, cfg);
  });
}

}  // extern "C"
