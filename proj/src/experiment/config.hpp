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

#ifndef FEDTRUST_EXPERIMENT_CONFIG_HPP_
#define FEDTRUST_EXPERIMENT_CONFIG_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "data/dataset.hpp"
#include "federation/federation.hpp"
#include "metrics/trust_metrics.hpp"
#include "nn/mlp.hpp"
#include "valuation/valuation.hpp"

namespace fedtrust::experiment {

enum class DataSourceKind { kSynthetic, kCsv };

struct DataConfig {
  DataSourceKind source = DataSourceKind::kSynthetic;
  data::SyntheticSpec synthetic;
  std::string csv_path;
  data::CsvSchema schema;
  double test_fraction = 0.2;
};

// Every seed used by a run is derived from master_seed; the per-stage seed
// fields inside the sub-configs are overwritten at run time.
struct ExperimentConfig {
  std::string run_id = "default";
  std::string output_dir = "runs";
  size_t folds = 5;
  uint64_t master_seed = 2026;
  size_t threads = 0;  // 0: FEDTRUST_THREADS or hardware concurrency

  DataConfig data;
  data::PartitionSpec partition;
  std::vector<size_t> hidden_layers = {16, 8};
  nn::OutputActivation output = nn::OutputActivation::kSoftmax;
  federation::TrainingConfig training;
  metrics::MetricConfig metrics;
  std::vector<valuation::Scheme> schemes = {valuation::kAllSchemes.begin(),
                                            valuation::kAllSchemes.end()};
  valuation::ValuationConfig valuation;

  void Validate() const;
};

// Flat "key = value" text; '#' starts a comment. Unknown keys and bad
// values raise config errors naming the line and key.
ExperimentConfig ParseConfig(const std::string& text);
ExperimentConfig LoadConfig(const std::string& path);

// Applies one key (same names as the file format).
void SetConfigValue(ExperimentConfig* cfg, const std::string& key,
                    const std::string& value);

// Canonical text form; ParseConfig(ConfigToText(c)) reproduces c.
std::string ConfigToText(const ExperimentConfig& cfg);

}  // namespace fedtrust::experiment

#endif  // FEDTRUST_EXPERIMENT_CONFIG_HPP_
