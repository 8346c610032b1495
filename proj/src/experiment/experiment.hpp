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

#ifndef FEDTRUST_EXPERIMENT_EXPERIMENT_HPP_
#define FEDTRUST_EXPERIMENT_EXPERIMENT_HPP_

#include <string>
#include <vector>

#include "analysis/analysis.hpp"
#include "common/error.hpp"
#include "experiment/config.hpp"
#include "valuation/valuation.hpp"

namespace fedtrust::experiment {

struct FoldFailure {
  size_t fold = 0;
  ErrorKind kind = ErrorKind::kData;
  std::string message;
};

struct RunSummary {
  std::string run_dir;
  std::vector<size_t> completed_folds;
  std::vector<FoldFailure> failures;
  // Utility evaluations per fold (cache misses across all schemes).
  std::vector<size_t> utility_evaluations;
};

// Loads or generates the dataset a config describes (before splitting).
data::Dataset LoadExperimentData(const ExperimentConfig& cfg);

// <output_dir>/<run_id>
std::string RunDirectory(const ExperimentConfig& cfg);
std::string FoldDirectory(const std::string& run_dir, size_t fold);

// Per fold: partition, train T rounds (checkpointed), score every round
// from the checkpoints, accumulate, persist. A failing fold is recorded in
// <fold_dir>/FAILED and the remaining folds still run. The cross-fold
// report is written when at least one fold completes.
RunSummary RunExperiment(const ExperimentConfig& cfg);

// Rebuilds report.json, report.csv and heatmap.csv from persisted
// scores.csv files (either <dir>/scores.csv or <dir>/fold_*/scores.csv).
analysis::AnalysisReport AnalyzeRun(const std::string& run_dir);

void WriteReport(const std::string& dir,
                 const std::vector<valuation::ScoreTable>& folds);

// Writes the canonical CSV of the configured dataset; returns row count.
size_t GenerateData(const ExperimentConfig& cfg, const std::string& out_path);

struct Fig1Result {
  double perf = 0.0;
  double gap = 0.0;
  double fair = 0.0;
  double attack_success = 0.0;
  double res = 0.0;
  bool matches = false;  // every value within 1e-9 of the reference
};

// Six-sample toy: labels G,R,G,R,R,G; predictions G,R,R,G,R,G; samples
// 1, 2 and 4 protected; target class R; the attacker flips sample 1 only.
Fig1Result DemoFig1();

}  // namespace fedtrust::experiment

#endif  // FEDTRUST_EXPERIMENT_EXPERIMENT_HPP_
