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

#include "experiment/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <optional>

#include "common/log.hpp"
#include "common/parallel.hpp"
#include "common/random.hpp"
#include "common/text.hpp"
#include "federation/checkpoint.hpp"
#include "json.hpp"

namespace fedtrust::experiment {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

uint64_t StageSeed(uint64_t base, const char* stage) {
  return DeriveSeed(base, {HashTag(stage)});
}

nn::Architecture BuildArchitecture(const ExperimentConfig& cfg,
                                   const data::Dataset& data) {
  nn::Architecture arch;
  arch.layer_sizes.push_back(data.feature_dim());
  arch.layer_sizes.insert(arch.layer_sizes.end(), cfg.hidden_layers.begin(),
                          cfg.hidden_layers.end());
  if (cfg.output == nn::OutputActivation::kSigmoid) {
    if (data.class_count() != 2) {
      ThrowConfig("sigmoid output needs a binary label");
    }
    arch.layer_sizes.push_back(1);
  } else {
    arch.layer_sizes.push_back(data.class_count());
  }
  arch.output = cfg.output;
  arch.Validate();
  return arch;
}

size_t ResolveThreads(const ExperimentConfig& cfg) {
  return cfg.threads > 0 ? cfg.threads : DefaultThreadCount();
}

struct FoldResult {
  valuation::ScoreTable table;
  size_t evaluations = 0;
};

FoldResult RunFold(const ExperimentConfig& cfg, const data::Split& split,
                   size_t fold, const std::string& fold_dir) {
  const uint64_t fold_seed =
      DeriveSeed(cfg.master_seed, {HashTag("fold"), fold});
  const size_t threads = ResolveThreads(cfg);

  data::PartitionSpec pspec = cfg.partition;
  pspec.seed = StageSeed(fold_seed, "partition");
  auto clients = data::Partition(split.train, pspec);

  const auto arch = BuildArchitecture(cfg, split.train);
  const auto initial = nn::InitParams(arch, StageSeed(fold_seed, "init"));

  federation::TrainingConfig tcfg = cfg.training;
  tcfg.seed = StageSeed(fold_seed, "train");
  federation::TrainingOptions topts;
  topts.threads = threads;
  topts.checkpoint_dir = fold_dir;
  topts.test = &split.test;
  federation::RunTraining(tcfg, initial, std::move(clients), topts);

  // Valuation consumes the persisted checkpoints.
  const auto records = federation::ReadRunRecords(fold_dir);

  metrics::MetricConfig mcfg = cfg.metrics;
  mcfg.noise.seed = StageSeed(fold_seed, "noise");
  mcfg.attack.seed = StageSeed(fold_seed, "attack");
  valuation::RoundValuationOptions vopts;
  vopts.schemes = cfg.schemes;
  vopts.gtg = cfg.valuation;
  vopts.gtg.perm_seed = StageSeed(fold_seed, "permutation");
  vopts.threads = threads;

  FoldResult result;
  valuation::UtilityCache cache;
  for (const auto& record : records) {
    valuation::ValueRound(record, split.test, mcfg, vopts, &cache,
                          &result.table);
  }
  result.evaluations = cache.evaluations();

  const size_t last = records.size();
  WriteFileAtomic(fold_dir + "/scores.csv",
                  result.table.ToCsv(valuation::kFirstScoredRound, last));
  WriteFileAtomic(fold_dir + "/scores_excluded.csv",
                  result.table.ToCsv(1, valuation::kFirstScoredRound - 1));
  WriteFileAtomic(
      fold_dir + "/scores_total.csv",
      valuation::TotalsToCsv(valuation::Accumulate(result.table, last)));
  return result;
}

std::vector<valuation::ScoreTable> LoadScoreTables(const std::string& dir) {
  std::vector<valuation::ScoreTable> tables;
  if (!fs::is_directory(dir)) ThrowData("'" + dir + "' is not a directory");
  const fs::path direct = fs::path(dir) / "scores.csv";
  if (fs::exists(direct)) {
    tables.push_back(valuation::ScoreTable::FromCsv(ReadFile(direct.string())));
    return tables;
  }
  std::vector<std::pair<size_t, fs::path>> folds;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    uint64_t idx = 0;
    if (entry.is_directory() && name.rfind("fold_", 0) == 0 &&
        ParseUint64(name.substr(5), &idx) &&
        fs::exists(entry.path() / "scores.csv")) {
      folds.emplace_back(static_cast<size_t>(idx), entry.path() / "scores.csv");
    }
  }
  std::sort(folds.begin(), folds.end());
  for (const auto& [_, path] : folds) {
    tables.push_back(valuation::ScoreTable::FromCsv(ReadFile(path.string())));
  }
  if (tables.empty()) ThrowData("no scores.csv found under '" + dir + "'");
  for (const auto& t : tables) {
    if (t.entries().empty()) ThrowData("scores.csv under '" + dir + "' is empty");
  }
  return tables;
}

}  // namespace

data::Dataset LoadExperimentData(const ExperimentConfig& cfg) {
  if (cfg.data.source == DataSourceKind::kCsv) {
    return data::LoadCsv(cfg.data.csv_path, cfg.data.schema);
  }
  data::SyntheticSpec spec = cfg.data.synthetic;
  spec.seed = StageSeed(cfg.master_seed, "data");
  return data::GenerateSynthetic(spec);
}

std::string RunDirectory(const ExperimentConfig& cfg) {
  return (fs::path(cfg.output_dir) / cfg.run_id).string();
}

std::string FoldDirectory(const std::string& run_dir, size_t fold) {
  return (fs::path(run_dir) / ("fold_" + std::to_string(fold))).string();
}

RunSummary RunExperiment(const ExperimentConfig& cfg) {
  cfg.Validate();
  RunSummary summary;
  summary.run_dir = RunDirectory(cfg);
  std::error_code ec;
  fs::create_directories(summary.run_dir, ec);
  if (ec) ThrowIo("cannot create run directory '" + summary.run_dir + "'");
  WriteFileAtomic(summary.run_dir + "/config.cfg", ConfigToText(cfg));

  const auto dataset = LoadExperimentData(cfg);
  if (cfg.metrics.fairness.target_class >= dataset.class_count()) {
    ThrowConfig("metrics.target_class out of range for the dataset");
  }
  const auto split = data::TrainTestSplit(dataset, cfg.data.test_fraction,
                                          StageSeed(cfg.master_seed, "split"));

  std::vector<valuation::ScoreTable> tables;
  json folds_json = json::array();
  for (size_t f = 0; f < cfg.folds; ++f) {
    const std::string fold_dir = FoldDirectory(summary.run_dir, f);
    fs::remove_all(fold_dir, ec);
    fs::create_directories(fold_dir, ec);
    if (ec) ThrowIo("cannot create fold directory '" + fold_dir + "'");
    try {
      auto result = RunFold(cfg, split, f, fold_dir);
      tables.push_back(std::move(result.table));
      summary.completed_folds.push_back(f);
      summary.utility_evaluations.push_back(result.evaluations);
      folds_json.push_back({{"fold", f},
                            {"status", "ok"},
                            {"utility_evaluations", result.evaluations}});
    } catch (const Error& e) {
      LogWarning("fold " + std::to_string(f) + " failed: " + e.what());
      summary.failures.push_back({f, e.kind(), e.what()});
      WriteFileAtomic(fold_dir + "/FAILED", std::string(ErrorKindName(e.kind())) +
                                                ": " + e.what() + "\n");
      folds_json.push_back({{"fold", f},
                            {"status", "failed"},
                            {"error", ErrorKindName(e.kind())},
                            {"message", e.what()}});
    }
  }
  WriteFileAtomic(summary.run_dir + "/folds.json", folds_json.dump(2) + "\n");
  if (!tables.empty()) WriteReport(summary.run_dir, tables);
  return summary;
}

void WriteReport(const std::string& dir,
                 const std::vector<valuation::ScoreTable>& folds) {
  const auto report = analysis::BuildReport(folds);
  WriteFileAtomic(dir + "/report.json", analysis::ReportJson(report));
  WriteFileAtomic(dir + "/report.csv", analysis::ReportCsv(report));
  WriteFileAtomic(dir + "/heatmap.csv", analysis::HeatmapCsv(report));
}

analysis::AnalysisReport AnalyzeRun(const std::string& run_dir) {
  const auto tables = LoadScoreTables(run_dir);
  WriteReport(run_dir, tables);
  return analysis::BuildReport(tables);
}

size_t GenerateData(const ExperimentConfig& cfg, const std::string& out_path) {
  const auto dataset = LoadExperimentData(cfg);
  data::WriteCanonicalCsv(dataset, out_path);
  return dataset.size();
}

namespace {

// Identifies toy samples by their single feature, id / 10.
size_t ToyId(std::span<const double> x) {
  return static_cast<size_t>(std::lround(x[0] * 10.0));
}

class ToyModel : public metrics::Classifier {
 public:
  size_t Predict(std::span<const double> x) const override {
    // Predictions G,R,R,G,R,G for samples 1..6 (G = 0, R = 1).
    static constexpr size_t kPred[] = {0, 1, 1, 0, 1, 0};
    const size_t id = ToyId(x);
    if (id < 1 || id > 6) return 0;
    return kPred[id - 1];
  }
};

class ToyAttacker : public metrics::Perturber {
 public:
  std::vector<double> Perturb(std::span<const double> x, size_t,
                              size_t) const override {
    std::vector<double> adv(x.begin(), x.end());
    // Sample 1 is pushed onto sample 3, which the model calls R.
    if (ToyId(x) == 1) adv[0] = 0.3;
    return adv;
  }
};

}  // namespace

Fig1Result DemoFig1() {
  data::Dataset toy(1, 2);
  constexpr size_t kLabels[] = {0, 1, 0, 1, 1, 0};
  constexpr bool kProtected[] = {true, true, false, true, false, false};
  for (size_t i = 0; i < 6; ++i) {
    const double x = static_cast<double>(i + 1) / 10.0;
    toy.Add(std::span<const double>(&x, 1), kLabels[i], kProtected[i]);
  }
  const ToyModel model;
  const ToyAttacker attacker;
  const metrics::FairnessSpec fairness{1};
  Fig1Result r;
  r.perf = metrics::Perf(model, toy);
  r.gap = metrics::DemographicParityGap(model, toy, fairness);
  r.fair = metrics::Fair(model, toy, fairness);
  r.attack_success = metrics::RunAttack(model, toy, attacker).success_rate();
  r.res = metrics::Res(model, toy, attacker);
  auto near = [](double a, double b) { return std::fabs(a - b) <= 1e-9; };
  r.matches = near(r.perf, 2.0 / 3.0) && near(r.gap, 1.0 / 3.0) &&
              near(r.fair, 2.0 / 3.0) && near(r.attack_success, 0.25) &&
              near(r.res, 0.75);
  return r;
}

}  // namespace fedtrust::experiment
