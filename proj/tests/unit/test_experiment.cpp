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

#include <filesystem>
#include <string>

#include <gtest/gtest.h>

#include "common/error.hpp"
#include "common/text.hpp"
#include "data/dataset.hpp"
#include "experiment/config.hpp"
#include "experiment/experiment.hpp"

namespace fedtrust::experiment {
namespace {

namespace fs = std::filesystem;

fs::path TempDir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fedtrust_" + name);
  fs::remove_all(p);
  return p;
}

ExperimentConfig Smoke(const fs::path& out) {
  ExperimentConfig c = ParseConfig(
      "folds = 1\n"
      "master_seed = 3\n"
      "data.n = 300\n"
      "partition.clients = 2\n"
      "train.rounds = 2\n");
  c.output_dir = out.string();
  c.run_id = "smoke";
  c.threads = 1;
  return c;
}

ErrorKind KindOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorKind::kIo;
}

TEST(Config, DefaultsMirrorReferenceProtocol) {
  const ExperimentConfig c;
  EXPECT_EQ(c.training.rounds, 10u);
  EXPECT_EQ(c.folds, 5u);
  EXPECT_EQ(c.metrics.noise.sigma, 0.1);
  EXPECT_EQ(c.metrics.attack.step_size, 0.007);
  EXPECT_EQ(c.metrics.attack.epsilon, 0.3);
  EXPECT_EQ(c.metrics.attack.steps, 40u);
  EXPECT_EQ(c.valuation.eps1, 0.001);
  EXPECT_EQ(c.valuation.eps2, 0.05);
  EXPECT_EQ(c.valuation.eps3, 0.002);
  EXPECT_EQ(c.partition.dirichlet_alpha, 0.5);
  EXPECT_EQ(c.partition.client_count, 4u);
}

TEST(Config, TextRoundTrip) {
  ExperimentConfig c = ParseConfig(
      "# comment\n"
      "run_id = abc\n"
      "valuation.eps1 = 0.25   # trailing\n"
      "valuation.schemes = gtg,loo\n"
      "model.hidden = 5\n"
      "partition.mode = iid\n");
  EXPECT_EQ(c.run_id, "abc");
  EXPECT_EQ(c.valuation.eps1, 0.25);
  EXPECT_EQ(c.schemes.size(), 2u);
  EXPECT_EQ(ConfigToText(ParseConfig(ConfigToText(c))), ConfigToText(c));
}

TEST(Config, ErrorsNameLineAndKey) {
  try {
    ParseConfig("folds = 2\nvaluation.eps9 = 1\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfig);
    const std::string msg = e.what();
    EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("valuation.eps9"), std::string::npos) << msg;
  }
  EXPECT_EQ(KindOf([] { ParseConfig("folds = two\n"); }), ErrorKind::kConfig);
  EXPECT_EQ(KindOf([] { ParseConfig("folds = 0\n"); }), ErrorKind::kConfig);
  EXPECT_EQ(KindOf([] { ParseConfig("no equals sign\n"); }),
            ErrorKind::kConfig);
  EXPECT_EQ(KindOf([] { ParseConfig("valuation.eps2 = 0\n"); }),
            ErrorKind::kConfig);
}

TEST(Experiment, SmokeRunScoresRoundTwoOnly) {
  const auto dir = TempDir("smoke");
  const auto summary = RunExperiment(Smoke(dir));
  EXPECT_TRUE(summary.failures.empty());
  const fs::path fold = dir / "smoke" / "fold_0";
  const auto table =
      valuation::ScoreTable::FromCsv(ReadFile((fold / "scores.csv").string()));
  EXPECT_EQ(table.max_round(), 2u);
  for (const auto& [key, _] : table.entries()) EXPECT_EQ(key.round, 2u);
  EXPECT_EQ(table.entries().size(), 3u * 4u * 2u);
  const auto excluded = valuation::ScoreTable::FromCsv(
      ReadFile((fold / "scores_excluded.csv").string()));
  for (const auto& [key, _] : excluded.entries()) EXPECT_EQ(key.round, 1u);
  // With T = 2 the totals are the round-2 scores.
  const auto totals = valuation::Accumulate(table, 2);
  EXPECT_EQ(ReadFile((fold / "scores_total.csv").string()),
            valuation::TotalsToCsv(totals));
  for (const char* f : {"report.json", "report.csv", "heatmap.csv",
                        "config.cfg", "folds.json"}) {
    EXPECT_TRUE(fs::exists(dir / "smoke" / f)) << f;
  }
  EXPECT_TRUE(fs::exists(fold / "round_2" / "meta.json"));
  fs::remove_all(dir);
}

TEST(Experiment, RerunIsByteIdenticalAndAnalyzeIsPure) {
  const auto dir = TempDir("rerun");
  auto cfg = Smoke(dir);
  cfg.folds = 2;
  cfg.training.rounds = 3;
  RunExperiment(cfg);
  const fs::path run = dir / "smoke";
  const std::string s0 = ReadFile((run / "fold_0" / "scores.csv").string());
  const std::string s1 = ReadFile((run / "fold_1" / "scores.csv").string());
  const std::string report = ReadFile((run / "report.json").string());
  const std::string heat = ReadFile((run / "heatmap.csv").string());
  EXPECT_NE(s0, s1);
  cfg.threads = 3;
  RunExperiment(cfg);
  EXPECT_EQ(ReadFile((run / "fold_0" / "scores.csv").string()), s0);
  EXPECT_EQ(ReadFile((run / "fold_1" / "scores.csv").string()), s1);
  fs::remove(run / "report.json");
  fs::remove(run / "heatmap.csv");
  AnalyzeRun(run.string());
  EXPECT_EQ(ReadFile((run / "report.json").string()), report);
  EXPECT_EQ(ReadFile((run / "heatmap.csv").string()), heat);
  fs::remove_all(dir);
}

TEST(Experiment, AnalyzeHandCraftedScores) {
  const auto dir = TempDir("hand");
  fs::create_directories(dir);
  std::string csv = "scheme,metric,client,round,value\n";
  const char* vals[3] = {"0.5", "-0.25", "0.125"};
  for (const char* m : {"perf", "fair"}) {
    for (int k = 0; k < 3; ++k) {
      csv += std::string("gtg,") + m + "," + std::to_string(k) + ",2," +
             vals[k] + "\n";
    }
  }
  WriteFileAtomic((dir / "scores.csv").string(), csv);
  const auto rep = AnalyzeRun(dir.string());
  ASSERT_EQ(rep.comparisons.size(), 1u);
  EXPECT_EQ(rep.comparisons[0].phi.mean, 1.0);
  EXPECT_EQ(ReadFile((dir / "report.csv").string()),
            "setting,metric,phi,phi_std,l2,l2_std\ngtg,fair,1,0,0,0\n");
  fs::remove_all(dir);
}

TEST(Experiment, AnalyzeEmptyDirIsDataError) {
  const auto dir = TempDir("empty");
  fs::create_directories(dir);
  EXPECT_EQ(KindOf([&] { AnalyzeRun(dir.string()); }), ErrorKind::kData);
  WriteFileAtomic((dir / "scores.csv").string(), "garbage\n1,2\n");
  EXPECT_EQ(KindOf([&] { AnalyzeRun(dir.string()); }), ErrorKind::kData);
  fs::remove_all(dir);
}

TEST(Experiment, FailingFoldsAreRecorded) {
  const auto dir = TempDir("fail");
  auto cfg = Smoke(dir);
  cfg.folds = 2;
  cfg.training.optimizer = federation::Optimizer::kSgd;
  cfg.training.learning_rate = 1e300;
  cfg.training.local_epochs = 3;
  const auto summary = RunExperiment(cfg);
  ASSERT_EQ(summary.failures.size(), 2u);
  EXPECT_EQ(summary.failures[0].kind, ErrorKind::kNumeric);
  EXPECT_TRUE(fs::exists(dir / "smoke" / "fold_0" / "FAILED"));
  EXPECT_TRUE(fs::exists(dir / "smoke" / "fold_1" / "FAILED"));
  EXPECT_TRUE(fs::exists(dir / "smoke" / "folds.json"));
  EXPECT_FALSE(fs::exists(dir / "smoke" / "report.json"));
  fs::remove_all(dir);
}

TEST(GenerateData, ShapeAndDeterminism) {
  const auto dir = TempDir("gen");
  auto cfg = ParseConfig("data.n = 100\ndata.d = 4\n");
  const std::string a = (dir / "a.csv").string(), b = (dir / "b.csv").string();
  EXPECT_EQ(GenerateData(cfg, a), 100u);
  GenerateData(cfg, b);
  const std::string text = ReadFile(a);
  EXPECT_EQ(text, ReadFile(b));
  EXPECT_EQ(text.substr(0, text.find('\n')), "f0,f1,f2,f3,s,y");
  EXPECT_EQ(data::ParseCanonicalCsv(text).size(), 100u);
  fs::remove_all(dir);
}

TEST(GenerateData, CsvSourceIsNormalizedIntoCanonicalForm) {
  const auto dir = TempDir("gencsv");
  fs::create_directories(dir);
  const std::string src = (dir / "in.csv").string();
  WriteFileAtomic(src, "age,job,income,sex\n20,a,<=50K,Male\n40,b,>50K,Female\n"
                       "60,a,>50K,Male\n30,b,<=50K,Female\n");
  auto cfg = ParseConfig("data.source = csv\ndata.csv_path = " + src +
                         "\ndata.label = income\ndata.sensitive = sex\n"
                         "data.positive_sensitive_value = Female\n"
                         "data.categorical = job\n");
  const std::string out = (dir / "out.csv").string();
  EXPECT_EQ(GenerateData(cfg, out), 4u);
  const auto d = data::ReadCanonicalCsv(out);
  EXPECT_EQ(d.feature_dim(), 3u);
  EXPECT_EQ(d.features(1)[0], 0.5);
  EXPECT_TRUE(d.sensitive(1));
  fs::remove_all(dir);
}

TEST(DemoFig1, ReproducesReferenceValues) {
  const auto r = DemoFig1();
  EXPECT_NEAR(r.perf, 2.0 / 3.0, 1e-9);
  EXPECT_NEAR(r.gap, 1.0 / 3.0, 1e-9);
  EXPECT_NEAR(r.fair, 2.0 / 3.0, 1e-9);
  EXPECT_NEAR(r.attack_success, 0.25, 1e-9);
  EXPECT_NEAR(r.res, 0.75, 1e-9);
  EXPECT_TRUE(r.matches);
}

}  // namespace
}  // namespace fedtrust::experiment
