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

#ifndef FEDTRUST_ANALYSIS_ANALYSIS_HPP_
#define FEDTRUST_ANALYSIS_ANALYSIS_HPP_

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "valuation/valuation.hpp"

namespace fedtrust::analysis {

using metrics::Metric;
using valuation::Scheme;

// Accumulated per-client scores of one (scheme, metric) pair.
struct ScoreVector {
  Scheme scheme;
  Metric metric;
  std::vector<double> values;
};

// 1-based ranks; tied values share the mean of their positions.
std::vector<double> AverageRanks(std::span<const double> v);

struct SpearmanResult {
  double phi = 0.0;
  // Set when either input is constant; phi is then defined as 0.
  bool degenerate = false;
};

SpearmanResult Spearman(std::span<const double> a, std::span<const double> b);
double Rmse(std::span<const double> a, std::span<const double> b);

// Population variance of each client's per-round scores over rounds
// 2..max_round, averaged over clients.
std::map<std::pair<Scheme, Metric>, double> PerRoundVariance(
    const valuation::ScoreTable& table);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population std across folds
};

MeanStd Aggregate(std::span<const double> per_fold);

// One row of the trust-metric versus perf comparison.
struct PerfComparison {
  Scheme scheme;
  Metric metric;
  MeanStd phi;
  MeanStd l2;
  std::vector<double> phi_per_fold;
  std::vector<double> l2_per_fold;
  size_t degenerate_folds = 0;
};

struct HeatmapCell {
  Scheme scheme;
  Metric a;
  Metric b;
  MeanStd phi;
};

struct VarianceCell {
  Scheme scheme;
  Metric metric;
  MeanStd variance;
};

struct AnalysisReport {
  size_t folds = 0;
  std::vector<PerfComparison> comparisons;
  std::vector<HeatmapCell> heatmap;
  std::vector<VarianceCell> variance;
};

// Uses every scheme and metric present in the tables. Each table must hold
// rounds 2..T for a common T >= 2.
AnalysisReport BuildReport(const std::vector<valuation::ScoreTable>& folds);

std::string ReportJson(const AnalysisReport& report);
// setting,metric,phi,phi_std,l2,l2_std; phi renders as an em-dash when
// every fold was degenerate.
std::string ReportCsv(const AnalysisReport& report);
// scheme,metric_a,metric_b,phi
std::string HeatmapCsv(const AnalysisReport& report);

}  // namespace fedtrust::analysis

#endif  // FEDTRUST_ANALYSIS_ANALYSIS_HPP_
