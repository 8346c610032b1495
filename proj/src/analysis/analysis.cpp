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

#include "analysis/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "common/error.hpp"
#include "common/text.hpp"
#include "json.hpp"

namespace fedtrust::analysis {
namespace {

void CheckSameLength(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    ThrowInput("score vectors differ in length (" + std::to_string(a.size()) +
               " vs " + std::to_string(b.size()) + ")");
  }
}

// Shifted-data formula over sorted values: exact zero for constant input
// and independent of input order.
double PopulationVariance(std::span<const double> v) {
  std::vector<double> x(v.begin(), v.end());
  std::sort(x.begin(), x.end());
  const double shift = x.front();
  double s = 0.0, s2 = 0.0;
  for (double e : x) {
    s += e - shift;
    s2 += (e - shift) * (e - shift);
  }
  const double n = static_cast<double>(x.size());
  return std::max(0.0, (s2 - s * s / n) / n);
}

std::vector<double> TotalsVector(
    const std::map<valuation::TotalKey, double>& totals, Scheme s, Metric m,
    size_t clients) {
  std::vector<double> v(clients, 0.0);
  for (size_t k = 0; k < clients; ++k) {
    auto it = totals.find({s, m, k});
    if (it == totals.end()) ThrowData("scores missing for a client");
    v[k] = it->second;
  }
  return v;
}

}  // namespace

std::vector<double> AverageRanks(std::span<const double> v) {
  std::vector<size_t> order(v.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  size_t i = 0;
  while (i < order.size()) {
    size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double rank = (static_cast<double>(i + j) / 2.0) + 1.0;
    for (size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
    i = j + 1;
  }
  return ranks;
}

SpearmanResult Spearman(std::span<const double> a, std::span<const double> b) {
  CheckSameLength(a, b);
  if (a.size() < 2) ThrowInput("spearman needs at least two entries");
  const auto ra = AverageRanks(a);
  const auto rb = AverageRanks(b);
  const double n = static_cast<double>(ra.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return {0.0, true};
  return {std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0), false};
}

double Rmse(std::span<const double> a, std::span<const double> b) {
  CheckSameLength(a, b);
  if (a.empty()) ThrowInput("rmse of empty vectors");
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(acc / static_cast<double>(a.size()));
}

std::map<std::pair<Scheme, Metric>, double> PerRoundVariance(
    const valuation::ScoreTable& table) {
  const size_t last = table.max_round();
  if (last < valuation::kFirstScoredRound + 1) {
    ThrowInput("per-round variance needs at least two scored rounds");
  }
  std::map<std::pair<Scheme, Metric>, std::map<size_t, std::vector<double>>>
      series;
  for (const auto& [key, value] : table.entries()) {
    if (key.round < valuation::kFirstScoredRound) continue;
    series[{key.scheme, key.metric}][key.client].push_back(value);
  }
  std::map<std::pair<Scheme, Metric>, double> out;
  for (const auto& [sm, clients] : series) {
    double acc = 0.0;
    for (const auto& [_, rounds] : clients) {
      if (rounds.size() < 2) {
        ThrowInput("per-round variance needs at least two scored rounds");
      }
      acc += PopulationVariance(rounds);
    }
    out[sm] = acc / static_cast<double>(clients.size());
  }
  return out;
}

MeanStd Aggregate(std::span<const double> per_fold) {
  if (per_fold.empty()) return {};
  const double n = static_cast<double>(per_fold.size());
  const double mean = std::accumulate(per_fold.begin(), per_fold.end(), 0.0) / n;
  return {mean, std::sqrt(PopulationVariance(per_fold))};
}

AnalysisReport BuildReport(const std::vector<valuation::ScoreTable>& folds) {
  if (folds.empty()) ThrowInput("report needs at least one fold");
  std::set<Scheme> schemes;
  std::set<Metric> metric_set;
  for (const auto& t : folds) {
    for (const auto& [key, _] : t.entries()) {
      schemes.insert(key.scheme);
      metric_set.insert(key.metric);
    }
  }
  AnalysisReport report;
  report.folds = folds.size();

  std::vector<std::map<valuation::TotalKey, double>> totals;
  std::vector<std::map<std::pair<Scheme, Metric>, double>> variances;
  // Round fluctuation needs two scored rounds; shorter runs omit it.
  const bool with_variance = std::all_of(
      folds.begin(), folds.end(), [](const valuation::ScoreTable& t) {
        return t.max_round() > valuation::kFirstScoredRound;
      });
  for (const auto& t : folds) {
    totals.push_back(valuation::Accumulate(t, t.max_round()));
    if (with_variance) variances.push_back(PerRoundVariance(t));
  }

  for (Scheme s : schemes) {
    // Trust metrics against perf.
    if (metric_set.count(Metric::kPerf)) {
      for (Metric m : metric_set) {
        if (m == Metric::kPerf) continue;
        PerfComparison row{s, m, {}, {}, {}, {}, 0};
        for (size_t f = 0; f < folds.size(); ++f) {
          const size_t k = folds[f].client_count();
          const auto perf = TotalsVector(totals[f], s, Metric::kPerf, k);
          const auto other = TotalsVector(totals[f], s, m, k);
          const auto sp = Spearman(perf, other);
          row.phi_per_fold.push_back(sp.phi);
          row.degenerate_folds += sp.degenerate;
          row.l2_per_fold.push_back(Rmse(perf, other));
        }
        row.phi = Aggregate(row.phi_per_fold);
        row.l2 = Aggregate(row.l2_per_fold);
        report.comparisons.push_back(std::move(row));
      }
    }
    for (Metric a : metric_set) {
      for (Metric b : metric_set) {
        std::vector<double> phis;
        for (size_t f = 0; f < folds.size(); ++f) {
          const size_t k = folds[f].client_count();
          phis.push_back(Spearman(TotalsVector(totals[f], s, a, k),
                                  TotalsVector(totals[f], s, b, k))
                             .phi);
        }
        // A vector always ranks identically to itself, even when constant.
        if (a == b) std::fill(phis.begin(), phis.end(), 1.0);
        report.heatmap.push_back({s, a, b, Aggregate(phis)});
      }
    }
    for (Metric m : metric_set) {
      if (!with_variance) break;
      std::vector<double> vs;
      for (const auto& v : variances) vs.push_back(v.at({s, m}));
      report.variance.push_back({s, m, Aggregate(vs)});
    }
  }
  return report;
}

std::string ReportJson(const AnalysisReport& report) {
  using nlohmann::json;
  auto ms = [](const MeanStd& x) { return json{{"mean", x.mean}, {"std", x.std}}; };
  json j;
  j["folds"] = report.folds;
  j["metadata"] = {
      {"variance", "population variance over rounds 2..T, mean over clients"},
      {"fold_aggregation", "mean and population std of per-fold values"},
      {"degenerate_spearman", "constant score vector; phi defined as 0"}};
  json comps = json::array();
  for (const auto& c : report.comparisons) {
    comps.push_back({{"scheme", valuation::SchemeName(c.scheme)},
                     {"metric", metrics::MetricName(c.metric)},
                     {"phi", ms(c.phi)},
                     {"l2", ms(c.l2)},
                     {"phi_per_fold", c.phi_per_fold},
                     {"l2_per_fold", c.l2_per_fold},
                     {"degenerate_folds", c.degenerate_folds}});
  }
  j["perf_comparison"] = comps;
  json heat = json::array();
  for (const auto& h : report.heatmap) {
    heat.push_back({{"scheme", valuation::SchemeName(h.scheme)},
                    {"metric_a", metrics::MetricName(h.a)},
                    {"metric_b", metrics::MetricName(h.b)},
                    {"phi", ms(h.phi)}});
  }
  j["heatmap"] = heat;
  json var = json::array();
  for (const auto& v : report.variance) {
    var.push_back({{"scheme", valuation::SchemeName(v.scheme)},
                   {"metric", metrics::MetricName(v.metric)},
                   {"variance", ms(v.variance)}});
  }
  j["round_variance"] = var;
  return j.dump(2) + "\n";
}

std::string ReportCsv(const AnalysisReport& report) {
  std::string out = "setting,metric,phi,phi_std,l2,l2_std\n";
  for (const auto& c : report.comparisons) {
    const bool absent = c.degenerate_folds == report.folds;
    out += valuation::SchemeName(c.scheme);
    out += ',';
    out += metrics::MetricName(c.metric);
    out += ',';
    out += absent ? "—" : FormatDouble17(c.phi.mean);
    out += ',';
    out += absent ? "—" : FormatDouble17(c.phi.std);
    out += ',';
    out += FormatDouble17(c.l2.mean);
    out += ',';
    out += FormatDouble17(c.l2.std);
    out += '\n';
  }
  return out;
}

std::string HeatmapCsv(const AnalysisReport& report) {
  std::string out = "scheme,metric_a,metric_b,phi\n";
  for (const auto& h : report.heatmap) {
    out += valuation::SchemeName(h.scheme);
    out += ',';
    out += metrics::MetricName(h.a);
    out += ',';
    out += metrics::MetricName(h.b);
    out += ',';
    out += FormatDouble17(h.phi.mean);
    out += '\n';
  }
  return out;
}

}  // namespace fedtrust::analysis
