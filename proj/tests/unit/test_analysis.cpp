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

#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "analysis/analysis.hpp"
#include "common/error.hpp"
#include "common/random.hpp"

namespace fedtrust::analysis {
namespace {

using valuation::ScoreTable;
using V = std::vector<double>;

// Pearson correlation of rank vectors computed by brute force: the rank of
// x_i is 1 + #{x_j < x_i} + (#{x_j == x_i} - 1) / 2.
double OracleSpearman(const V& a, const V& b) {
  auto ranks = [](const V& x) {
    V r(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
      double less = 0, equal = 0;
      for (double y : x) {
        less += y < x[i];
        equal += y == x[i];
      }
      r[i] = 1 + less + (equal - 1) / 2;
    }
    return r;
  };
  const V ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    ma += ra[i] / n;
    mb += rb[i] / n;
  }
  double sab = 0, saa = 0, sbb = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

double Phi(const V& a, const V& b) { return Spearman(a, b).phi; }

TEST(Ranks, AverageTies) {
  EXPECT_EQ(AverageRanks(V{10, 20, 20, 5}), (V{2, 3.5, 3.5, 1}));
}

TEST(Spearman, OrderOnlyMatters) {
  EXPECT_EQ(Phi({1, 2, 3}, {1, 2, 100}), 1.0);
}

TEST(Spearman, Reversal) { EXPECT_EQ(Phi({1, 2, 3}, {3, 2, 1}), -1.0); }

TEST(Spearman, TiesOnBothSides) {
  EXPECT_EQ(Phi({1, 2, 2, 4}, {1, 3, 3, 4}), 1.0);
}

TEST(Spearman, ConstantInputIsDegenerate) {
  const auto r = Spearman(V{1, 1, 1}, V{1, 2, 3});
  EXPECT_TRUE(r.degenerate);
  EXPECT_EQ(r.phi, 0.0);
}

TEST(Spearman, LengthErrors) {
  EXPECT_THROW(Spearman(V{1, 2}, V{1, 2, 3}), Error);
  EXPECT_THROW(Spearman(V{1}, V{1}), Error);
}

TEST(Spearman, MatchesOracleOnRandomVectorsWithTies) {
  Rng rng(21);
  for (int t = 0; t < 500; ++t) {
    const size_t n = 2 + rng.UniformInt(9);
    V a(n), b(n);
    for (size_t i = 0; i < n; ++i) {
      a[i] = static_cast<double>(rng.UniformInt(4));
      b[i] = rng.Uniform();
    }
    const auto r = Spearman(a, b);
    if (r.degenerate) continue;
    EXPECT_NEAR(r.phi, OracleSpearman(a, b), 1e-12);
    EXPECT_GE(r.phi, -1.0);
    EXPECT_LE(r.phi, 1.0);
    EXPECT_EQ(r.phi, Phi(b, a));
  }
}

TEST(Spearman, InvariantUnderMonotoneTransform) {
  Rng rng(5);
  for (int t = 0; t < 100; ++t) {
    V a(6), b(6), c(6);
    for (size_t i = 0; i < 6; ++i) {
      a[i] = rng.Uniform(-1, 1);
      b[i] = rng.Uniform(-1, 1);
      c[i] = std::exp(3 * a[i]) + 7;
    }
    EXPECT_NEAR(Phi(a, b), Phi(c, b), 1e-15);
  }
}

TEST(Rmse, Examples) {
  EXPECT_EQ(Rmse(V{1, 2, 3}, V{1, 2, 3}), 0.0);
  EXPECT_EQ(Rmse(V{0, 0}, V{3, 4}), std::sqrt(12.5));
  EXPECT_NEAR(Rmse(V{-2, 0}, V{6, 8}), 4 * Rmse(V{-0.5, 0}, V{1.5, 2}), 1e-15);
  EXPECT_THROW(Rmse(V{1}, V{1, 2}), Error);
}

TEST(Rmse, TriangleInequality) {
  Rng rng(8);
  for (int t = 0; t < 300; ++t) {
    V a(5), b(5), c(5);
    for (size_t i = 0; i < 5; ++i) {
      a[i] = rng.Uniform(-1, 1);
      b[i] = rng.Uniform(-1, 1);
      c[i] = rng.Uniform(-1, 1);
    }
    EXPECT_LE(Rmse(a, c), Rmse(a, b) + Rmse(b, c) + 1e-15);
  }
}

ScoreTable TableFrom(const std::vector<V>& per_client, Scheme s = Scheme::kGtg,
                     Metric m = Metric::kPerf) {
  ScoreTable t;
  for (size_t k = 0; k < per_client.size(); ++k) {
    for (size_t r = 0; r < per_client[k].size(); ++r) {
      t.Set(s, m, k, r + 2, per_client[k][r]);
    }
  }
  return t;
}

TEST(Variance, Examples) {
  const auto key = std::make_pair(Scheme::kGtg, Metric::kPerf);
  EXPECT_EQ(PerRoundVariance(TableFrom({{0.3, 0.3, 0.3}, {2, 2, 2}})).at(key),
            0.0);
  EXPECT_EQ(PerRoundVariance(TableFrom({{0, 0, 0, 0}, {1, -1, 1, -1}})).at(key),
            0.5);
  EXPECT_EQ(
      PerRoundVariance(TableFrom({{0.5, 0.25, 1, 0}, {3, 1, 2, 4}})).at(key),
      PerRoundVariance(TableFrom({{0, 1, 0.25, 0.5}, {4, 3, 2, 1}})).at(key));
}

TEST(Variance, SingleRoundIsInputError) {
  try {
    PerRoundVariance(TableFrom({{0.1}, {0.2}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInput);
  }
}

TEST(Aggregate, PopulationStd) {
  const auto m = Aggregate(V{1, 3});
  EXPECT_EQ(m.mean, 2.0);
  EXPECT_EQ(m.std, 1.0);
}

ScoreTable RandomFold(uint64_t seed, size_t rounds = 4) {
  Rng rng(seed);
  ScoreTable t;
  for (Scheme s : valuation::kAllSchemes) {
    for (Metric m : metrics::kAllMetrics) {
      for (size_t k = 0; k < 4; ++k) {
        for (size_t r = 2; r <= rounds; ++r) t.Set(s, m, k, r, rng.Uniform(-1, 1));
      }
    }
  }
  return t;
}

TEST(Report, IdenticalColumnsGivePhiOneAndZeroL2) {
  ScoreTable t;
  const V vals = {0.4, -0.1, 0.2, 0.9};
  for (size_t k = 0; k < 4; ++k) {
    for (size_t r = 2; r <= 3; ++r) {
      t.Set(Scheme::kGtg, Metric::kPerf, k, r, vals[k] * r);
      t.Set(Scheme::kGtg, Metric::kFair, k, r, vals[k] * r);
    }
  }
  const auto rep = BuildReport({t});
  ASSERT_EQ(rep.comparisons.size(), 1u);
  EXPECT_EQ(rep.comparisons[0].metric, Metric::kFair);
  EXPECT_EQ(rep.comparisons[0].phi.mean, 1.0);
  EXPECT_EQ(rep.comparisons[0].l2.mean, 0.0);
}

TEST(Report, HeatmapSymmetricWithUnitDiagonal) {
  const auto rep = BuildReport({RandomFold(1), RandomFold(2)});
  std::map<std::tuple<Scheme, Metric, Metric>, double> cell;
  for (const auto& h : rep.heatmap) cell[{h.scheme, h.a, h.b}] = h.phi.mean;
  EXPECT_EQ(cell.size(), 3u * 16u);
  for (const auto& [k, v] : cell) {
    const auto [s, a, b] = k;
    if (a == b) {
      EXPECT_EQ(v, 1.0);
    }
    EXPECT_EQ(v, (cell.at({s, b, a})));
    EXPECT_GE(v, -1.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Report, FoldMeanIsMeanOfPerFoldPhi) {
  std::vector<ScoreTable> folds;
  for (uint64_t s = 0; s < 5; ++s) folds.push_back(RandomFold(100 + s));
  const auto rep = BuildReport(folds);
  EXPECT_EQ(rep.folds, 5u);
  ASSERT_EQ(rep.comparisons.size(), 9u);
  for (const auto& c : rep.comparisons) {
    double sum = 0;
    for (const auto& t : folds) {
      const auto totals = valuation::Accumulate(t, 4);
      V perf, other;
      for (size_t k = 0; k < 4; ++k) {
        perf.push_back(totals.at({c.scheme, Metric::kPerf, k}));
        other.push_back(totals.at({c.scheme, c.metric, k}));
      }
      sum += Spearman(perf, other).phi;
    }
    EXPECT_NEAR(c.phi.mean, sum / 5.0, 1e-15);
  }
  EXPECT_EQ(rep.variance.size(), 12u);
}

TEST(Report, DegenerateColumnRendersDash) {
  ScoreTable t;
  const V vals = {0.4, -0.1, 0.2, 0.9};
  for (size_t k = 0; k < 4; ++k) {
    t.Set(Scheme::kLoo, Metric::kPerf, k, 2, vals[k]);
    t.Set(Scheme::kLoo, Metric::kRel, k, 2, 0.0);
  }
  const auto csv = ReportCsv(BuildReport({t}));
  EXPECT_NE(csv.find("loo,rel,\xE2\x80\x94,\xE2\x80\x94,"), std::string::npos)
      << csv;
  EXPECT_EQ(csv.rfind("setting,metric,phi,phi_std,l2,l2_std\n", 0), 0u);
}

TEST(Report, OutputsAreDeterministic) {
  const auto a = BuildReport({RandomFold(3)});
  const auto b = BuildReport({RandomFold(3)});
  EXPECT_EQ(ReportJson(a), ReportJson(b));
  EXPECT_EQ(HeatmapCsv(a), HeatmapCsv(b));
  EXPECT_EQ(HeatmapCsv(a).rfind("scheme,metric_a,metric_b,phi\n", 0), 0u);
}

}  // namespace
}  // namespace fedtrust::analysis
