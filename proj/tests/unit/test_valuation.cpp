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
#include <map>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "common/error.hpp"
#include "common/random.hpp"
#include "federation/federation.hpp"
#include "valuation/valuation.hpp"

namespace fedtrust::valuation {
namespace {

using federation::ClientUpdate;
using federation::RoundRecord;
using nn::Architecture;
using nn::ModelParams;
using nn::OutputActivation;

// Shapley value by the subset formula:
//   SV(k) = sum_{S not containing k} |S|! (K-|S|-1)! / K! (v(S+k) - v(S)).
std::vector<double> SubsetShapley(size_t k, const UtilityFn& v) {
  std::vector<double> fact(k + 1, 1.0);
  for (size_t i = 1; i <= k; ++i) fact[i] = fact[i - 1] * static_cast<double>(i);
  std::vector<double> out(k, 0.0);
  for (size_t c = 0; c < k; ++c) {
    for (Coalition s = 0; s < (Coalition{1} << k); ++s) {
      if (s & (Coalition{1} << c)) continue;
      const size_t n = static_cast<size_t>(__builtin_popcountll(s));
      const double w = fact[n] * fact[k - n - 1] / fact[k];
      out[c] += w * (v(s | (Coalition{1} << c)) - v(s));
    }
  }
  return out;
}

UtilityFn TableGame(std::vector<double> values) {
  return [values](Coalition c) { return values.at(c); };
}

UtilityFn RandomGame(size_t k, uint64_t seed) {
  Rng rng(seed);
  std::vector<double> values(size_t{1} << k);
  for (double& x : values) x = rng.Uniform();
  return TableGame(values);
}

// v(empty)=0, v({1})=0.3, v({2})=0.1, v({1,2})=0.5.
UtilityFn TwoClientToy() { return TableGame({0.0, 0.3, 0.1, 0.5}); }

UtilityFn Additive(std::vector<double> c) {
  return [c](Coalition s) {
    double t = 0;
    for (size_t i = 0; i < c.size(); ++i) {
      if (s & (Coalition{1} << i)) t += c[i];
    }
    return t;
  };
}

ValuationConfig FullGtg() {
  ValuationConfig cfg;
  cfg.eps1 = 0.0;
  cfg.eps2 = 1.0;
  cfg.eps3 = 0.0;
  return cfg;
}

TEST(Exact, TwoClientToy) {
  const auto sv = ExactShapley(2, TwoClientToy());
  EXPECT_NEAR(sv[0], 0.35, 1e-15);
  EXPECT_NEAR(sv[1], 0.15, 1e-15);
}

TEST(Exact, AdditiveGameReturnsWeights) {
  const std::vector<double> c = {0.25, -0.5, 0.125, 1.0};
  const auto sv = ExactShapley(4, Additive(c));
  for (size_t i = 0; i < 4; ++i) EXPECT_NEAR(sv[i], c[i], 1e-15);
}

TEST(Exact, MatchesSubsetFormulaAndEfficiency) {
  for (size_t k = 1; k <= 6; ++k) {
    for (uint64_t seed = 0; seed < 10; ++seed) {
      const auto v = RandomGame(k, seed * 31 + k);
      const auto sv = ExactShapley(k, v);
      const auto oracle = SubsetShapley(k, v);
      double sum = 0;
      for (size_t i = 0; i < k; ++i) {
        EXPECT_NEAR(sv[i], oracle[i], 1e-12);
        sum += sv[i];
      }
      EXPECT_NEAR(sum, v(FullCoalition(k)) - v(0), 1e-12);
    }
  }
}

TEST(Exact, TooManyClientsIsConfigError) {
  try {
    ExactShapley(13, [](Coalition) { return 0.0; });
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfig);
  }
}

TEST(Loo, TwoClientToy) {
  const auto loo = LeaveOneOut(2, TwoClientToy());
  EXPECT_NEAR(loo[0], 0.4, 1e-15);
  EXPECT_NEAR(loo[1], 0.2, 1e-15);
  // No efficiency: 0.6 against a grand-coalition gain of 0.5.
  EXPECT_GT(std::abs(loo[0] + loo[1] - 0.5), 0.09);
}

TEST(Gtg, BudgetFormula) {
  ValuationConfig cfg;
  EXPECT_EQ(GtgPermutationBudget(4, cfg), 4u);  // max(4, ceil(1.2))
  EXPECT_EQ(GtgPermutationBudget(2, cfg), 2u);
  EXPECT_EQ(GtgPermutationBudget(5, cfg), 6u);  // ceil(0.05 * 120)
  cfg.eps2 = 1.0;
  EXPECT_EQ(GtgPermutationBudget(4, cfg), 24u);
  EXPECT_EQ(GtgPermutationBudget(10, cfg), 2000u);
  cfg.max_permutations = 1003;
  EXPECT_EQ(GtgPermutationBudget(10, cfg), 1000u);
}

TEST(Gtg, BalancedLeadersAndDeterministicShuffles) {
  ValuationConfig cfg;
  cfg.perm_seed = 17;
  const auto perms = GtgPermutations(4, 3, cfg);
  ASSERT_EQ(perms.size(), 4u);
  for (size_t r = 0; r < 4; ++r) {
    EXPECT_EQ(perms[r][0], r);
    std::vector<size_t> sorted = perms[r];
    std::sort(sorted.begin(), sorted.end());
    EXPECT_EQ(sorted, (std::vector<size_t>{0, 1, 2, 3}));
  }
  EXPECT_EQ(perms, GtgPermutations(4, 3, cfg));
  cfg.max_permutations = 40;
  cfg.eps2 = 0.5;
  const auto many = GtgPermutations(5, 3, cfg);
  ASSERT_EQ(many.size(), 40u);
  std::vector<size_t> leads(5, 0);
  for (const auto& p : many) ++leads[p[0]];
  for (size_t c : leads) EXPECT_EQ(c, 8u);
}

TEST(Gtg, FullEnumerationEqualsExact) {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const auto v = RandomGame(4, seed);
    const auto exact = ExactShapley(4, v);
    const auto gtg = GtgShapley(4, 2, v, FullGtg());
    for (size_t i = 0; i < 4; ++i) {
      EXPECT_NEAR(gtg[i], exact[i], 1e-12);
      EXPECT_EQ(gtg[i], exact[i]);
    }
  }
}

TEST(Gtg, HugeEps1SkipsRound) {
  ValuationConfig cfg;
  cfg.eps1 = 2.0;
  GtgStats stats;
  const auto s = GtgShapley(4, 5, RandomGame(4, 1), cfg, &stats);
  EXPECT_TRUE(stats.round_skipped);
  for (double x : s) EXPECT_EQ(x, 0.0);
}

TEST(Gtg, PrefixTruncationZeroesTail) {
  // Once any client has joined the utility is within eps3 of v(all), so
  // every later position is truncated.
  const UtilityFn v = [](Coalition c) { return c == 0 ? 0.0 : 1.0; };
  ValuationConfig cfg = FullGtg();
  cfg.eps3 = 1e-6;
  GtgStats stats;
  const auto s = GtgShapley(3, 2, v, cfg, &stats);
  EXPECT_EQ(stats.truncated_positions, 6u * 2u);
  for (double x : s) EXPECT_NEAR(x, 1.0 / 3.0, 1e-15);
}

TEST(Gtg, MarginalSizeRuleDropsSmallMarginals) {
  // Client 2 adds 0.001 everywhere; below eps3 it is zeroed.
  const UtilityFn v = Additive({0.5, 0.25, 0.001});
  ValuationConfig cfg = FullGtg();
  cfg.eps3 = 0.002;
  cfg.truncation = TruncationRule::kMarginalSize;
  const auto s = GtgShapley(3, 2, v, cfg);
  EXPECT_NEAR(s[0], 0.5, 1e-15);
  EXPECT_NEAR(s[1], 0.25, 1e-15);
  EXPECT_EQ(s[2], 0.0);
}

TEST(Schemes, AgreeOnRankingForAdditiveGame) {
  const UtilityFn v = Additive({0.1, 0.4, 0.2, 0.3});
  const auto order = [](const std::vector<double>& s) {
    std::vector<size_t> idx = {0, 1, 2, 3};
    std::sort(idx.begin(), idx.end(),
              [&](size_t a, size_t b) { return s[a] > s[b]; });
    return idx;
  };
  const auto want = order(ExactShapley(4, v));
  EXPECT_EQ(order(GtgShapley(4, 2, v, FullGtg())), want);
  EXPECT_EQ(order(LeaveOneOut(4, v)), want);
}

TEST(Config, Validation) {
  ValuationConfig cfg;
  cfg.eps2 = 0.0;
  EXPECT_THROW(cfg.Validate(), Error);
  cfg = ValuationConfig{};
  cfg.eps2 = 1.5;
  EXPECT_THROW(cfg.Validate(), Error);
  cfg = ValuationConfig{};
  cfg.eps1 = -1;
  EXPECT_THROW(cfg.Validate(), Error);
  cfg = ValuationConfig{};
  cfg.eps3 = -1;
  EXPECT_THROW(cfg.Validate(), Error);
}

// A record whose parameter vectors are 1-d: the "model" is its single
// value, and the evaluator reads metric values straight from it.
const Architecture kScalar{{1, 1}, OutputActivation::kSigmoid};

RoundRecord ScalarRecord(std::vector<double> client_values,
                         std::vector<size_t> counts, double base) {
  RoundRecord r{2, ModelParams(kScalar, {base, 0.0}), {},
                ModelParams(kScalar, {base, 0.0})};
  for (size_t k = 0; k < client_values.size(); ++k) {
    r.updates.push_back(ClientUpdate{k, 2,
                                     ModelParams(kScalar, {client_values[k], 0.0}),
                                     counts[k], 0});
  }
  r.global_after = federation::FedAvg(r.global_before, r.updates);
  return r;
}

double FirstValue(Metric, const ModelParams& p) { return p.values()[0]; }

TEST(Game, EmptyAndFullCoalitions) {
  const auto rec = ScalarRecord({0.2, 0.6, 0.4}, {1, 1, 2}, 0.9);
  UtilityCache cache;
  CoalitionGame game(rec, FirstValue, &cache);
  EXPECT_EQ(game.Utility(0, Metric::kPerf), 0.9);
  EXPECT_EQ(game.Utility(FullCoalition(3), Metric::kPerf),
            rec.global_after.values()[0]);
  EXPECT_DOUBLE_EQ(game.Utility(0b011, Metric::kPerf), 0.4);
  try {
    game.Utility(0b1000, Metric::kPerf);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInput);
  }
}

TEST(Game, CacheHitsAreBitIdenticalAndCounted) {
  const auto rec = ScalarRecord({0.2, 0.6, 0.4}, {1, 1, 2}, 0.9);
  UtilityCache cache;
  CoalitionGame game(rec, FirstValue, &cache);
  const double a = game.Utility(0b101, Metric::kFair);
  const double b = game.Utility(0b101, Metric::kFair);
  EXPECT_EQ(a, b);
  EXPECT_EQ(game.evaluations(), 1u);
  game.Utility(0b101, Metric::kRel);
  EXPECT_EQ(game.evaluations(), 2u);
  EXPECT_EQ(cache.evaluations(), 2u);
}

TEST(Game, CachingNeverChangesScores) {
  const auto rec = ScalarRecord({0.1, 0.7, 0.3, 0.5}, {3, 1, 4, 1}, 0.2);
  UtilityCache cache;
  CoalitionGame cached(rec, FirstValue, &cache);
  CoalitionGame uncached(rec, FirstValue, nullptr);
  EXPECT_EQ(ExactShapleyRound(cached, Metric::kPerf),
            ExactShapleyRound(uncached, Metric::kPerf));
  EXPECT_EQ(LooRound(cached, Metric::kPerf), LooRound(uncached, Metric::kPerf));
  EXPECT_EQ(cached.evaluations(), 16u);
  EXPECT_GT(uncached.evaluations(), 16u);
}

TEST(Game, UndefinedMetricFallsBackToEmptyCoalition) {
  const auto rec = ScalarRecord({0.2, 0.6}, {1, 1}, 0.9);
  const CoalitionGame::Evaluator eval = [](Metric, const ModelParams& p) {
    if (p.values()[0] < 0.3) ThrowMetricUndefined("no correct samples");
    return p.values()[0];
  };
  CoalitionGame game(rec, eval, nullptr);
  EXPECT_EQ(game.Utility(0b01, Metric::kRes), 0.9);
  EXPECT_EQ(game.Utility(0b10, Metric::kRes), 0.6);
}

TEST(Game, UndefinedEmptyCoalitionUsesZero) {
  const auto rec = ScalarRecord({0.2, 0.6}, {1, 1}, 0.1);
  const CoalitionGame::Evaluator eval = [](Metric, const ModelParams& p) {
    if (p.values()[0] < 0.3) ThrowMetricUndefined("no correct samples");
    return p.values()[0];
  };
  CoalitionGame game(rec, eval, nullptr);
  EXPECT_EQ(game.Utility(0, Metric::kRes), 0.0);
  EXPECT_EQ(game.Utility(0b01, Metric::kRes), 0.0);
}

TEST(Game, DuplicateClientsAreSymmetric) {
  const auto rec = ScalarRecord({0.3, 0.3, 0.8, 0.1}, {5, 5, 2, 7}, 0.4);
  const CoalitionGame::Evaluator eval = [](Metric, const ModelParams& p) {
    return std::sin(7 * p.values()[0]) * 0.5 + 0.5;
  };
  CoalitionGame game(rec, eval, nullptr);
  const auto sv = ExactShapleyRound(game, Metric::kPerf);
  EXPECT_NEAR(sv[0], sv[1], 1e-12);
}

TEST(Game, IdenticalUpdatesGiveZeroLoo) {
  const auto rec = ScalarRecord({0.3, 0.3, 0.3}, {2, 2, 2}, 0.9);
  CoalitionGame game(rec, FirstValue, nullptr);
  for (double x : LooRound(game, Metric::kPerf)) EXPECT_EQ(x, 0.0);
}

TEST(Game, DummyClientGetsZero) {
  // Client 2 duplicates the base model and the evaluator ignores the
  // parameters, so every coalition has the same utility.
  const auto rec = ScalarRecord({0.3, 0.7, 0.4}, {2, 2, 2}, 0.4);
  CoalitionGame game(rec, [](Metric, const ModelParams&) { return 0.6; },
                     nullptr);
  const auto sv = ExactShapleyRound(game, Metric::kPerf);
  EXPECT_NEAR(sv[2], 0.0, 1e-12);
}

TEST(ScoreTable, CsvRoundTripAndOrdering) {
  ScoreTable t;
  t.Set(Scheme::kLoo, Metric::kPerf, 0, 2, 0.5);
  t.Set(Scheme::kExactShapley, Metric::kRes, 1, 3, -0.25);
  t.Set(Scheme::kExactShapley, Metric::kRes, 1, 2, 0.1);
  t.Set(Scheme::kExactShapley, Metric::kPerf, 0, 1, 9.0);
  const std::string csv = t.ToCsv(2, 3);
  EXPECT_EQ(csv,
            "scheme,metric,client,round,value\n"
            "exact_shapley,res,1,2,0.10000000000000001\n"
            "exact_shapley,res,1,3,-0.25\n"
            "loo,perf,0,2,0.5\n");
  const auto back = ScoreTable::FromCsv(csv);
  EXPECT_EQ(back.Get(Scheme::kExactShapley, Metric::kRes, 1, 2), 0.1);
  EXPECT_EQ(back.entries().size(), 3u);
  EXPECT_THROW(ScoreTable::FromCsv("scheme,metric\nx,y\n"), Error);
}

TEST(Accumulate, SingleRoundAndZeros) {
  ScoreTable t;
  t.Set(Scheme::kGtg, Metric::kFair, 0, 1, 100.0);
  t.Set(Scheme::kGtg, Metric::kFair, 0, 2, 0.375);
  t.Set(Scheme::kGtg, Metric::kFair, 1, 1, 100.0);
  t.Set(Scheme::kGtg, Metric::kFair, 1, 2, 0.0);
  const auto totals = Accumulate(t, 2);
  EXPECT_EQ(totals.at({Scheme::kGtg, Metric::kFair, 0}), 0.375);
  EXPECT_EQ(totals.at({Scheme::kGtg, Metric::kFair, 1}), 0.0);
  EXPECT_EQ(TotalsToCsv(totals),
            "scheme,metric,client,value\ngtg,fair,0,0.375\ngtg,fair,1,0\n");
}

TEST(Accumulate, SumsRoundsTwoOnward) {
  ScoreTable t;
  Rng rng(1);
  std::map<size_t, double> want;
  for (size_t r = 1; r <= 10; ++r) {
    for (size_t k = 0; k < 4; ++k) {
      const double x = rng.Uniform(-1, 1);
      t.Set(Scheme::kExactShapley, Metric::kRel, k, r, x);
      if (r >= 2) want[k] += x;
    }
  }
  const auto totals = Accumulate(t, 10);
  for (size_t k = 0; k < 4; ++k) {
    EXPECT_EQ(totals.at({Scheme::kExactShapley, Metric::kRel, k}), want[k]);
  }
}

TEST(Accumulate, MissingRoundIsInputError) {
  ScoreTable t;
  t.Set(Scheme::kGtg, Metric::kFair, 0, 2, 0.1);
  t.Set(Scheme::kGtg, Metric::kFair, 0, 4, 0.1);
  try {
    Accumulate(t, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInput);
  }
}

}  // namespace
}  // namespace fedtrust::valuation
