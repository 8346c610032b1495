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

#ifndef FEDTRUST_VALUATION_VALUATION_HPP_
#define FEDTRUST_VALUATION_VALUATION_HPP_

#include <array>
#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <tuple>
#include <vector>

#include "data/dataset.hpp"
#include "federation/federation.hpp"
#include "metrics/trust_metrics.hpp"

namespace fedtrust::valuation {

using metrics::Metric;

enum class Scheme { kExactShapley = 0, kGtg = 1, kLoo = 2 };

inline constexpr std::array<Scheme, 3> kAllSchemes = {
    Scheme::kExactShapley, Scheme::kGtg, Scheme::kLoo};

const char* SchemeName(Scheme s);
Scheme ParseScheme(const std::string& name);

// How GTG truncates inside a sampled permutation.
//  kPrefixDistance: stop once |v(all) - v(prefix)| < eps3; the remaining
//                   clients get marginal 0 and are never evaluated.
//  kMarginalSize:   evaluate every marginal, zero those with |m| < eps3.
enum class TruncationRule { kPrefixDistance, kMarginalSize };

const char* TruncationRuleName(TruncationRule r);
TruncationRule ParseTruncationRule(const std::string& name);

struct ValuationConfig {
  double eps1 = 0.001;  // round skip threshold
  double eps2 = 0.05;   // fraction of the K! permutations sampled
  double eps3 = 0.002;  // within-permutation truncation threshold
  uint64_t perm_seed = 0;
  TruncationRule truncation = TruncationRule::kPrefixDistance;
  // Hard cap on sampled permutations (rounded down to a multiple of K), so
  // eps2 * K! stays tractable for larger federations.
  size_t max_permutations = 2000;

  void Validate() const;
};

// Client subset as a bit mask (bit k = client k).
using Coalition = uint64_t;

inline constexpr size_t kMaxClients = 63;

Coalition FullCoalition(size_t k);

// Memo of coalition utilities keyed by (round, coalition, metric). Safe for
// concurrent use; a key computed twice concurrently keeps the first value
// (both are bit-identical because evaluation is deterministic).
class UtilityCache {
 public:
  bool Lookup(size_t round, Coalition c, Metric m, double* out) const;
  // Returns true when this call inserted the value.
  bool Insert(size_t round, Coalition c, Metric m, double value);

  size_t size() const;
  // Number of utility computations performed through games using this cache.
  size_t evaluations() const { return evaluations_.load(); }
  void CountEvaluation() { ++evaluations_; }

 private:
  mutable std::mutex mu_;
  std::map<std::tuple<size_t, Coalition, int>, double> values_;
  std::atomic<size_t> evaluations_{0};
};

// Utility function v over the client coalitions of one round: v(S) is the
// metric of fedavg(global_before, updates of S) on the test set, with
// v(empty) = metric of global_before. A metric that is undefined for a
// coalition model falls back to v(empty) with a warning.
class CoalitionGame {
 public:
  using Evaluator =
      std::function<double(Metric, const nn::ModelParams&)>;

  // Evaluates with metrics::Evaluate on `test`.
  CoalitionGame(const federation::RoundRecord& record,
                const data::Dataset& test, const metrics::MetricConfig& cfg,
                UtilityCache* cache);

  // Custom evaluator (tests, synthetic games).
  CoalitionGame(const federation::RoundRecord& record, Evaluator evaluator,
                UtilityCache* cache);

  size_t client_count() const { return record_.updates.size(); }
  size_t round() const { return record_.round; }

  double Utility(Coalition c, Metric m);

  // Computations done by this game (cache hits excluded).
  size_t evaluations() const { return evaluations_; }

 private:
  double Compute(Coalition c, Metric m);

  const federation::RoundRecord& record_;
  Evaluator evaluator_;
  UtilityCache* cache_;
  size_t evaluations_ = 0;
};

// Abstract cooperative game used by the scoring routines, so they can be
// driven by coalition models or by plain utility tables.
using UtilityFn = std::function<double(Coalition)>;

// Exact Shapley values by enumerating all K! permutations in
// lexicographic order. K <= 12.
std::vector<double> ExactShapley(size_t k, const UtilityFn& v);

struct GtgStats {
  bool round_skipped = false;
  size_t permutations = 0;
  size_t truncated_positions = 0;
};

// Number of permutations GTG samples: max(K, ceil(eps2 * K!)), capped at
// K! and at cfg.max_permutations.
size_t GtgPermutationBudget(size_t k, const ValuationConfig& cfg);

// The permutations GTG scans for a round. When the budget reaches K! all
// permutations are used in lexicographic order; otherwise permutation r is
// led by client r mod K with the rest shuffled by
// DeriveSeed(perm_seed, {round, r}).
std::vector<std::vector<size_t>> GtgPermutations(size_t k, size_t round,
                                                 const ValuationConfig& cfg);

std::vector<double> GtgShapley(size_t k, size_t round, const UtilityFn& v,
                               const ValuationConfig& cfg,
                               GtgStats* stats = nullptr);

// v(all) - v(all \ {k}).
std::vector<double> LeaveOneOut(size_t k, const UtilityFn& v);

std::vector<double> ExactShapleyRound(CoalitionGame& game, Metric m);
std::vector<double> GtgShapleyRound(CoalitionGame& game, Metric m,
                                    const ValuationConfig& cfg,
                                    GtgStats* stats = nullptr);
std::vector<double> LooRound(CoalitionGame& game, Metric m);

// Per-round scores indexed by (scheme, metric, client, round).
struct ScoreKey {
  Scheme scheme;
  Metric metric;
  size_t client;
  size_t round;
  auto operator<=>(const ScoreKey&) const = default;
};

struct TotalKey {
  Scheme scheme;
  Metric metric;
  size_t client;
  auto operator<=>(const TotalKey&) const = default;
};

class ScoreTable {
 public:
  void Set(Scheme s, Metric m, size_t client, size_t round, double value);
  double Get(Scheme s, Metric m, size_t client, size_t round) const;
  bool Has(Scheme s, Metric m, size_t client, size_t round) const;

  const std::map<ScoreKey, double>& entries() const { return entries_; }
  size_t max_round() const;
  size_t client_count() const;

  // CSV with header scheme,metric,client,round,value, rows in key order,
  // restricted to rounds in [min_round, max_round].
  std::string ToCsv(size_t min_round, size_t max_round) const;
  static ScoreTable FromCsv(const std::string& text);

 private:
  std::map<ScoreKey, double> entries_;
};

// First round that counts towards accumulated scores.
inline constexpr size_t kFirstScoredRound = 2;

// CS(k) = sum over rounds 2..last_round. Every (scheme, metric, client)
// present in the table must have all of those rounds.
std::map<TotalKey, double> Accumulate(const ScoreTable& table,
                                      size_t last_round);

// CSV with header scheme,metric,client,value.
std::string TotalsToCsv(const std::map<TotalKey, double>& totals);

// Scores one round for every requested scheme and metric.
struct RoundValuationOptions {
  std::vector<Scheme> schemes = {kAllSchemes.begin(), kAllSchemes.end()};
  std::vector<Metric> metrics = {metrics::kAllMetrics.begin(),
                                 metrics::kAllMetrics.end()};
  ValuationConfig gtg;
  size_t threads = 1;
};

void ValueRound(const federation::RoundRecord& record,
                const data::Dataset& test, const metrics::MetricConfig& cfg,
                const RoundValuationOptions& options, UtilityCache* cache,
                ScoreTable* table);

}  // namespace fedtrust::valuation

#endif  // FEDTRUST_VALUATION_VALUATION_HPP_
