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

#include "valuation/valuation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <set>

#include "common/error.hpp"
#include "common/log.hpp"
#include "common/parallel.hpp"
#include "common/random.hpp"
#include "common/text.hpp"

namespace fedtrust::valuation {
namespace {

double Factorial(size_t k) {
  double f = 1.0;
  for (size_t i = 2; i <= k; ++i) f *= static_cast<double>(i);
  return f;
}

void CheckClientCount(size_t k) {
  if (k == 0) ThrowInput("game needs at least one client");
  if (k > kMaxClients) ThrowConfig("too many clients for coalition masks");
}

// Sums marginal contributions along each permutation. Shared by the exact
// and GTG routes so that full enumeration is bit-identical in both.
struct PermutationScan {
  double v_full;
  double eps3;
  TruncationRule rule;
  bool truncate;
};

void ScanPermutation(const std::vector<size_t>& perm, double v_empty,
                     const UtilityFn& v, const PermutationScan& scan,
                     std::vector<double>* sums, size_t* truncated) {
  Coalition prefix = 0;
  double v_prefix = v_empty;
  for (size_t j = 0; j < perm.size(); ++j) {
    if (scan.truncate && scan.rule == TruncationRule::kPrefixDistance &&
        std::fabs(scan.v_full - v_prefix) < scan.eps3) {
      if (truncated != nullptr) *truncated += perm.size() - j;
      return;
    }
    const Coalition next = prefix | (Coalition{1} << perm[j]);
    const double v_next = v(next);
    double marginal = v_next - v_prefix;
    if (scan.truncate && scan.rule == TruncationRule::kMarginalSize &&
        std::fabs(marginal) < scan.eps3) {
      marginal = 0.0;
    }
    (*sums)[perm[j]] += marginal;
    prefix = next;
    v_prefix = v_next;
  }
}

}  // namespace

const char* SchemeName(Scheme s) {
  switch (s) {
    case Scheme::kExactShapley:
      return "exact_shapley";
    case Scheme::kGtg:
      return "gtg";
    case Scheme::kLoo:
      return "loo";
  }
  return "?";
}

Scheme ParseScheme(const std::string& name) {
  for (Scheme s : kAllSchemes) {
    if (name == SchemeName(s)) return s;
  }
  ThrowConfig("unknown valuation scheme '" + name + "'");
}

const char* TruncationRuleName(TruncationRule r) {
  return r == TruncationRule::kMarginalSize ? "marginal_size"
                                            : "prefix_distance";
}

TruncationRule ParseTruncationRule(const std::string& name) {
  if (name == "prefix_distance") return TruncationRule::kPrefixDistance;
  if (name == "marginal_size") return TruncationRule::kMarginalSize;
  ThrowConfig("unknown truncation rule '" + name + "'");
}

void ValuationConfig::Validate() const {
  if (!(eps1 >= 0.0)) ThrowConfig("eps1 must be >= 0");
  if (!(eps2 > 0.0 && eps2 <= 1.0)) ThrowConfig("eps2 must lie in (0, 1]");
  if (!(eps3 >= 0.0)) ThrowConfig("eps3 must be >= 0");
  if (max_permutations == 0) ThrowConfig("max_permutations must be positive");
}

Coalition FullCoalition(size_t k) {
  CheckClientCount(k);
  return k == 64 ? ~Coalition{0} : (Coalition{1} << k) - 1;
}

bool UtilityCache::Lookup(size_t round, Coalition c, Metric m,
                          double* out) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = values_.find({round, c, static_cast<int>(m)});
  if (it == values_.end()) return false;
  *out = it->second;
  return true;
}

bool UtilityCache::Insert(size_t round, Coalition c, Metric m, double value) {
  std::lock_guard<std::mutex> lock(mu_);
  return values_.emplace(std::make_tuple(round, c, static_cast<int>(m)), value)
      .second;
}

size_t UtilityCache::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return values_.size();
}

CoalitionGame::CoalitionGame(const federation::RoundRecord& record,
                             const data::Dataset& test,
                             const metrics::MetricConfig& cfg,
                             UtilityCache* cache)
    : CoalitionGame(
          record,
          [&test, cfg](Metric m, const nn::ModelParams& model) {
            return metrics::Evaluate(m, model, test, cfg);
          },
          cache) {}

CoalitionGame::CoalitionGame(const federation::RoundRecord& record,
                             Evaluator evaluator, UtilityCache* cache)
    : record_(record), evaluator_(std::move(evaluator)), cache_(cache) {
  CheckClientCount(record_.updates.size());
}

double CoalitionGame::Utility(Coalition c, Metric m) {
  if ((c & ~FullCoalition(client_count())) != 0) {
    ThrowInput("coalition names a client outside this round");
  }
  double value = 0.0;
  if (cache_ != nullptr && cache_->Lookup(record_.round, c, m, &value)) {
    return value;
  }
  value = Compute(c, m);
  if (cache_ != nullptr) {
    cache_->Insert(record_.round, c, m, value);
    // A concurrent writer may have won; its value is identical.
    cache_->Lookup(record_.round, c, m, &value);
  }
  return value;
}

double CoalitionGame::Compute(Coalition c, Metric m) {
  ++evaluations_;
  if (cache_ != nullptr) cache_->CountEvaluation();
  std::vector<const federation::ClientUpdate*> members;
  for (size_t k = 0; k < client_count(); ++k) {
    if (c & (Coalition{1} << k)) members.push_back(&record_.updates[k]);
  }
  try {
    if (members.empty()) return evaluator_(m, record_.global_before);
    return evaluator_(m, federation::FedAvg(record_.global_before, members));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kMetricUndefined) throw;
    if (c == 0) {
      LogWarning(std::string(metrics::MetricName(m)) + " undefined for the " +
                 "previous global model in round " +
                 std::to_string(record_.round) + " (" + e.what() +
                 "); using 0");
      return 0.0;
    }
    LogWarning(std::string(metrics::MetricName(m)) +
               " undefined for coalition " + std::to_string(c) +
               " in round " + std::to_string(record_.round) + " (" +
               e.what() + "); using the empty-coalition utility");
    return Utility(0, m);
  }
}

std::vector<double> ExactShapley(size_t k, const UtilityFn& v) {
  CheckClientCount(k);
  if (k > 12) {
    ThrowConfig("exact Shapley enumeration is limited to 12 clients; use gtg");
  }
  std::vector<size_t> perm(k);
  std::iota(perm.begin(), perm.end(), size_t{0});
  const double v_empty = v(0);
  const PermutationScan scan{0.0, 0.0, TruncationRule::kPrefixDistance, false};
  std::vector<double> sums(k, 0.0);
  do {
    ScanPermutation(perm, v_empty, v, scan, &sums, nullptr);
  } while (std::next_permutation(perm.begin(), perm.end()));
  const double count = Factorial(k);
  for (auto& s : sums) s /= count;
  return sums;
}

size_t GtgPermutationBudget(size_t k, const ValuationConfig& cfg) {
  CheckClientCount(k);
  const double total = Factorial(k);
  double budget = std::max(static_cast<double>(k), std::ceil(cfg.eps2 * total));
  budget = std::min(budget, total);
  // Keep the cap a multiple of K so every client leads equally often.
  const size_t cap = std::max(k, cfg.max_permutations - cfg.max_permutations % k);
  if (budget > static_cast<double>(cap)) return cap;
  return static_cast<size_t>(budget);
}

std::vector<std::vector<size_t>> GtgPermutations(size_t k, size_t round,
                                                 const ValuationConfig& cfg) {
  const size_t budget = GtgPermutationBudget(k, cfg);
  std::vector<std::vector<size_t>> perms;
  std::vector<size_t> perm(k);
  std::iota(perm.begin(), perm.end(), size_t{0});
  if (k <= 20 && static_cast<double>(budget) >= Factorial(k)) {
    do {
      perms.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return perms;
  }
  perms.reserve(budget);
  for (size_t r = 0; r < budget; ++r) {
    const size_t lead = r % k;
    std::vector<size_t> rest;
    for (size_t c = 0; c < k; ++c) {
      if (c != lead) rest.push_back(c);
    }
    Rng rng(DeriveSeed(cfg.perm_seed, {round, r}));
    rng.Shuffle(rest);
    std::vector<size_t> p{lead};
    p.insert(p.end(), rest.begin(), rest.end());
    perms.push_back(std::move(p));
  }
  return perms;
}

std::vector<double> GtgShapley(size_t k, size_t round, const UtilityFn& v,
                               const ValuationConfig& cfg, GtgStats* stats) {
  cfg.Validate();
  CheckClientCount(k);
  GtgStats local;
  const double v_empty = v(0);
  const double v_full = v(FullCoalition(k));
  std::vector<double> sums(k, 0.0);
  if (std::fabs(v_full - v_empty) < cfg.eps1) {
    local.round_skipped = true;
    if (stats != nullptr) *stats = local;
    return sums;
  }
  const auto perms = GtgPermutations(k, round, cfg);
  const PermutationScan scan{v_full, cfg.eps3, cfg.truncation, true};
  for (const auto& p : perms) {
    ScanPermutation(p, v_empty, v, scan, &sums, &local.truncated_positions);
  }
  local.permutations = perms.size();
  const double count = static_cast<double>(perms.size());
  for (auto& s : sums) s /= count;
  if (stats != nullptr) *stats = local;
  return sums;
}

std::vector<double> LeaveOneOut(size_t k, const UtilityFn& v) {
  CheckClientCount(k);
  if (k < 2) ThrowInput("leave-one-out needs at least two clients");
  const Coalition full = FullCoalition(k);
  const double v_full = v(full);
  std::vector<double> out(k);
  for (size_t c = 0; c < k; ++c) {
    out[c] = v_full - v(full & ~(Coalition{1} << c));
  }
  return out;
}

std::vector<double> ExactShapleyRound(CoalitionGame& game, Metric m) {
  return ExactShapley(game.client_count(),
                      [&](Coalition c) { return game.Utility(c, m); });
}

std::vector<double> GtgShapleyRound(CoalitionGame& game, Metric m,
                                    const ValuationConfig& cfg,
                                    GtgStats* stats) {
  return GtgShapley(
      game.client_count(), game.round(),
      [&](Coalition c) { return game.Utility(c, m); }, cfg, stats);
}

std::vector<double> LooRound(CoalitionGame& game, Metric m) {
  return LeaveOneOut(game.client_count(),
                     [&](Coalition c) { return game.Utility(c, m); });
}

void ScoreTable::Set(Scheme s, Metric m, size_t client, size_t round,
                     double value) {
  entries_[{s, m, client, round}] = value;
}

double ScoreTable::Get(Scheme s, Metric m, size_t client, size_t round) const {
  auto it = entries_.find({s, m, client, round});
  if (it == entries_.end()) {
    ThrowInput(std::string("no score for ") + SchemeName(s) + "/" +
               metrics::MetricName(m) + " client " + std::to_string(client) +
               " round " + std::to_string(round));
  }
  return it->second;
}

bool ScoreTable::Has(Scheme s, Metric m, size_t client, size_t round) const {
  return entries_.count({s, m, client, round}) != 0;
}

size_t ScoreTable::max_round() const {
  size_t r = 0;
  for (const auto& [key, _] : entries_) r = std::max(r, key.round);
  return r;
}

size_t ScoreTable::client_count() const {
  size_t k = 0;
  for (const auto& [key, _] : entries_) k = std::max(k, key.client + 1);
  return k;
}

std::string ScoreTable::ToCsv(size_t min_round, size_t max_round) const {
  std::string out = "scheme,metric,client,round,value\n";
  for (const auto& [key, value] : entries_) {
    if (key.round < min_round || key.round > max_round) continue;
    out += SchemeName(key.scheme);
    out += ',';
    out += metrics::MetricName(key.metric);
    out += ',';
    out += std::to_string(key.client);
    out += ',';
    out += std::to_string(key.round);
    out += ',';
    out += FormatDouble17(value);
    out += '\n';
  }
  return out;
}

ScoreTable ScoreTable::FromCsv(const std::string& text) {
  ScoreTable table;
  auto lines = Split(text, '\n');
  while (!lines.empty() && Trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty() || Trim(lines[0]) != "scheme,metric,client,round,value") {
    ThrowData("scores csv: expected header scheme,metric,client,round,value");
  }
  for (size_t i = 1; i < lines.size(); ++i) {
    const auto cells = Split(Trim(lines[i]), ',');
    const std::string where = "scores csv line " + std::to_string(i + 1);
    if (cells.size() != 5) ThrowData(where + ": expected 5 cells");
    uint64_t client = 0, round = 0;
    double value = 0.0;
    if (!ParseUint64(cells[2], &client) || !ParseUint64(cells[3], &round) ||
        !ParseDouble(cells[4], &value) || !std::isfinite(value)) {
      ThrowData(where + ": malformed number");
    }
    Scheme s;
    try {
      s = ParseScheme(std::string(Trim(cells[0])));
    } catch (const Error&) {
      ThrowData(where + ": unknown scheme '" + cells[0] + "'");
    }
    table.Set(s, metrics::ParseMetric(std::string(Trim(cells[1]))),
              static_cast<size_t>(client), static_cast<size_t>(round), value);
  }
  return table;
}

std::map<TotalKey, double> Accumulate(const ScoreTable& table,
                                      size_t last_round) {
  if (last_round < kFirstScoredRound) {
    ThrowInput("accumulation needs at least round " +
               std::to_string(kFirstScoredRound));
  }
  std::set<TotalKey> keys;
  for (const auto& [key, _] : table.entries()) {
    keys.insert({key.scheme, key.metric, key.client});
  }
  std::map<TotalKey, double> totals;
  for (const auto& tk : keys) {
    double sum = 0.0;
    for (size_t t = kFirstScoredRound; t <= last_round; ++t) {
      if (!table.Has(tk.scheme, tk.metric, tk.client, t)) {
        ThrowInput(std::string("missing round ") + std::to_string(t) +
                   " for " + SchemeName(tk.scheme) + "/" +
                   metrics::MetricName(tk.metric) + " client " +
                   std::to_string(tk.client));
      }
      sum += table.Get(tk.scheme, tk.metric, tk.client, t);
    }
    totals[tk] = sum;
  }
  return totals;
}

std::string TotalsToCsv(const std::map<TotalKey, double>& totals) {
  std::string out = "scheme,metric,client,value\n";
  for (const auto& [key, value] : totals) {
    out += SchemeName(key.scheme);
    out += ',';
    out += metrics::MetricName(key.metric);
    out += ',';
    out += std::to_string(key.client);
    out += ',';
    out += FormatDouble17(value);
    out += '\n';
  }
  return out;
}

void ValueRound(const federation::RoundRecord& record,
                const data::Dataset& test, const metrics::MetricConfig& cfg,
                const RoundValuationOptions& options, UtilityCache* cache,
                ScoreTable* table) {
  const size_t n_metrics = options.metrics.size();
  std::vector<std::vector<std::vector<double>>> results(n_metrics);
  ParallelFor(n_metrics, options.threads, [&](size_t mi) {
    const Metric m = options.metrics[mi];
    CoalitionGame game(record, test, cfg, cache);
    for (Scheme s : options.schemes) {
      switch (s) {
        case Scheme::kExactShapley:
          results[mi].push_back(ExactShapleyRound(game, m));
          break;
        case Scheme::kGtg:
          results[mi].push_back(GtgShapleyRound(game, m, options.gtg));
          break;
        case Scheme::kLoo:
          results[mi].push_back(LooRound(game, m));
          break;
      }
    }
  });
  for (size_t mi = 0; mi < n_metrics; ++mi) {
    for (size_t si = 0; si < options.schemes.size(); ++si) {
      const auto& scores = results[mi][si];
      for (size_t k = 0; k < scores.size(); ++k) {
        table->Set(options.schemes[si], options.metrics[mi], k, record.round,
                   scores[k]);
      }
    }
  }
}

}  // namespace fedtrust::valuation
