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

#include "metrics/trust_metrics.hpp"

#include <cmath>

#include "common/error.hpp"
#include "common/random.hpp"

namespace fedtrust::metrics {
namespace {

void RequireNonEmpty(const data::Dataset& test) {
  if (test.empty()) ThrowInput("metric evaluated on an empty test set");
}

}  // namespace

const char* MetricName(Metric m) {
  switch (m) {
    case Metric::kPerf:
      return "perf";
    case Metric::kFair:
      return "fair";
    case Metric::kRel:
      return "rel";
    case Metric::kRes:
      return "res";
  }
  return "?";
}

Metric ParseMetric(const std::string& name) {
  for (Metric m : kAllMetrics) {
    if (name == MetricName(m)) return m;
  }
  ThrowData("unknown metric '" + name + "'");
}

std::vector<double> PgdPerturber::Perturb(std::span<const double> x,
                                          size_t label, size_t) const {
  return adversary::Pgd(params_, x, label, spec_);
}

double Perf(const Classifier& model, const data::Dataset& test) {
  RequireNonEmpty(test);
  size_t correct = 0;
  for (size_t i = 0; i < test.size(); ++i) {
    if (model.Predict(test.features(i)) == test.label(i)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

double DemographicParityGap(const Classifier& model, const data::Dataset& test,
                            const FairnessSpec& spec) {
  if (spec.target_class >= test.class_count()) {
    ThrowConfig("fairness target class out of range");
  }
  size_t in_group = 0, in_hits = 0, out_group = 0, out_hits = 0;
  for (size_t i = 0; i < test.size(); ++i) {
    const bool hit = model.Predict(test.features(i)) == spec.target_class;
    if (test.sensitive(i)) {
      ++in_group;
      in_hits += hit;
    } else {
      ++out_group;
      out_hits += hit;
    }
  }
  if (in_group == 0 || out_group == 0) {
    ThrowMetricUndefined("demographic parity needs both groups in the test set");
  }
  const double p_in =
      static_cast<double>(in_hits) / static_cast<double>(in_group);
  const double p_out =
      static_cast<double>(out_hits) / static_cast<double>(out_group);
  return std::fabs(p_in - p_out);
}

double Fair(const Classifier& model, const data::Dataset& test,
            const FairnessSpec& spec) {
  return 1.0 - DemographicParityGap(model, test, spec);
}

double Rel(const Classifier& model, const data::Dataset& test,
           const NoiseSpec& spec) {
  RequireNonEmpty(test);
  if (!(spec.sigma >= 0.0)) ThrowConfig("noise sigma must be >= 0");
  size_t changed = 0;
  std::vector<double> noisy(test.feature_dim());
  for (size_t i = 0; i < test.size(); ++i) {
    const auto x = test.features(i);
    Rng rng(DeriveSeed(spec.seed, {i}));
    for (size_t j = 0; j < x.size(); ++j) {
      noisy[j] = x[j] + spec.sigma * rng.Normal();
    }
    if (model.Predict(x) != model.Predict(noisy)) ++changed;
  }
  return 1.0 - static_cast<double>(changed) / static_cast<double>(test.size());
}

AttackOutcome RunAttack(const Classifier& model, const data::Dataset& test,
                        const Perturber& attacker) {
  AttackOutcome out;
  for (size_t i = 0; i < test.size(); ++i) {
    const auto x = test.features(i);
    const size_t pred = model.Predict(x);
    if (pred != test.label(i)) continue;
    ++out.correct;
    const auto adv = attacker.Perturb(x, test.label(i), i);
    if (model.Predict(adv) != pred) ++out.flipped;
  }
  return out;
}

double Res(const Classifier& model, const data::Dataset& test,
           const Perturber& attacker) {
  RequireNonEmpty(test);
  const auto outcome = RunAttack(model, test, attacker);
  if (outcome.correct == 0) {
    ThrowMetricUndefined("resilience needs at least one correct sample");
  }
  return 1.0 - outcome.success_rate();
}

double Evaluate(Metric metric, const nn::ModelParams& model,
                const data::Dataset& test, const MetricConfig& cfg) {
  const MlpClassifier clf(model);
  switch (metric) {
    case Metric::kPerf:
      return Perf(clf, test);
    case Metric::kFair:
      return Fair(clf, test, cfg.fairness);
    case Metric::kRel:
      return Rel(clf, test, cfg.noise);
    case Metric::kRes:
      return Res(clf, test, PgdPerturber(model, cfg.attack));
  }
  ThrowInput("unknown metric");
}

}  // namespace fedtrust::metrics
