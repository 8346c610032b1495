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

#ifndef FEDTRUST_METRICS_TRUST_METRICS_HPP_
#define FEDTRUST_METRICS_TRUST_METRICS_HPP_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "adversary/pgd.hpp"
#include "data/dataset.hpp"
#include "nn/mlp.hpp"

namespace fedtrust::metrics {

// Evaluation functions v. Every value lies in [0, 1], higher is better.
enum class Metric { kPerf = 0, kFair = 1, kRel = 2, kRes = 3 };

inline constexpr std::array<Metric, 4> kAllMetrics = {
    Metric::kPerf, Metric::kFair, Metric::kRel, Metric::kRes};

const char* MetricName(Metric m);
Metric ParseMetric(const std::string& name);

class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual size_t Predict(std::span<const double> x) const = 0;
};

// Produces the perturbed input x + a for test sample `index`.
class Perturber {
 public:
  virtual ~Perturber() = default;
  virtual std::vector<double> Perturb(std::span<const double> x, size_t label,
                                      size_t index) const = 0;
};

class MlpClassifier : public Classifier {
 public:
  explicit MlpClassifier(const nn::ModelParams& params) : params_(params) {}
  size_t Predict(std::span<const double> x) const override {
    return nn::Predict(params_, x);
  }

 private:
  const nn::ModelParams& params_;
};

class PgdPerturber : public Perturber {
 public:
  PgdPerturber(const nn::ModelParams& params, adversary::AttackSpec spec)
      : params_(params), spec_(spec) {}
  std::vector<double> Perturb(std::span<const double> x, size_t label,
                              size_t index) const override;

 private:
  const nn::ModelParams& params_;
  adversary::AttackSpec spec_;
};

struct FairnessSpec {
  size_t target_class = 1;
};

struct NoiseSpec {
  double sigma = 0.1;
  uint64_t seed = 0;
};

struct MetricConfig {
  FairnessSpec fairness;
  NoiseSpec noise;
  adversary::AttackSpec attack;
};

// Fraction of samples predicted correctly.
double Perf(const Classifier& model, const data::Dataset& test);

// |P(M(x)=target | S) - P(M(x)=target | not S)| over all test samples.
// Throws kMetricUndefined when either group is empty.
double DemographicParityGap(const Classifier& model, const data::Dataset& test,
                            const FairnessSpec& spec);

double Fair(const Classifier& model, const data::Dataset& test,
            const FairnessSpec& spec);

// 1 - fraction of samples whose prediction changes under one unclipped
// N(0, sigma^2) draw per coordinate. Sample i draws from
// DeriveSeed(seed, {i}).
double Rel(const Classifier& model, const data::Dataset& test,
           const NoiseSpec& spec);

struct AttackOutcome {
  size_t correct = 0;
  size_t flipped = 0;
  double success_rate() const {
    return static_cast<double>(flipped) / static_cast<double>(correct);
  }
};

// Attacks every correctly classified sample; a flip is a prediction change.
AttackOutcome RunAttack(const Classifier& model, const data::Dataset& test,
                        const Perturber& attacker);

// 1 - attack success rate. Throws kMetricUndefined with no correct samples.
double Res(const Classifier& model, const data::Dataset& test,
           const Perturber& attacker);

// Dispatches on the metric for an MLP model.
double Evaluate(Metric metric, const nn::ModelParams& model,
                const data::Dataset& test, const MetricConfig& cfg);

}  // namespace fedtrust::metrics

#endif  // FEDTRUST_METRICS_TRUST_METRICS_HPP_
