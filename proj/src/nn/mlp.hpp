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

#ifndef FEDTRUST_NN_MLP_HPP_
#define FEDTRUST_NN_MLP_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fedtrust::nn {

// Hidden layers always use ReLU.
enum class OutputActivation { kSoftmax, kSigmoid };

const char* OutputActivationName(OutputActivation a);
OutputActivation ParseOutputActivation(std::string_view name);

struct Architecture {
  // Input dim, hidden dims..., output dim.
  std::vector<size_t> layer_sizes;
  OutputActivation output = OutputActivation::kSoftmax;

  // Throws a config error when the architecture is unusable.
  void Validate() const;

  size_t input_dim() const { return layer_sizes.front(); }
  size_t output_dim() const { return layer_sizes.back(); }
  size_t layer_count() const { return layer_sizes.size() - 1; }
  // A single sigmoid unit still predicts one of two classes.
  size_t class_count() const;
  // sum_l (n_l * n_{l+1} + n_{l+1})
  size_t ParameterCount() const;

  bool operator==(const Architecture&) const = default;
};

// Immutable flat parameter vector. Layout, layer by layer: the weight
// matrix (n_{l+1} rows by n_l columns, row-major) then the bias vector.
class ModelParams {
 public:
  ModelParams(Architecture arch, std::vector<double> values);

  const Architecture& architecture() const { return arch_; }
  std::span<const double> values() const { return values_; }
  size_t size() const { return values_.size(); }

  bool operator==(const ModelParams&) const = default;

 private:
  Architecture arch_;
  std::vector<double> values_;
};

// Row-major view over a set of samples.
struct BatchView {
  std::span<const double> inputs;  // rows * dim
  std::span<const size_t> labels;  // rows
  size_t dim = 0;

  size_t rows() const { return labels.size(); }
  std::span<const double> row(size_t i) const {
    return inputs.subspan(i * dim, dim);
  }
};

// Glorot-uniform weights, zero biases.
ModelParams InitParams(const Architecture& arch, uint64_t seed);

// Output layer pre-activations.
std::vector<double> Logits(const ModelParams& params,
                           std::span<const double> input);

// Class probabilities (length class_count()).
std::vector<double> Probabilities(const ModelParams& params,
                                  std::span<const double> input);

// Argmax with ties to the lowest class; sigmoid predicts 1 iff p > 0.5.
size_t Predict(const ModelParams& params, std::span<const double> input);

// Cross-entropy of a single sample, log argument clamped at 1e-12.
double SampleLoss(const ModelParams& params, std::span<const double> input,
                  size_t label);

struct LossAndGradient {
  double loss = 0.0;
  std::vector<double> gradient;
};

// Mean cross-entropy over the batch and its gradient w.r.t. the values.
LossAndGradient LossAndParamGrads(const ModelParams& params,
                                  const BatchView& batch);

// Gradient of the per-sample loss w.r.t. the input features.
std::vector<double> InputGradient(const ModelParams& params,
                                  std::span<const double> input, size_t label);

ModelParams SgdStep(const ModelParams& params,
                    std::span<const double> gradient, double learning_rate);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  uint64_t step = 0;
};

struct AdamResult {
  ModelParams params;
  AdamState state;
};

// Bias-corrected Adam. An empty state is treated as fresh.
AdamResult AdamStep(const AdamState& state, const ModelParams& params,
                    std::span<const double> gradient, const AdamConfig& cfg);

// Text form: one architecture line, then one 17-significant-digit value
// per line.
std::string SerializeParams(const ModelParams& params);
ModelParams ParseParams(std::string_view text);
void SaveParams(const ModelParams& params, const std::string& path);
ModelParams LoadParams(const std::string& path);

}  // namespace fedtrust::nn

#endif  // FEDTRUST_NN_MLP_HPP_
