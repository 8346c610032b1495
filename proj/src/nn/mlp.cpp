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

#include "nn/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "common/error.hpp"
#include "common/random.hpp"
#include "common/text.hpp"

namespace fedtrust::nn {
namespace {

constexpr double kLogClamp = 1e-12;

struct LayerOffsets {
  size_t weights;
  size_t biases;
  size_t in;
  size_t out;
};

std::vector<LayerOffsets> Offsets(const Architecture& arch) {
  std::vector<LayerOffsets> offs;
  size_t pos = 0;
  for (size_t l = 0; l < arch.layer_count(); ++l) {
    const size_t in = arch.layer_sizes[l];
    const size_t out = arch.layer_sizes[l + 1];
    offs.push_back({pos, pos + in * out, in, out});
    pos += in * out + out;
  }
  return offs;
}

// Per-sample forward cache. activations[0] is the input; pre[l] holds the
// pre-activation of layer l (pre.back() are the logits).
struct Forward {
  std::vector<std::vector<double>> activations;
  std::vector<std::vector<double>> pre;
};

void RunForward(const ModelParams& params, std::span<const double> input,
                const std::vector<LayerOffsets>& offs, Forward* fw) {
  const Architecture& arch = params.architecture();
  if (input.size() != arch.input_dim()) {
    ThrowInput("input has " + std::to_string(input.size()) +
               " features, model expects " + std::to_string(arch.input_dim()));
  }
  const auto values = params.values();
  fw->activations.resize(offs.size() + 1);
  fw->pre.resize(offs.size());
  fw->activations[0].assign(input.begin(), input.end());
  for (size_t l = 0; l < offs.size(); ++l) {
    const auto& o = offs[l];
    const auto& a = fw->activations[l];
    auto& z = fw->pre[l];
    z.assign(o.out, 0.0);
    for (size_t r = 0; r < o.out; ++r) {
      const double* w = values.data() + o.weights + r * o.in;
      double acc = values[o.biases + r];
      for (size_t c = 0; c < o.in; ++c) acc += w[c] * a[c];
      z[r] = acc;
    }
    auto& next = fw->activations[l + 1];
    if (l + 1 < offs.size()) {
      next.resize(o.out);
      for (size_t r = 0; r < o.out; ++r) next[r] = z[r] > 0.0 ? z[r] : 0.0;
    } else {
      next = z;
    }
  }
}

double StableSigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

std::vector<double> ProbabilitiesFromLogits(const Architecture& arch,
                                            const std::vector<double>& z) {
  if (arch.output == OutputActivation::kSigmoid) {
    const double p = StableSigmoid(z[0]);
    return {1.0 - p, p};
  }
  const double m = *std::max_element(z.begin(), z.end());
  std::vector<double> p(z.size());
  double total = 0.0;
  for (size_t i = 0; i < z.size(); ++i) {
    p[i] = std::exp(z[i] - m);
    total += p[i];
  }
  for (auto& x : p) x /= total;
  return p;
}

void CheckLabel(const Architecture& arch, size_t label) {
  if (label >= arch.class_count()) {
    ThrowInput("label " + std::to_string(label) + " out of range for " +
               std::to_string(arch.class_count()) + " classes");
  }
}

// Loss and dLoss/dlogits for one sample.
double OutputDelta(const Architecture& arch, const std::vector<double>& logits,
                   size_t label, std::vector<double>* delta) {
  const auto p = ProbabilitiesFromLogits(arch, logits);
  if (arch.output == OutputActivation::kSigmoid) {
    const double py = p[label];
    delta->assign(1, 0.0);
    if (py >= kLogClamp) (*delta)[0] = p[1] - static_cast<double>(label);
    return -std::log(std::max(py, kLogClamp));
  }
  delta->assign(p.begin(), p.end());
  const double py = p[label];
  if (py < kLogClamp) {
    // Clamped region: the loss is locally constant.
    std::fill(delta->begin(), delta->end(), 0.0);
  } else {
    (*delta)[label] -= 1.0;
  }
  return -std::log(std::max(py, kLogClamp));
}

// Backpropagates delta (w.r.t. logits) through the network. Accumulates
// parameter gradients into param_grad when non-null and returns the
// gradient w.r.t. the input when want_input.
std::vector<double> Backward(const ModelParams& params,
                             const std::vector<LayerOffsets>& offs,
                             const Forward& fw, std::vector<double> delta,
                             double scale, double* param_grad,
                             bool want_input) {
  const auto values = params.values();
  for (size_t l = offs.size(); l-- > 0;) {
    const auto& o = offs[l];
    const auto& a = fw.activations[l];
    if (param_grad != nullptr) {
      for (size_t r = 0; r < o.out; ++r) {
        const double d = delta[r] * scale;
        if (d == 0.0) continue;
        double* g = param_grad + o.weights + r * o.in;
        for (size_t c = 0; c < o.in; ++c) g[c] += d * a[c];
        param_grad[o.biases + r] += d;
      }
    }
    if (l == 0 && !want_input) break;
    std::vector<double> prev(o.in, 0.0);
    for (size_t r = 0; r < o.out; ++r) {
      const double d = delta[r];
      if (d == 0.0) continue;
      const double* w = values.data() + o.weights + r * o.in;
      for (size_t c = 0; c < o.in; ++c) prev[c] += w[c] * d;
    }
    if (l > 0) {
      const auto& z = fw.pre[l - 1];
      for (size_t c = 0; c < o.in; ++c) {
        if (!(z[c] > 0.0)) prev[c] = 0.0;
      }
    }
    delta = std::move(prev);
  }
  return want_input ? delta : std::vector<double>{};
}

bool AllFinite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(),
                     [](double x) { return std::isfinite(x); });
}

}  // namespace

const char* OutputActivationName(OutputActivation a) {
  return a == OutputActivation::kSigmoid ? "sigmoid" : "softmax";
}

OutputActivation ParseOutputActivation(std::string_view name) {
  if (name == "softmax") return OutputActivation::kSoftmax;
  if (name == "sigmoid") return OutputActivation::kSigmoid;
  ThrowConfig("unknown output activation '" + std::string(name) + "'");
}

void Architecture::Validate() const {
  if (layer_sizes.size() < 2) {
    ThrowConfig("architecture needs at least an input and an output layer");
  }
  for (size_t n : layer_sizes) {
    if (n == 0) ThrowConfig("layer sizes must be positive");
  }
  if (output == OutputActivation::kSigmoid && output_dim() != 1) {
    ThrowConfig("sigmoid output requires exactly one output unit");
  }
}

size_t Architecture::class_count() const {
  return output == OutputActivation::kSigmoid ? 2 : output_dim();
}

size_t Architecture::ParameterCount() const {
  size_t n = 0;
  for (size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    n += layer_sizes[l] * layer_sizes[l + 1] + layer_sizes[l + 1];
  }
  return n;
}

ModelParams::ModelParams(Architecture arch, std::vector<double> values)
    : arch_(std::move(arch)), values_(std::move(values)) {
  arch_.Validate();
  if (values_.size() != arch_.ParameterCount()) {
    ThrowConfig("parameter vector has " + std::to_string(values_.size()) +
                " values, architecture needs " +
                std::to_string(arch_.ParameterCount()));
  }
  if (!AllFinite(values_)) ThrowNumeric("non-finite model parameter");
}

ModelParams InitParams(const Architecture& arch, uint64_t seed) {
  arch.Validate();
  Rng rng(seed);
  std::vector<double> values(arch.ParameterCount(), 0.0);
  for (const auto& o : Offsets(arch)) {
    const double limit =
        std::sqrt(6.0 / static_cast<double>(o.in + o.out));
    for (size_t i = 0; i < o.in * o.out; ++i) {
      values[o.weights + i] = rng.Uniform(-limit, limit);
    }
  }
  return ModelParams(arch, std::move(values));
}

std::vector<double> Logits(const ModelParams& params,
                           std::span<const double> input) {
  Forward fw;
  RunForward(params, input, Offsets(params.architecture()), &fw);
  return fw.pre.back();
}

std::vector<double> Probabilities(const ModelParams& params,
                                  std::span<const double> input) {
  return ProbabilitiesFromLogits(params.architecture(), Logits(params, input));
}

size_t Predict(const ModelParams& params, std::span<const double> input) {
  const auto z = Logits(params, input);
  if (params.architecture().output == OutputActivation::kSigmoid) {
    return StableSigmoid(z[0]) > 0.5 ? 1 : 0;
  }
  // Softmax is monotone in the logits, so the argmax can be taken there.
  size_t best = 0;
  for (size_t i = 1; i < z.size(); ++i) {
    if (z[i] > z[best]) best = i;
  }
  return best;
}

double SampleLoss(const ModelParams& params, std::span<const double> input,
                  size_t label) {
  CheckLabel(params.architecture(), label);
  std::vector<double> delta;
  return OutputDelta(params.architecture(), Logits(params, input), label,
                     &delta);
}

LossAndGradient LossAndParamGrads(const ModelParams& params,
                                  const BatchView& batch) {
  const Architecture& arch = params.architecture();
  if (batch.rows() == 0) ThrowInput("empty batch");
  if (batch.dim != arch.input_dim() ||
      batch.inputs.size() != batch.rows() * batch.dim) {
    ThrowInput("batch shape does not match model input dimension");
  }
  const auto offs = Offsets(arch);
  LossAndGradient out;
  out.gradient.assign(params.size(), 0.0);
  const double scale = 1.0 / static_cast<double>(batch.rows());
  Forward fw;
  std::vector<double> delta;
  double total = 0.0;
  for (size_t i = 0; i < batch.rows(); ++i) {
    const size_t label = batch.labels[i];
    CheckLabel(arch, label);
    RunForward(params, batch.row(i), offs, &fw);
    total += OutputDelta(arch, fw.pre.back(), label, &delta);
    Backward(params, offs, fw, delta, scale, out.gradient.data(), false);
  }
  out.loss = total * scale;
  return out;
}

std::vector<double> InputGradient(const ModelParams& params,
                                  std::span<const double> input,
                                  size_t label) {
  const Architecture& arch = params.architecture();
  CheckLabel(arch, label);
  const auto offs = Offsets(arch);
  Forward fw;
  RunForward(params, input, offs, &fw);
  std::vector<double> delta;
  OutputDelta(arch, fw.pre.back(), label, &delta);
  return Backward(params, offs, fw, std::move(delta), 1.0, nullptr, true);
}

ModelParams SgdStep(const ModelParams& params,
                    std::span<const double> gradient, double learning_rate) {
  if (gradient.size() != params.size()) {
    ThrowInput("gradient length does not match parameter count");
  }
  if (!AllFinite(gradient)) ThrowNumeric("non-finite gradient in SGD step");
  std::vector<double> v(params.values().begin(), params.values().end());
  for (size_t i = 0; i < v.size(); ++i) v[i] -= learning_rate * gradient[i];
  return ModelParams(params.architecture(), std::move(v));
}

AdamResult AdamStep(const AdamState& state, const ModelParams& params,
                    std::span<const double> gradient, const AdamConfig& cfg) {
  const size_t n = params.size();
  if (gradient.size() != n) {
    ThrowInput("gradient length does not match parameter count");
  }
  if (!AllFinite(gradient)) ThrowNumeric("non-finite gradient in Adam step");
  AdamState next = state;
  if (next.first_moment.empty() && next.second_moment.empty()) {
    next.first_moment.assign(n, 0.0);
    next.second_moment.assign(n, 0.0);
    next.step = 0;
  }
  if (next.first_moment.size() != n || next.second_moment.size() != n) {
    ThrowInput("Adam state does not match parameter count");
  }
  next.step += 1;
  const double t = static_cast<double>(next.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  std::vector<double> v(params.values().begin(), params.values().end());
  for (size_t i = 0; i < n; ++i) {
    const double g = gradient[i];
    double& m = next.first_moment[i];
    double& s = next.second_moment[i];
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    s = cfg.beta2 * s + (1.0 - cfg.beta2) * g * g;
    const double m_hat = m / c1;
    const double s_hat = s / c2;
    v[i] -= cfg.learning_rate * m_hat / (std::sqrt(s_hat) + cfg.epsilon);
  }
  if (!AllFinite(v)) ThrowNumeric("Adam step produced non-finite parameters");
  return {ModelParams(params.architecture(), std::move(v)), std::move(next)};
}

std::string SerializeParams(const ModelParams& params) {
  const Architecture& arch = params.architecture();
  std::string out = "mlp layers=";
  for (size_t i = 0; i < arch.layer_sizes.size(); ++i) {
    if (i > 0) out += ',';
    out += std::to_string(arch.layer_sizes[i]);
  }
  out += " hidden=relu output=";
  out += OutputActivationName(arch.output);
  out += '\n';
  for (double v : params.values()) {
    out += FormatDouble17(v);
    out += '\n';
  }
  return out;
}

ModelParams ParseParams(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string header;
  if (!std::getline(in, header)) ThrowData("empty model file");
  Architecture arch;
  std::istringstream hs(header);
  std::string token;
  hs >> token;
  if (token != "mlp") ThrowData("model file must start with 'mlp'");
  while (hs >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) ThrowData("bad model header token " + token);
    const std::string key = token.substr(0, eq);
    const std::string val = token.substr(eq + 1);
    if (key == "layers") {
      for (const auto& part : Split(val, ',')) {
        uint64_t n = 0;
        if (!ParseUint64(part, &n)) ThrowData("bad layer size '" + part + "'");
        arch.layer_sizes.push_back(static_cast<size_t>(n));
      }
    } else if (key == "hidden") {
      if (val != "relu") ThrowData("unsupported hidden activation " + val);
    } else if (key == "output") {
      arch.output = ParseOutputActivation(val);
    } else {
      ThrowData("unknown model header key " + key);
    }
  }
  std::vector<double> values;
  std::string line;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    double v = 0.0;
    if (!ParseDouble(line, &v)) {
      ThrowData("bad parameter value on line " + std::to_string(line_no));
    }
    values.push_back(v);
  }
  try {
    return ModelParams(std::move(arch), std::move(values));
  } catch (const Error& e) {
    ThrowData(std::string("invalid model file: ") + e.what());
  }
}

void SaveParams(const ModelParams& params, const std::string& path) {
  WriteFileAtomic(path, SerializeParams(params));
}

ModelParams LoadParams(const std::string& path) {
  return ParseParams(ReadFile(path));
}

}  // namespace fedtrust::nn
