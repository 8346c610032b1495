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

#include "experiment/config.hpp"

#include <cmath>
#include <functional>
#include <map>

#include "common/error.hpp"
#include "common/text.hpp"

namespace fedtrust::experiment {
namespace {

size_t ToSize(const std::string& key, const std::string& v) {
  uint64_t n = 0;
  if (!ParseUint64(v, &n)) {
    ThrowConfig(key + ": expected a non-negative integer, got '" + v + "'");
  }
  return static_cast<size_t>(n);
}

uint64_t ToU64(const std::string& key, const std::string& v) {
  uint64_t n = 0;
  if (!ParseUint64(v, &n)) {
    ThrowConfig(key + ": expected a non-negative integer, got '" + v + "'");
  }
  return n;
}

double ToDouble(const std::string& key, const std::string& v) {
  double d = 0.0;
  if (!ParseDouble(v, &d) || std::isnan(d)) {
    ThrowConfig(key + ": expected a number, got '" + v + "'");
  }
  return d;
}

bool ToBool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  ThrowConfig(key + ": expected true/false, got '" + v + "'");
}

std::vector<std::string> ToList(const std::string& v) {
  std::vector<std::string> out;
  for (const auto& part : Split(v, ',')) {
    const auto t = Trim(part);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

std::string JoinSizes(const std::vector<size_t>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

std::string Join(const std::vector<std::string>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += ',';
    out += v[i];
  }
  return out;
}

using Setter =
    std::function<void(ExperimentConfig*, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& Setters() {
  static const std::map<std::string, Setter> setters = {
      {"run_id", [](auto* c, auto&, auto& v) { c->run_id = v; }},
      {"output_dir", [](auto* c, auto&, auto& v) { c->output_dir = v; }},
      {"folds", [](auto* c, auto& k, auto& v) { c->folds = ToSize(k, v); }},
      {"master_seed",
       [](auto* c, auto& k, auto& v) { c->master_seed = ToU64(k, v); }},
      {"threads", [](auto* c, auto& k, auto& v) { c->threads = ToSize(k, v); }},

      {"data.source",
       [](auto* c, auto& k, auto& v) {
         if (v == "synthetic") {
           c->data.source = DataSourceKind::kSynthetic;
         } else if (v == "csv") {
           c->data.source = DataSourceKind::kCsv;
         } else {
           ThrowConfig(k + ": expected synthetic or csv, got '" + v + "'");
         }
       }},
      {"data.n",
       [](auto* c, auto& k, auto& v) { c->data.synthetic.samples = ToSize(k, v); }},
      {"data.d",
       [](auto* c, auto& k, auto& v) {
         c->data.synthetic.feature_dim = ToSize(k, v);
       }},
      {"data.group_imbalance",
       [](auto* c, auto& k, auto& v) {
         c->data.synthetic.group_imbalance = ToDouble(k, v);
       }},
      {"data.csv_path", [](auto* c, auto&, auto& v) { c->data.csv_path = v; }},
      {"data.label",
       [](auto* c, auto&, auto& v) { c->data.schema.label_column = v; }},
      {"data.sensitive",
       [](auto* c, auto&, auto& v) { c->data.schema.sensitive_column = v; }},
      {"data.positive_sensitive_value",
       [](auto* c, auto&, auto& v) {
         c->data.schema.positive_sensitive_value = v;
       }},
      {"data.categorical",
       [](auto* c, auto&, auto& v) {
         c->data.schema.categorical_columns = ToList(v);
       }},
      {"data.features",
       [](auto* c, auto&, auto& v) { c->data.schema.feature_columns = ToList(v); }},
      {"data.test_fraction",
       [](auto* c, auto& k, auto& v) { c->data.test_fraction = ToDouble(k, v); }},

      {"partition.mode",
       [](auto* c, auto&, auto& v) { c->partition.mode = data::ParsePartitionMode(v); }},
      {"partition.alpha",
       [](auto* c, auto& k, auto& v) {
         c->partition.dirichlet_alpha = ToDouble(k, v);
       }},
      {"partition.clients",
       [](auto* c, auto& k, auto& v) { c->partition.client_count = ToSize(k, v); }},

      {"model.hidden",
       [](auto* c, auto& k, auto& v) {
         c->hidden_layers.clear();
         for (const auto& p : ToList(v)) c->hidden_layers.push_back(ToSize(k, p));
       }},
      {"model.output",
       [](auto* c, auto&, auto& v) { c->output = nn::ParseOutputActivation(v); }},

      {"train.rounds",
       [](auto* c, auto& k, auto& v) { c->training.rounds = ToSize(k, v); }},
      {"train.local_epochs",
       [](auto* c, auto& k, auto& v) { c->training.local_epochs = ToSize(k, v); }},
      {"train.batch_size",
       [](auto* c, auto& k, auto& v) { c->training.batch_size = ToSize(k, v); }},
      {"train.learning_rate",
       [](auto* c, auto& k, auto& v) {
         c->training.learning_rate = ToDouble(k, v);
       }},
      {"train.optimizer",
       [](auto* c, auto&, auto& v) {
         c->training.optimizer = federation::ParseOptimizer(v);
       }},

      {"metrics.sigma",
       [](auto* c, auto& k, auto& v) { c->metrics.noise.sigma = ToDouble(k, v); }},
      {"metrics.target_class",
       [](auto* c, auto& k, auto& v) {
         c->metrics.fairness.target_class = ToSize(k, v);
       }},
      {"attack.epsilon",
       [](auto* c, auto& k, auto& v) { c->metrics.attack.epsilon = ToDouble(k, v); }},
      {"attack.step_size",
       [](auto* c, auto& k, auto& v) {
         c->metrics.attack.step_size = ToDouble(k, v);
       }},
      {"attack.steps",
       [](auto* c, auto& k, auto& v) { c->metrics.attack.steps = ToSize(k, v); }},
      {"attack.early_exit",
       [](auto* c, auto& k, auto& v) { c->metrics.attack.early_exit = ToBool(k, v); }},

      {"valuation.schemes",
       [](auto* c, auto&, auto& v) {
         c->schemes.clear();
         for (const auto& p : ToList(v)) c->schemes.push_back(valuation::ParseScheme(p));
       }},
      {"valuation.eps1",
       [](auto* c, auto& k, auto& v) { c->valuation.eps1 = ToDouble(k, v); }},
      {"valuation.eps2",
       [](auto* c, auto& k, auto& v) { c->valuation.eps2 = ToDouble(k, v); }},
      {"valuation.eps3",
       [](auto* c, auto& k, auto& v) { c->valuation.eps3 = ToDouble(k, v); }},
      {"valuation.truncation_rule",
       [](auto* c, auto&, auto& v) {
         c->valuation.truncation = valuation::ParseTruncationRule(v);
       }},
      {"valuation.max_permutations",
       [](auto* c, auto& k, auto& v) {
         c->valuation.max_permutations = ToSize(k, v);
       }},
  };
  return setters;
}

}  // namespace

void ExperimentConfig::Validate() const {
  if (folds < 1) ThrowConfig("folds must be >= 1");
  if (run_id.empty() || run_id.find('/') != std::string::npos) {
    ThrowConfig("run_id must be a non-empty name without '/'");
  }
  if (data.source == DataSourceKind::kCsv) {
    if (data.csv_path.empty()) ThrowConfig("data.csv_path is required for csv");
    if (data.schema.label_column.empty() ||
        data.schema.sensitive_column.empty()) {
      ThrowConfig("data.label and data.sensitive are required for csv");
    }
  }
  if (!(data.test_fraction > 0.0 && data.test_fraction < 1.0)) {
    ThrowConfig("data.test_fraction must lie in (0, 1)");
  }
  if (partition.client_count < 2) ThrowConfig("partition.clients must be >= 2");
  if (partition.mode == data::PartitionMode::kDirichlet &&
      !(partition.dirichlet_alpha > 0.0)) {
    ThrowConfig("partition.alpha must be positive");
  }
  for (size_t h : hidden_layers) {
    if (h == 0) ThrowConfig("model.hidden sizes must be positive");
  }
  training.Validate();
  if (!(metrics.noise.sigma >= 0.0)) ThrowConfig("metrics.sigma must be >= 0");
  metrics.attack.Validate();
  if (schemes.empty()) ThrowConfig("valuation.schemes must not be empty");
  valuation.Validate();
  for (auto s : schemes) {
    if (s == valuation::Scheme::kExactShapley && partition.client_count > 12) {
      ThrowConfig("exact_shapley supports at most 12 clients; use gtg");
    }
  }
}

void SetConfigValue(ExperimentConfig* cfg, const std::string& key,
                    const std::string& value) {
  const auto& setters = Setters();
  auto it = setters.find(key);
  if (it == setters.end()) ThrowConfig("unknown key '" + key + "'");
  it->second(cfg, key, value);
}

ExperimentConfig ParseConfig(const std::string& text) {
  ExperimentConfig cfg;
  const auto lines = Split(text, '\n');
  for (size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    if (auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "config line " + std::to_string(i + 1);
    if (eq == std::string_view::npos) {
      ThrowConfig(where + ": expected 'key = value'");
    }
    const std::string key(Trim(line.substr(0, eq)));
    const std::string value(Trim(line.substr(eq + 1)));
    try {
      SetConfigValue(&cfg, key, value);
    } catch (const Error& e) {
      ThrowConfig(where + ": " + e.what());
    }
  }
  cfg.Validate();
  return cfg;
}

ExperimentConfig LoadConfig(const std::string& path) {
  std::string text;
  try {
    text = ReadFile(path);
  } catch (const Error& e) {
    ThrowConfig(e.what());
  }
  return ParseConfig(text);
}

std::string ConfigToText(const ExperimentConfig& c) {
  std::string out;
  auto put = [&](const std::string& k, const std::string& v) {
    out += k + " = " + v + "\n";
  };
  put("run_id", c.run_id);
  put("output_dir", c.output_dir);
  put("folds", std::to_string(c.folds));
  put("master_seed", std::to_string(c.master_seed));
  put("threads", std::to_string(c.threads));
  put("data.source",
      c.data.source == DataSourceKind::kCsv ? "csv" : "synthetic");
  put("data.n", std::to_string(c.data.synthetic.samples));
  put("data.d", std::to_string(c.data.synthetic.feature_dim));
  put("data.group_imbalance", FormatDouble17(c.data.synthetic.group_imbalance));
  if (c.data.source == DataSourceKind::kCsv) {
    put("data.csv_path", c.data.csv_path);
    put("data.label", c.data.schema.label_column);
    put("data.sensitive", c.data.schema.sensitive_column);
    put("data.positive_sensitive_value", c.data.schema.positive_sensitive_value);
    put("data.categorical", Join(c.data.schema.categorical_columns));
    put("data.features", Join(c.data.schema.feature_columns));
  }
  put("data.test_fraction", FormatDouble17(c.data.test_fraction));
  put("partition.mode", data::PartitionModeName(c.partition.mode));
  put("partition.alpha", FormatDouble17(c.partition.dirichlet_alpha));
  put("partition.clients", std::to_string(c.partition.client_count));
  put("model.hidden", JoinSizes(c.hidden_layers));
  put("model.output", nn::OutputActivationName(c.output));
  put("train.rounds", std::to_string(c.training.rounds));
  put("train.local_epochs", std::to_string(c.training.local_epochs));
  put("train.batch_size", std::to_string(c.training.batch_size));
  put("train.learning_rate", FormatDouble17(c.training.learning_rate));
  put("train.optimizer", federation::OptimizerName(c.training.optimizer));
  put("metrics.sigma", FormatDouble17(c.metrics.noise.sigma));
  put("metrics.target_class", std::to_string(c.metrics.fairness.target_class));
  put("attack.epsilon", FormatDouble17(c.metrics.attack.epsilon));
  put("attack.step_size", FormatDouble17(c.metrics.attack.step_size));
  put("attack.steps", std::to_string(c.metrics.attack.steps));
  put("attack.early_exit", c.metrics.attack.early_exit ? "true" : "false");
  std::vector<std::string> schemes;
  for (auto s : c.schemes) schemes.emplace_back(valuation::SchemeName(s));
  put("valuation.schemes", Join(schemes));
  put("valuation.eps1", FormatDouble17(c.valuation.eps1));
  put("valuation.eps2", FormatDouble17(c.valuation.eps2));
  put("valuation.eps3", FormatDouble17(c.valuation.eps3));
  put("valuation.truncation_rule",
      valuation::TruncationRuleName(c.valuation.truncation));
  put("valuation.max_permutations", std::to_string(c.valuation.max_permutations));
  return out;
}

}  // namespace fedtrust::experiment
