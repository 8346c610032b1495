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

#include "federation/federation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "common/error.hpp"
#include "common/log.hpp"
#include "common/parallel.hpp"
#include "common/random.hpp"
#include "federation/checkpoint.hpp"

namespace fedtrust::federation {

const char* OptimizerName(Optimizer o) {
  return o == Optimizer::kSgd ? "sgd" : "adam";
}

Optimizer ParseOptimizer(const std::string& name) {
  if (name == "adam") return Optimizer::kAdam;
  if (name == "sgd") return Optimizer::kSgd;
  ThrowConfig("unknown optimizer '" + name + "'");
}

void TrainingConfig::Validate() const {
  if (rounds < 2) ThrowConfig("training needs at least 2 rounds");
  if (batch_size == 0) ThrowConfig("batch_size must be positive");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    ThrowConfig("learning_rate must be positive");
  }
}

uint64_t ShuffleSeed(const TrainingConfig& cfg, size_t round, size_t client) {
  if (cfg.client_independent_shuffle) {
    return DeriveSeed(cfg.seed, {HashTag("shuffle"), round});
  }
  return DeriveSeed(cfg.seed, {HashTag("shuffle"), round, client});
}

ClientUpdate LocalTrain(const nn::ModelParams& global,
                        const data::Dataset& data, const TrainingConfig& cfg,
                        size_t round, size_t client) {
  if (data.empty()) {
    ThrowInput("client " + std::to_string(client) + " has no data");
  }
  if (data.feature_dim() != global.architecture().input_dim()) {
    ThrowConfig("client data dimension does not match the model");
  }
  const uint64_t seed = ShuffleSeed(cfg, round, client);
  Rng rng(seed);
  nn::ModelParams params = global;
  nn::AdamState adam;
  const nn::AdamConfig adam_cfg{cfg.learning_rate};

  const size_t n = data.size();
  const size_t dim = data.feature_dim();
  std::vector<size_t> order(n);
  std::vector<double> xs;
  std::vector<size_t> ys;
  for (size_t epoch = 0; epoch < cfg.local_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), size_t{0});
    rng.Shuffle(order);
    for (size_t start = 0; start < n; start += cfg.batch_size) {
      const size_t end = std::min(n, start + cfg.batch_size);
      xs.clear();
      ys.clear();
      for (size_t i = start; i < end; ++i) {
        const auto f = data.features(order[i]);
        xs.insert(xs.end(), f.begin(), f.end());
        ys.push_back(data.label(order[i]));
      }
      auto lg = nn::LossAndParamGrads(params, {xs, ys, dim});
      if (!std::isfinite(lg.loss)) {
        ThrowNumeric("non-finite loss in round " + std::to_string(round) +
                     ", client " + std::to_string(client));
      }
      try {
        if (cfg.optimizer == Optimizer::kAdam) {
          auto res = nn::AdamStep(adam, params, lg.gradient, adam_cfg);
          params = std::move(res.params);
          adam = std::move(res.state);
        } else {
          params = nn::SgdStep(params, lg.gradient, cfg.learning_rate);
        }
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::kNumeric) throw;
        ThrowNumeric(std::string(e.what()) + " (round " +
                     std::to_string(round) + ", client " +
                     std::to_string(client) + ")");
      }
    }
  }
  return {client, round, std::move(params), n, seed};
}

nn::ModelParams FedAvg(const nn::ModelParams& base,
                       std::span<const ClientUpdate* const> updates) {
  if (updates.empty()) return base;
  double total = 0.0;
  for (const auto* u : updates) {
    if (!(u->params.architecture() == base.architecture())) {
      ThrowConfig("client " + std::to_string(u->client_id) +
                  " update does not match the global architecture");
    }
    if (u->sample_count == 0) ThrowInput("client update with zero samples");
    total += static_cast<double>(u->sample_count);
  }
  const size_t n = base.size();
  std::vector<double> out(n, 0.0);
  for (const auto* u : updates) {
    const double w = static_cast<double>(u->sample_count) / total;
    const auto v = u->params.values();
    for (size_t i = 0; i < n; ++i) out[i] += w * v[i];
  }
  // Weights sum to one only up to rounding; keep each coordinate inside the
  // hull of the client coordinates.
  for (size_t i = 0; i < n; ++i) {
    double lo = updates[0]->params.values()[i];
    double hi = lo;
    for (const auto* u : updates) {
      lo = std::min(lo, u->params.values()[i]);
      hi = std::max(hi, u->params.values()[i]);
    }
    out[i] = std::clamp(out[i], lo, hi);
  }
  return nn::ModelParams(base.architecture(), std::move(out));
}

nn::ModelParams FedAvg(const nn::ModelParams& base,
                       const std::vector<ClientUpdate>& updates) {
  std::vector<const ClientUpdate*> ptrs;
  ptrs.reserve(updates.size());
  for (const auto& u : updates) ptrs.push_back(&u);
  return FedAvg(base, ptrs);
}

Federation::Federation(TrainingConfig cfg, std::vector<data::Dataset> clients,
                       nn::ModelParams initial, size_t threads)
    : cfg_(std::move(cfg)),
      clients_(std::move(clients)),
      global_(std::move(initial)),
      threads_(threads) {
  if (clients_.empty()) ThrowConfig("federation needs at least one client");
}

RoundRecord Federation::RunRound(size_t round) {
  if (round != completed_ + 1) {
    ThrowInput("round " + std::to_string(round) + " requested after " +
               std::to_string(completed_) + " completed rounds");
  }
  std::vector<std::optional<ClientUpdate>> slots(clients_.size());
  ParallelFor(clients_.size(), threads_, [&](size_t k) {
    slots[k] = LocalTrain(global_, clients_[k], cfg_, round, k);
  });
  RoundRecord record{round, global_, {}, global_};
  for (auto& s : slots) record.updates.push_back(std::move(*s));
  record.global_after = FedAvg(record.global_before, record.updates);
  global_ = record.global_after;
  completed_ = round;
  return record;
}

std::vector<RoundRecord> RunTraining(const TrainingConfig& cfg,
                                     const nn::ModelParams& initial,
                                     std::vector<data::Dataset> clients,
                                     const TrainingOptions& options) {
  cfg.Validate();
  Federation fed(cfg, std::move(clients), initial, options.threads);
  std::vector<RoundRecord> records;
  for (size_t t = 1; t <= cfg.rounds; ++t) {
    records.push_back(fed.RunRound(t));
    std::optional<double> acc;
    if (options.test != nullptr && !options.test->empty()) {
      size_t correct = 0;
      for (size_t i = 0; i < options.test->size(); ++i) {
        correct += nn::Predict(fed.global(), options.test->features(i)) ==
                   options.test->label(i);
      }
      acc = static_cast<double>(correct) /
            static_cast<double>(options.test->size());
      LogInfo("round " + std::to_string(t) + " test accuracy " +
              std::to_string(*acc));
    }
    if (options.checkpoint_dir) {
      WriteRoundRecord(*options.checkpoint_dir, records.back(), cfg, acc);
    }
  }
  return records;
}

}  // namespace fedtrust::federation
