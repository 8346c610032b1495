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

#ifndef FEDTRUST_FEDERATION_FEDERATION_HPP_
#define FEDTRUST_FEDERATION_FEDERATION_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "data/dataset.hpp"
#include "nn/mlp.hpp"

namespace fedtrust::federation {

enum class Optimizer { kAdam, kSgd };

const char* OptimizerName(Optimizer o);
Optimizer ParseOptimizer(const std::string& name);

struct TrainingConfig {
  size_t rounds = 10;
  size_t local_epochs = 1;
  size_t batch_size = 32;
  double learning_rate = 1e-3;
  Optimizer optimizer = Optimizer::kAdam;
  uint64_t seed = 0;
  // Drop the client id from the shuffle seed so clients holding identical
  // data produce identical updates.
  bool client_independent_shuffle = false;

  void Validate() const;
};

struct ClientUpdate {
  size_t client_id = 0;
  size_t round = 0;
  nn::ModelParams params;
  size_t sample_count = 0;
  uint64_t shuffle_seed = 0;
};

struct RoundRecord {
  size_t round = 0;
  nn::ModelParams global_before;
  std::vector<ClientUpdate> updates;  // ordered by client id
  nn::ModelParams global_after;
};

uint64_t ShuffleSeed(const TrainingConfig& cfg, size_t round, size_t client);

// Local optimization of a copy of `global` on one client's data. Adam
// moments start fresh every round.
ClientUpdate LocalTrain(const nn::ModelParams& global,
                        const data::Dataset& data, const TrainingConfig& cfg,
                        size_t round, size_t client);

// Sample-count-weighted mean of the given updates; `base` when empty.
nn::ModelParams FedAvg(const nn::ModelParams& base,
                       std::span<const ClientUpdate* const> updates);
nn::ModelParams FedAvg(const nn::ModelParams& base,
                       const std::vector<ClientUpdate>& updates);

// Drives synchronous FedAvg over a fixed set of clients.
class Federation {
 public:
  Federation(TrainingConfig cfg, std::vector<data::Dataset> clients,
             nn::ModelParams initial, size_t threads = 1);

  // Trains every client from the current global model and aggregates.
  // Rounds must be run in order 1, 2, ...
  RoundRecord RunRound(size_t round);

  const nn::ModelParams& global() const { return global_; }
  size_t completed_rounds() const { return completed_; }
  size_t client_count() const { return clients_.size(); }

 private:
  TrainingConfig cfg_;
  std::vector<data::Dataset> clients_;
  nn::ModelParams global_;
  size_t threads_;
  size_t completed_ = 0;
};

struct TrainingOptions {
  size_t threads = 1;
  // When set, every record is written to <dir>/round_<t>/ as it completes.
  std::optional<std::string> checkpoint_dir;
  // Optional held-out set; its accuracy is recorded in meta.json.
  const data::Dataset* test = nullptr;
};

// Runs rounds 1..cfg.rounds starting from `initial`.
std::vector<RoundRecord> RunTraining(const TrainingConfig& cfg,
                                     const nn::ModelParams& initial,
                                     std::vector<data::Dataset> clients,
                                     const TrainingOptions& options = {});

}  // namespace fedtrust::federation

#endif  // FEDTRUST_FEDERATION_FEDERATION_HPP_
