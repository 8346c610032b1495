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

#include "federation/checkpoint.hpp"

#include <filesystem>

#include "json.hpp"

#include "common/error.hpp"
#include "common/text.hpp"

namespace fedtrust::federation {
namespace fs = std::filesystem;
using nlohmann::json;

std::string RoundDir(const std::string& run_dir, size_t round) {
  return (fs::path(run_dir) / ("round_" + std::to_string(round))).string();
}

void WriteRoundRecord(const std::string& run_dir, const RoundRecord& record,
                      const TrainingConfig& cfg,
                      std::optional<double> test_accuracy) {
  const std::string dir = RoundDir(run_dir, record.round);
  nn::SaveParams(record.global_before, dir + "/global_before.txt");
  nn::SaveParams(record.global_after, dir + "/global_after.txt");
  json clients = json::array();
  for (const auto& u : record.updates) {
    nn::SaveParams(u.params,
                   dir + "/client_" + std::to_string(u.client_id) + ".txt");
    clients.push_back({{"client", u.client_id},
                       {"sample_count", u.sample_count},
                       {"shuffle_seed", u.shuffle_seed}});
  }
  json meta = {{"round", record.round},
               {"client_count", record.updates.size()},
               {"clients", clients},
               {"aggregation", "fedavg_sample_count_weighted"},
               {"training_seed", cfg.seed},
               {"optimizer", OptimizerName(cfg.optimizer)},
               {"local_epochs", cfg.local_epochs},
               {"batch_size", cfg.batch_size},
               {"learning_rate", cfg.learning_rate}};
  if (test_accuracy) meta["test_accuracy_after"] = *test_accuracy;
  WriteFileAtomic(dir + "/meta.json", meta.dump(2) + "\n");
}

RoundRecord ReadRoundRecord(const std::string& run_dir, size_t round) {
  const std::string dir = RoundDir(run_dir, round);
  json meta;
  try {
    meta = json::parse(ReadFile(dir + "/meta.json"));
  } catch (const json::exception& e) {
    ThrowData("corrupt " + dir + "/meta.json: " + e.what());
  }
  try {
    RoundRecord rec{meta.at("round").get<size_t>(),
                    nn::LoadParams(dir + "/global_before.txt"),
                    {},
                    nn::LoadParams(dir + "/global_after.txt")};
    if (rec.round != round) ThrowData(dir + ": round number mismatch");
    for (const auto& c : meta.at("clients")) {
      const size_t k = c.at("client").get<size_t>();
      rec.updates.push_back(
          {k, round,
           nn::LoadParams(dir + "/client_" + std::to_string(k) + ".txt"),
           c.at("sample_count").get<size_t>(),
           c.at("shuffle_seed").get<uint64_t>()});
    }
    return rec;
  } catch (const json::exception& e) {
    ThrowData("corrupt " + dir + "/meta.json: " + e.what());
  }
}

std::vector<RoundRecord> ReadRunRecords(const std::string& run_dir) {
  std::vector<RoundRecord> out;
  for (size_t t = 1; fs::exists(RoundDir(run_dir, t)); ++t) {
    out.push_back(ReadRoundRecord(run_dir, t));
  }
  if (out.empty()) ThrowData("no round checkpoints under " + run_dir);
  return out;
}

}  // namespace fedtrust::federation
