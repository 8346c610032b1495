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

#ifndef FEDTRUST_FEDERATION_CHECKPOINT_HPP_
#define FEDTRUST_FEDERATION_CHECKPOINT_HPP_

#include <optional>
#include <string>
#include <vector>

#include "federation/federation.hpp"

namespace fedtrust::federation {

// Layout of one round:
//   <run_dir>/round_<t>/global_before.txt
//   <run_dir>/round_<t>/global_after.txt
//   <run_dir>/round_<t>/client_<k>.txt
//   <run_dir>/round_<t>/meta.json
// meta.json carries the round, per-client sample counts and shuffle seeds,
// the aggregation weighting and the training seed.
std::string RoundDir(const std::string& run_dir, size_t round);

void WriteRoundRecord(const std::string& run_dir, const RoundRecord& record,
                      const TrainingConfig& cfg,
                      std::optional<double> test_accuracy = std::nullopt);

RoundRecord ReadRoundRecord(const std::string& run_dir, size_t round);

// Reads round_1 .. round_<n> for every consecutive round directory present.
std::vector<RoundRecord> ReadRunRecords(const std::string& run_dir);

}  // namespace fedtrust::federation

#endif  // FEDTRUST_FEDERATION_CHECKPOINT_HPP_
