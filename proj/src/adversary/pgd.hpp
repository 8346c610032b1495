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

#ifndef FEDTRUST_ADVERSARY_PGD_HPP_
#define FEDTRUST_ADVERSARY_PGD_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "nn/mlp.hpp"

namespace fedtrust::adversary {

struct AttackSpec {
  double epsilon = 0.3;     // l-infinity radius
  double step_size = 0.007;
  size_t steps = 40;
  double box_lo = 0.0;
  double box_hi = 1.0;
  // Reserved for a random start; the attack starts at x and is
  // deterministic.
  uint64_t seed = 0;
  // Stop as soon as the prediction leaves the true class.
  bool early_exit = false;

  void Validate() const;
};

// Untargeted l-infinity PGD on the cross-entropy of the true class:
//   x' <- clip_box(proj_{B(x, eps)}(x' + step * sign(dL/dx')))
// starting from x' = x. sign(0) = 0.
std::vector<double> Pgd(const nn::ModelParams& model,
                        std::span<const double> x, size_t label,
                        const AttackSpec& spec);

}  // namespace fedtrust::adversary

#endif  // FEDTRUST_ADVERSARY_PGD_HPP_
