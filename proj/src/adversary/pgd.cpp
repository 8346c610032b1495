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

#include "adversary/pgd.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"

namespace fedtrust::adversary {

void AttackSpec::Validate() const {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    ThrowConfig("attack epsilon must be >= 0");
  }
  if (epsilon > 0.0 && !(step_size > 0.0)) {
    ThrowConfig("attack step size must be > 0");
  }
  if (steps < 1) ThrowConfig("attack needs at least one step");
  if (!(box_lo <= box_hi)) ThrowConfig("attack clip box is empty");
}

std::vector<double> Pgd(const nn::ModelParams& model,
                        std::span<const double> x, size_t label,
                        const AttackSpec& spec) {
  spec.Validate();
  if (x.size() != model.architecture().input_dim()) {
    ThrowInput("attack input has wrong dimension");
  }
  for (double v : x) {
    if (!(v >= spec.box_lo && v <= spec.box_hi)) {
      ThrowInput("attack input lies outside the clip box");
    }
  }
  std::vector<double> adv(x.begin(), x.end());
  if (spec.epsilon == 0.0) return adv;
  for (size_t step = 0; step < spec.steps; ++step) {
    const auto grad = nn::InputGradient(model, adv, label);
    for (size_t j = 0; j < adv.size(); ++j) {
      const double g = grad[j];
      const double sign = g > 0.0 ? 1.0 : (g < 0.0 ? -1.0 : 0.0);
      double v = adv[j] + spec.step_size * sign;
      v = std::clamp(v, x[j] - spec.epsilon, x[j] + spec.epsilon);
      adv[j] = std::clamp(v, spec.box_lo, spec.box_hi);
    }
    if (spec.early_exit && nn::Predict(model, adv) != label) break;
  }
  return adv;
}

}  // namespace fedtrust::adversary
