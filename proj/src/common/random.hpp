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

#ifndef FEDTRUST_COMMON_RANDOM_HPP_
#define FEDTRUST_COMMON_RANDOM_HPP_

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>
#include <vector>

namespace fedtrust {

// SplitMix64 finalizer.
uint64_t SplitMix64(uint64_t x);

// Stable 64-bit FNV-1a, used to turn string tags into seed material.
uint64_t HashTag(std::string_view tag);

// Derives a child seed: h = base; for each tag, h = SplitMix64(h ^ tag).
uint64_t DeriveSeed(uint64_t base, std::initializer_list<uint64_t> tags);

// Random source with platform-independent transforms. std::mt19937_64 is
// fully specified by the standard; the std distributions are not, so the
// uniform/normal/gamma transforms are implemented here.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t NextU64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double Uniform();

  // Uniform in [lo, hi).
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  // Uniform integer in [0, n). n must be > 0.
  uint64_t UniformInt(uint64_t n);

  // Standard normal via Box-Muller (caches the second variate).
  double Normal();

  double Normal(double mean, double stddev) { return mean + stddev * Normal(); }

  // Gamma(shape, 1) by Marsaglia-Tsang.
  double Gamma(double shape);

  // Dirichlet(alpha * 1_k).
  std::vector<double> SymmetricDirichlet(double alpha, size_t k);

  // Index drawn from an (unnormalized, non-negative) weight vector.
  size_t Categorical(const std::vector<double>& weights);

  bool Bernoulli(double p) { return Uniform() < p; }

  template <typename T>
  void Shuffle(std::vector<T>& v) {
    // Fisher-Yates, back to front.
    for (size_t i = v.size(); i > 1; --i) {
      const size_t j = static_cast<size_t>(UniformInt(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace fedtrust

#endif  // FEDTRUST_COMMON_RANDOM_HPP_
