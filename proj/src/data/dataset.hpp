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

#ifndef FEDTRUST_DATA_DATASET_HPP_
#define FEDTRUST_DATA_DATASET_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nn/mlp.hpp"

namespace fedtrust::data {

// Labeled samples with a protected-group bit. Features are stored
// row-major and must lie in [0, 1].
class Dataset {
 public:
  Dataset(size_t feature_dim, size_t class_count);

  void Add(std::span<const double> features, size_t label, bool sensitive);

  size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }
  size_t feature_dim() const { return dim_; }
  size_t class_count() const { return classes_; }

  std::span<const double> features(size_t i) const {
    return std::span<const double>(features_).subspan(i * dim_, dim_);
  }
  size_t label(size_t i) const { return labels_[i]; }
  bool sensitive(size_t i) const { return sensitive_[i] != 0; }

  std::span<const double> all_features() const { return features_; }
  std::span<const size_t> labels() const { return labels_; }

  nn::BatchView AsBatch() const { return {features_, labels_, dim_}; }

  Dataset Subset(std::span<const size_t> indices) const;

  bool operator==(const Dataset&) const = default;

 private:
  size_t dim_;
  size_t classes_;
  std::vector<double> features_;
  std::vector<size_t> labels_;
  std::vector<uint8_t> sensitive_;
};

struct SyntheticSpec {
  size_t samples = 2000;
  size_t feature_dim = 8;
  double group_imbalance = 0.3;
  uint64_t seed = 0;
};

// Binary task: class-conditional Gaussians around 0.5 (+-0.25 per feature,
// std 0.15, clipped to [0, 1]). Half the samples are sensitive, and
// P(y=1 | sensitive) = 0.5 + imbalance/2, P(y=1 | not) = 0.5 - imbalance/2.
Dataset GenerateSynthetic(const SyntheticSpec& spec);

struct CsvSchema {
  std::string label_column;
  std::string sensitive_column;
  std::string positive_sensitive_value;
  // Columns one-hot encoded instead of parsed as numbers.
  std::vector<std::string> categorical_columns;
  // Feature columns; empty means every column except label and sensitive.
  std::vector<std::string> feature_columns;
};

// Reads an external CSV (header row required). Rows with an empty or "?"
// cell in a used column are skipped. Numeric features are min-max
// normalized, categorical features one-hot expanded, labels mapped to
// 0..C-1 in sorted order of their distinct values.
Dataset LoadCsv(const std::string& path, const CsvSchema& schema);
Dataset ParseCsv(const std::string& text, const CsvSchema& schema);

// Min-max normalizes each column of a row-major matrix into [0, 1].
// Constant columns map to 0.
std::vector<double> NormalizeMinMax(std::span<const double> matrix,
                                    size_t cols);

// Canonical cache format: header f0..f{d-1},s,y.
std::string ToCanonicalCsv(const Dataset& data);
void WriteCanonicalCsv(const Dataset& data, const std::string& path);
Dataset ParseCanonicalCsv(const std::string& text);
Dataset ReadCanonicalCsv(const std::string& path);

enum class PartitionMode { kIid, kDirichlet };

const char* PartitionModeName(PartitionMode m);
PartitionMode ParsePartitionMode(const std::string& name);

struct PartitionSpec {
  PartitionMode mode = PartitionMode::kDirichlet;
  double dirichlet_alpha = 0.5;
  size_t client_count = 4;
  uint64_t seed = 0;
};

// Sorted index lists, one per client; disjoint and exhaustive.
std::vector<std::vector<size_t>> PartitionIndices(const Dataset& train,
                                                  const PartitionSpec& spec);
std::vector<Dataset> Partition(const Dataset& train, const PartitionSpec& spec);

struct Split {
  Dataset train;
  Dataset test;
};

// Stratified by label; each class contributes round(fraction * n_c) test
// samples.
Split TrainTestSplit(const Dataset& data, double test_fraction, uint64_t seed);

}  // namespace fedtrust::data

#endif  // FEDTRUST_DATA_DATASET_HPP_
