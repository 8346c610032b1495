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

#include "data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "common/error.hpp"
#include "common/log.hpp"
#include "common/random.hpp"
#include "common/text.hpp"

namespace fedtrust::data {
namespace {

// Splits one CSV record. Double-quoted fields may contain commas and ""
// escapes; embedded newlines are not supported.
std::vector<std::string> SplitCsvLine(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::string(Trim(cur)));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(std::string(Trim(cur)));
  return fields;
}

std::vector<std::string> Lines(const std::string& text) {
  std::vector<std::string> lines;
  for (auto& l : fedtrust::Split(text, '\n')) {
    if (!l.empty() && l.back() == '\r') l.pop_back();
    lines.push_back(std::move(l));
  }
  while (!lines.empty() && Trim(lines.back()).empty()) lines.pop_back();
  return lines;
}

bool IsMissing(const std::string& cell) { return cell.empty() || cell == "?"; }

}  // namespace

Dataset::Dataset(size_t feature_dim, size_t class_count)
    : dim_(feature_dim), classes_(class_count) {
  if (feature_dim == 0) ThrowConfig("dataset feature dimension must be > 0");
  if (class_count < 2) ThrowConfig("dataset needs at least two classes");
}

void Dataset::Add(std::span<const double> features, size_t label,
                  bool sensitive) {
  if (features.size() != dim_) {
    ThrowInput("sample has " + std::to_string(features.size()) +
               " features, dataset expects " + std::to_string(dim_));
  }
  if (label >= classes_) {
    ThrowInput("label " + std::to_string(label) + " out of range");
  }
  for (double f : features) {
    if (!std::isfinite(f) || f < 0.0 || f > 1.0) {
      ThrowData("feature value outside [0, 1]");
    }
  }
  features_.insert(features_.end(), features.begin(), features.end());
  labels_.push_back(label);
  sensitive_.push_back(sensitive ? 1 : 0);
}

Dataset Dataset::Subset(std::span<const size_t> indices) const {
  Dataset out(dim_, classes_);
  out.features_.reserve(indices.size() * dim_);
  out.labels_.reserve(indices.size());
  out.sensitive_.reserve(indices.size());
  for (size_t i : indices) {
    if (i >= size()) ThrowInput("subset index out of range");
    const auto f = features(i);
    out.features_.insert(out.features_.end(), f.begin(), f.end());
    out.labels_.push_back(labels_[i]);
    out.sensitive_.push_back(sensitive_[i]);
  }
  return out;
}

Dataset GenerateSynthetic(const SyntheticSpec& spec) {
  if (spec.samples < 10) ThrowConfig("synthetic data needs n >= 10");
  if (spec.feature_dim < 2) ThrowConfig("synthetic data needs d >= 2");
  if (!(spec.group_imbalance >= 0.0 && spec.group_imbalance < 1.0)) {
    ThrowConfig("group_imbalance must lie in [0, 1)");
  }
  Rng rng(spec.seed);
  Dataset out(spec.feature_dim, 2);
  std::vector<double> x(spec.feature_dim);
  for (size_t i = 0; i < spec.samples; ++i) {
    const bool sensitive = rng.Bernoulli(0.5);
    const double p_pos = sensitive ? 0.5 + spec.group_imbalance / 2.0
                                   : 0.5 - spec.group_imbalance / 2.0;
    const size_t label = rng.Bernoulli(p_pos) ? 1 : 0;
    const double dir = label == 1 ? 1.0 : -1.0;
    for (size_t j = 0; j < spec.feature_dim; ++j) {
      // Alternate the offset sign across features.
      const double sign = (j % 2 == 0) ? 1.0 : -1.0;
      const double mean = 0.5 + 0.25 * dir * sign;
      x[j] = std::clamp(rng.Normal(mean, 0.15), 0.0, 1.0);
    }
    out.Add(x, label, sensitive);
  }
  return out;
}

std::vector<double> NormalizeMinMax(std::span<const double> matrix,
                                    size_t cols) {
  if (cols == 0 || matrix.size() % cols != 0) {
    ThrowInput("matrix size is not a multiple of the column count");
  }
  const size_t rows = matrix.size() / cols;
  std::vector<double> out(matrix.begin(), matrix.end());
  for (size_t c = 0; c < cols; ++c) {
    double lo = INFINITY, hi = -INFINITY;
    for (size_t r = 0; r < rows; ++r) {
      lo = std::min(lo, matrix[r * cols + c]);
      hi = std::max(hi, matrix[r * cols + c]);
    }
    const double range = hi - lo;
    for (size_t r = 0; r < rows; ++r) {
      double& v = out[r * cols + c];
      v = range > 0.0 ? std::clamp((v - lo) / range, 0.0, 1.0) : 0.0;
    }
  }
  return out;
}

Dataset ParseCsv(const std::string& text, const CsvSchema& schema) {
  const auto lines = Lines(text);
  if (lines.empty()) ThrowData("csv: missing header row");
  const auto header = SplitCsvLine(lines[0]);
  std::map<std::string, size_t> col_index;
  for (size_t i = 0; i < header.size(); ++i) col_index[header[i]] = i;

  auto require = [&](const std::string& name, const char* role) {
    auto it = col_index.find(name);
    if (name.empty() || it == col_index.end()) {
      ThrowData(std::string("csv schema error: ") + role + " column '" + name +
                "' not found");
    }
    return it->second;
  };
  const size_t label_col = require(schema.label_column, "label");
  const size_t sens_col = require(schema.sensitive_column, "sensitive");

  std::vector<size_t> feature_cols;
  if (schema.feature_columns.empty()) {
    for (size_t i = 0; i < header.size(); ++i) {
      if (i != label_col && i != sens_col) feature_cols.push_back(i);
    }
  } else {
    for (const auto& name : schema.feature_columns) {
      feature_cols.push_back(require(name, "feature"));
    }
  }
  if (feature_cols.empty()) ThrowData("csv schema error: no feature columns");
  std::set<size_t> categorical;
  for (const auto& name : schema.categorical_columns) {
    categorical.insert(require(name, "categorical"));
  }

  // Pass 1: keep complete rows, collect category vocabularies.
  std::vector<std::vector<std::string>> rows;
  std::vector<size_t> row_numbers;
  size_t skipped = 0;
  for (size_t li = 1; li < lines.size(); ++li) {
    if (Trim(lines[li]).empty()) continue;
    auto fields = SplitCsvLine(lines[li]);
    if (fields.size() != header.size()) {
      ThrowData("csv row " + std::to_string(li + 1) + ": expected " +
                std::to_string(header.size()) + " cells, found " +
                std::to_string(fields.size()));
    }
    bool missing = IsMissing(fields[label_col]) || IsMissing(fields[sens_col]);
    for (size_t c : feature_cols) missing = missing || IsMissing(fields[c]);
    if (missing) {
      ++skipped;
      continue;
    }
    rows.push_back(std::move(fields));
    row_numbers.push_back(li + 1);
  }
  if (skipped > 0) {
    LogWarning("csv: skipped " + std::to_string(skipped) +
               " rows with missing values");
  }
  if (rows.empty()) ThrowData("csv: no complete data rows");

  std::map<size_t, std::vector<std::string>> vocab;
  for (size_t c : categorical) {
    std::set<std::string> values;
    for (const auto& r : rows) values.insert(r[c]);
    vocab[c] = std::vector<std::string>(values.begin(), values.end());
  }

  // Labels: numeric order when every value parses, lexicographic otherwise.
  std::vector<std::string> label_values;
  {
    std::set<std::string> distinct;
    for (const auto& r : rows) distinct.insert(r[label_col]);
    label_values.assign(distinct.begin(), distinct.end());
    bool numeric = true;
    std::vector<std::pair<double, std::string>> keyed;
    for (const auto& v : label_values) {
      double d = 0.0;
      numeric = numeric && ParseDouble(v, &d);
      keyed.emplace_back(d, v);
    }
    if (numeric) {
      std::sort(keyed.begin(), keyed.end());
      for (size_t i = 0; i < keyed.size(); ++i) label_values[i] = keyed[i].second;
    }
  }
  if (label_values.size() < 2) ThrowData("csv: label column has one value");
  std::map<std::string, size_t> label_index;
  for (size_t i = 0; i < label_values.size(); ++i) {
    label_index[label_values[i]] = i;
  }

  size_t dim = 0;
  for (size_t c : feature_cols) {
    dim += categorical.count(c) ? vocab[c].size() : 1;
  }
  std::vector<double> matrix;
  matrix.reserve(rows.size() * dim);
  std::vector<bool> numeric_slot;
  for (size_t c : feature_cols) {
    if (categorical.count(c)) {
      numeric_slot.insert(numeric_slot.end(), vocab[c].size(), false);
    } else {
      numeric_slot.push_back(true);
    }
  }
  for (size_t r = 0; r < rows.size(); ++r) {
    for (size_t c : feature_cols) {
      const std::string& cell = rows[r][c];
      if (categorical.count(c)) {
        for (const auto& v : vocab[c]) matrix.push_back(v == cell ? 1.0 : 0.0);
      } else {
        double v = 0.0;
        if (!ParseDouble(cell, &v) || !std::isfinite(v)) {
          ThrowData("csv row " + std::to_string(row_numbers[r]) +
                    ", column '" + header[c] + "': cannot parse '" + cell +
                    "' as a number");
        }
        matrix.push_back(v);
      }
    }
  }
  // One-hot slots are already 0/1; normalizing them is the identity unless
  // the category is constant, which maps to 0 like any constant column.
  matrix = NormalizeMinMax(matrix, dim);

  Dataset out(dim, label_values.size());
  for (size_t r = 0; r < rows.size(); ++r) {
    const bool sensitive =
        rows[r][sens_col] == Trim(schema.positive_sensitive_value);
    out.Add(std::span<const double>(matrix).subspan(r * dim, dim),
            label_index.at(rows[r][label_col]), sensitive);
  }
  return out;
}

Dataset LoadCsv(const std::string& path, const CsvSchema& schema) {
  return ParseCsv(ReadFile(path), schema);
}

std::string ToCanonicalCsv(const Dataset& data) {
  std::string out;
  for (size_t j = 0; j < data.feature_dim(); ++j) {
    out += 'f';
    out += std::to_string(j);
    out += ',';
  }
  out += "s,y\n";
  for (size_t i = 0; i < data.size(); ++i) {
    for (double v : data.features(i)) {
      out += FormatDouble17(v);
      out += ',';
    }
    out += data.sensitive(i) ? '1' : '0';
    out += ',';
    out += std::to_string(data.label(i));
    out += '\n';
  }
  return out;
}

void WriteCanonicalCsv(const Dataset& data, const std::string& path) {
  WriteFileAtomic(path, ToCanonicalCsv(data));
}

Dataset ParseCanonicalCsv(const std::string& text) {
  const auto lines = Lines(text);
  if (lines.empty()) ThrowData("canonical csv: empty file");
  const auto header = SplitCsvLine(lines[0]);
  if (header.size() < 3 || header[header.size() - 2] != "s" ||
      header.back() != "y") {
    ThrowData("canonical csv: header must be f0..f{d-1},s,y");
  }
  const size_t dim = header.size() - 2;
  for (size_t j = 0; j < dim; ++j) {
    if (header[j] != "f" + std::to_string(j)) {
      ThrowData("canonical csv: unexpected column '" + header[j] + "'");
    }
  }
  std::vector<std::vector<double>> feats;
  std::vector<size_t> labels;
  std::vector<bool> sens;
  size_t max_label = 1;
  for (size_t li = 1; li < lines.size(); ++li) {
    const auto fields = SplitCsvLine(lines[li]);
    if (fields.size() != header.size()) {
      ThrowData("canonical csv row " + std::to_string(li + 1) +
                ": wrong cell count");
    }
    std::vector<double> x(dim);
    for (size_t j = 0; j < dim; ++j) {
      if (!ParseDouble(fields[j], &x[j])) {
        ThrowData("canonical csv row " + std::to_string(li + 1) +
                  ", column '" + header[j] + "': bad number");
      }
    }
    uint64_t s = 0, y = 0;
    if (!ParseUint64(fields[dim], &s) || s > 1) {
      ThrowData("canonical csv row " + std::to_string(li + 1) +
                ", column 's': expected 0 or 1");
    }
    if (!ParseUint64(fields[dim + 1], &y)) {
      ThrowData("canonical csv row " + std::to_string(li + 1) +
                ", column 'y': bad label");
    }
    feats.push_back(std::move(x));
    labels.push_back(static_cast<size_t>(y));
    sens.push_back(s == 1);
    max_label = std::max(max_label, static_cast<size_t>(y));
  }
  Dataset out(dim, max_label + 1);
  for (size_t i = 0; i < feats.size(); ++i) out.Add(feats[i], labels[i], sens[i]);
  return out;
}

Dataset ReadCanonicalCsv(const std::string& path) {
  return ParseCanonicalCsv(ReadFile(path));
}

const char* PartitionModeName(PartitionMode m) {
  return m == PartitionMode::kIid ? "iid" : "dirichlet";
}

PartitionMode ParsePartitionMode(const std::string& name) {
  if (name == "iid") return PartitionMode::kIid;
  if (name == "dirichlet") return PartitionMode::kDirichlet;
  ThrowConfig("unknown partition mode '" + name + "'");
}

std::vector<std::vector<size_t>> PartitionIndices(const Dataset& train,
                                                  const PartitionSpec& spec) {
  const size_t k = spec.client_count;
  if (k < 2) ThrowConfig("partition needs at least two clients");
  if (train.size() < k * train.class_count()) {
    ThrowConfig("partition needs at least K*C = " +
                std::to_string(k * train.class_count()) + " samples, got " +
                std::to_string(train.size()));
  }
  Rng rng(spec.seed);
  std::vector<std::vector<size_t>> parts(k);

  if (spec.mode == PartitionMode::kIid) {
    std::vector<size_t> order(train.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.Shuffle(order);
    const size_t base = train.size() / k;
    const size_t extra = train.size() % k;
    size_t pos = 0;
    for (size_t c = 0; c < k; ++c) {
      const size_t n = base + (c < extra ? 1 : 0);
      parts[c].assign(order.begin() + static_cast<ptrdiff_t>(pos),
                      order.begin() + static_cast<ptrdiff_t>(pos + n));
      pos += n;
    }
  } else {
    if (!(spec.dirichlet_alpha > 0.0)) {
      ThrowConfig("dirichlet alpha must be positive");
    }
    for (size_t cls = 0; cls < train.class_count(); ++cls) {
      const auto p = rng.SymmetricDirichlet(spec.dirichlet_alpha, k);
      for (size_t i = 0; i < train.size(); ++i) {
        if (train.label(i) == cls) parts[rng.Categorical(p)].push_back(i);
      }
    }
    // Repair empty clients by moving one sample at a time from the largest.
    while (true) {
      auto empty = std::find_if(parts.begin(), parts.end(),
                                [](const auto& p) { return p.empty(); });
      if (empty == parts.end()) break;
      auto largest = std::max_element(
          parts.begin(), parts.end(),
          [](const auto& a, const auto& b) { return a.size() < b.size(); });
      empty->push_back(largest->back());
      largest->pop_back();
    }
  }
  for (auto& p : parts) std::sort(p.begin(), p.end());
  return parts;
}

std::vector<Dataset> Partition(const Dataset& train,
                               const PartitionSpec& spec) {
  std::vector<Dataset> out;
  for (const auto& idx : PartitionIndices(train, spec)) {
    out.push_back(train.Subset(idx));
  }
  return out;
}

Split TrainTestSplit(const Dataset& data, double test_fraction,
                     uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    ThrowConfig("test fraction must lie in (0, 1)");
  }
  Rng rng(seed);
  std::vector<size_t> train_idx, test_idx;
  for (size_t cls = 0; cls < data.class_count(); ++cls) {
    std::vector<size_t> members;
    for (size_t i = 0; i < data.size(); ++i) {
      if (data.label(i) == cls) members.push_back(i);
    }
    rng.Shuffle(members);
    const auto n_test = static_cast<size_t>(
        std::llround(test_fraction * static_cast<double>(members.size())));
    for (size_t i = 0; i < members.size(); ++i) {
      (i < n_test ? test_idx : train_idx).push_back(members[i]);
    }
  }
  if (train_idx.empty() || test_idx.empty()) {
    ThrowConfig("train/test split leaves an empty side");
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  return {data.Subset(train_idx), data.Subset(test_idx)};
}

}  // namespace fedtrust::data
