// Copyright 2026 The mcgen Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MCGEN_TABLE_HPP_
#define MCGEN_TABLE_HPP_

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mcgen/csv.hpp"
#include "mcgen/error.hpp"
#include "mcgen/rng.hpp"

namespace mcgen {

enum class ColumnKind { kNumeric, kCategorical };

// Raw tabular dataset as loaded from CSV. Cells are kept as strings; numeric
// columns are validated at load time so every later stage can parse without
// re-checking.
struct Table {
  std::vector<std::string> column_names;
  std::vector<ColumnKind> column_kinds;
  std::vector<std::vector<std::string>> rows;
  std::size_t label_column = 0;

  std::size_t n_rows() const { return rows.size(); }
  std::size_t n_cols() const { return column_names.size(); }
};

// Numeric feature matrix plus class labels. `ranges` holds the per-feature
// (min, max) fitted by scaling; it is empty until fit_scaling/scale_to_unit
// runs. Values transformed with a fit from other data (e.g. a holdout scaled
// with seed statistics) may fall outside [-1, 1]; bounds are enforced where
// the sensitivity argument needs them, in the sanitizer.
struct ScaledTable {
  std::vector<std::string> feature_names;
  Eigen::MatrixXd values;  // n x d, one row per sample
  std::vector<std::pair<double, double>> ranges;
  std::vector<std::size_t> constant_features;  // min == max, mapped to zero
  std::vector<std::string> labels;

  std::size_t n_rows() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t n_features() const {
    return static_cast<std::size_t>(values.cols());
  }
  bool is_scaled() const { return !ranges.empty(); }
};

// Parameters of the seed/holdout split for the two evaluation scenarios.
struct SplitSpec {
  double seed_fraction = 0.2;
  int scenario = 1;
  std::uint64_t rng_seed = 0;

  static SplitSpec for_scenario(int scenario, std::uint64_t rng_seed,
                                std::optional<double> fraction = {}) {
    if (scenario != 1 && scenario != 2) {
      throw ValidationError("SplitSpec", "scenario must be 1 or 2");
    }
    SplitSpec spec;
    spec.scenario = scenario;
    spec.seed_fraction = fraction.value_or(scenario == 1 ? 0.20 : 0.80);
    spec.rng_seed = rng_seed;
    if (spec.seed_fraction <= 0.0 || spec.seed_fraction >= 1.0) {
      throw ValidationError("SplitSpec", "seed_fraction must lie in (0, 1)");
    }
    return spec;
  }
};

// Loads an RFC 4180 CSV with a mandatory header row. A column is numeric iff
// every non-empty cell parses as a finite number; the label column is always
// treated as categorical. Numeric columns must have no empty cells (missing
// values are out of scope).
inline Table load_csv(const std::string& path,
                      const std::optional<std::string>& label_name = {}) {
  const auto records = csv::read_file(path);
  if (records.empty()) {
    throw ValidationError("load_csv", "empty file: " + path);
  }
  Table table;
  table.column_names = records[0];
  const std::size_t d = table.column_names.size();
  if (d == 0) {
    throw ValidationError("load_csv", "header row has no columns");
  }

  table.rows.assign(records.begin() + 1, records.end());
  if (table.rows.empty()) {
    throw ValidationError("load_csv", "no data rows in " + path);
  }
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (table.rows[r].size() != d) {
      throw ValidationError(
          "load_csv", "ragged row " + std::to_string(r + 2) + " in " + path +
                          ": expected " + std::to_string(d) + " fields, got " +
                          std::to_string(table.rows[r].size()));
    }
  }

  if (label_name.has_value()) {
    const auto it = std::find(table.column_names.begin(),
                              table.column_names.end(), *label_name);
    if (it == table.column_names.end()) {
      throw ValidationError("load_csv", "label column not found: " +
                                            *label_name);
    }
    table.label_column =
        static_cast<std::size_t>(it - table.column_names.begin());
  } else {
    table.label_column = d - 1;
  }

  table.column_kinds.assign(d, ColumnKind::kNumeric);
  for (std::size_t c = 0; c < d; ++c) {
    if (c == table.label_column) {
      table.column_kinds[c] = ColumnKind::kCategorical;
      continue;
    }
    bool numeric = true;
    bool any_non_empty = false;
    for (const auto& row : table.rows) {
      if (row[c].empty()) continue;
      any_non_empty = true;
      if (!csv::parse_number(row[c]).has_value()) {
        numeric = false;
        break;
      }
    }
    table.column_kinds[c] =
        (numeric && any_non_empty) ? ColumnKind::kNumeric
                                   : ColumnKind::kCategorical;
    if (table.column_kinds[c] == ColumnKind::kNumeric) {
      for (std::size_t r = 0; r < table.rows.size(); ++r) {
        if (table.rows[r][c].empty()) {
          throw ValidationError(
              "load_csv", "empty cell in numeric column '" +
                              table.column_names[c] + "' at row " +
                              std::to_string(r + 2));
        }
      }
    }
  }
  return table;
}

// Replaces each categorical feature column having c distinct values by c
// binary columns ordered by first appearance. The label column and numeric
// columns pass through unchanged.
inline Table one_hot_encode(const Table& table,
                            std::vector<std::string>* warnings = nullptr) {
  Table out;
  out.rows.resize(table.n_rows());

  for (std::size_t c = 0; c < table.n_cols(); ++c) {
    const bool is_label = c == table.label_column;
    if (is_label || table.column_kinds[c] == ColumnKind::kNumeric) {
      if (is_label) out.label_column = out.column_names.size();
      out.column_names.push_back(table.column_names[c]);
      out.column_kinds.push_back(is_label ? ColumnKind::kCategorical
                                          : ColumnKind::kNumeric);
      for (std::size_t r = 0; r < table.n_rows(); ++r) {
        out.rows[r].push_back(table.rows[r][c]);
      }
      continue;
    }

    std::vector<std::string> categories;  // order of first appearance
    for (const auto& row : table.rows) {
      if (std::find(categories.begin(), categories.end(), row[c]) ==
          categories.end()) {
        categories.push_back(row[c]);
      }
    }
    if (categories.size() == 1 && warnings != nullptr) {
      warnings->push_back("one_hot_encode: column '" + table.column_names[c] +
                          "' has a single distinct value; encoded as one "
                          "constant column");
    }
    for (const auto& category : categories) {
      out.column_names.push_back(table.column_names[c] + "=" + category);
      out.column_kinds.push_back(ColumnKind::kNumeric);
      for (std::size_t r = 0; r < table.n_rows(); ++r) {
        out.rows[r].push_back(table.rows[r][c] == category ? "1" : "0");
      }
    }
  }
  return out;
}

// Extracts the numeric feature matrix and labels from a fully numeric table
// (run one_hot_encode first). No scaling is applied yet.
inline ScaledTable to_features(const Table& table) {
  for (std::size_t c = 0; c < table.n_cols(); ++c) {
    if (c != table.label_column &&
        table.column_kinds[c] != ColumnKind::kNumeric) {
      throw ValidationError("to_features",
                            "column '" + table.column_names[c] +
                                "' is categorical; run one_hot_encode first");
    }
  }
  ScaledTable s;
  const std::size_t n = table.n_rows();
  const std::size_t d = table.n_cols() - 1;
  if (d < 2) {
    throw ValidationError("to_features",
                          "need at least two feature columns, got " +
                              std::to_string(d));
  }
  s.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  s.labels.reserve(n);
  for (std::size_t c = 0, f = 0; c < table.n_cols(); ++c) {
    if (c == table.label_column) continue;
    s.feature_names.push_back(table.column_names[c]);
    for (std::size_t r = 0; r < n; ++r) {
      const auto value = csv::parse_number(table.rows[r][c]);
      if (!value.has_value()) {
        throw InternalError("to_features: unparseable cell in validated "
                            "numeric column '" +
                            table.column_names[c] + "'");
      }
      s.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(f)) =
          *value;
    }
    ++f;
  }
  for (std::size_t r = 0; r < n; ++r) {
    s.labels.push_back(table.rows[r][table.label_column]);
  }
  return s;
}

// Computes per-feature (min, max) from the given table's own values.
inline std::vector<std::pair<double, double>> fit_scaling(
    const ScaledTable& s) {
  std::vector<std::pair<double, double>> ranges;
  ranges.reserve(s.n_features());
  for (std::size_t f = 0; f < s.n_features(); ++f) {
    const auto col = s.values.col(static_cast<Eigen::Index>(f));
    ranges.emplace_back(col.minCoeff(), col.maxCoeff());
  }
  return ranges;
}

// Maps each feature affinely onto [-1, 1] by x -> 2(x-min)/(max-min) - 1
// using the supplied ranges. Constant features (max == min) map to zero and
// are recorded in constant_features.
inline ScaledTable apply_scaling(
    const ScaledTable& s,
    const std::vector<std::pair<double, double>>& ranges) {
  if (ranges.size() != s.n_features()) {
    throw ValidationError("apply_scaling",
                          "range count does not match feature count");
  }
  ScaledTable out = s;
  out.ranges = ranges;
  out.constant_features.clear();
  for (std::size_t f = 0; f < s.n_features(); ++f) {
    const auto [lo, hi] = ranges[f];
    if (!(lo <= hi)) {
      throw ValidationError("apply_scaling", "min > max for feature '" +
                                                 s.feature_names[f] + "'");
    }
    const auto col = static_cast<Eigen::Index>(f);
    if (hi == lo) {
      out.values.col(col).setZero();
      out.constant_features.push_back(f);
    } else {
      out.values.col(col) =
          2.0 * (s.values.col(col).array() - lo) / (hi - lo) - 1.0;
    }
  }
  return out;
}

// Fit-and-apply on one table: the scale_to_unit operation.
inline ScaledTable scale_to_unit(const Table& table) {
  const ScaledTable raw = to_features(table);
  return apply_scaling(raw, fit_scaling(raw));
}

// Inverse of apply_scaling: x = (v+1)/2 * (max-min) + min. Constant features
// recover their original value regardless of the stored coordinate.
inline Eigen::MatrixXd inverse_scale(
    const Eigen::MatrixXd& values,
    const std::vector<std::pair<double, double>>& ranges) {
  if (ranges.size() != static_cast<std::size_t>(values.cols())) {
    throw ValidationError("inverse_scale",
                          "range count does not match feature count");
  }
  Eigen::MatrixXd out = values;
  for (std::size_t f = 0; f < ranges.size(); ++f) {
    const auto [lo, hi] = ranges[f];
    const auto col = static_cast<Eigen::Index>(f);
    if (hi == lo) {
      out.col(col).setConstant(lo);
    } else {
      out.col(col) = (values.col(col).array() + 1.0) / 2.0 * (hi - lo) + lo;
    }
  }
  return out;
}

namespace detail {

inline ScaledTable take_rows(const ScaledTable& s,
                             const std::vector<std::size_t>& indices) {
  ScaledTable out;
  out.feature_names = s.feature_names;
  out.ranges = s.ranges;
  out.constant_features = s.constant_features;
  out.values.resize(static_cast<Eigen::Index>(indices.size()),
                    s.values.cols());
  out.labels.reserve(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    out.values.row(static_cast<Eigen::Index>(i)) =
        s.values.row(static_cast<Eigen::Index>(indices[i]));
    out.labels.push_back(s.labels[indices[i]]);
  }
  return out;
}

}  // namespace detail

// Partitions rows by class label. Output tables preserve row order; classes
// absent from the input produce no entry.
inline std::map<std::string, ScaledTable> split_by_label(
    const ScaledTable& s) {
  std::map<std::string, std::vector<std::size_t>> by_label;
  for (std::size_t r = 0; r < s.n_rows(); ++r) {
    by_label[s.labels[r]].push_back(r);
  }
  std::map<std::string, ScaledTable> out;
  for (const auto& [label, indices] : by_label) {
    out.emplace(label, detail::take_rows(s, indices));
  }
  return out;
}

// Stratified random seed/holdout split, reproducible from spec.rng_seed.
// Each class contributes round(seed_fraction * class_size) rows to the seed
// side; a single-sample class goes entirely to the larger side and is
// reported in `warnings`.
inline std::pair<ScaledTable, ScaledTable> split_train_seed(
    const ScaledTable& s, const SplitSpec& spec,
    std::vector<std::string>* warnings = nullptr) {
  if (spec.seed_fraction <= 0.0 || spec.seed_fraction >= 1.0) {
    throw ValidationError("split_train_seed",
                          "seed_fraction must lie in (0, 1)");
  }
  if (s.n_rows() < 2) {
    throw ValidationError("split_train_seed", "need at least two rows");
  }

  std::map<std::string, std::vector<std::size_t>> by_label;
  for (std::size_t r = 0; r < s.n_rows(); ++r) {
    by_label[s.labels[r]].push_back(r);
  }

  std::vector<std::size_t> seed_rows;
  std::vector<std::size_t> holdout_rows;
  std::uint64_t class_index = 0;
  for (const auto& [label, indices] : by_label) {
    Rng rng = Rng::substream(spec.rng_seed, Stream::kSplit, class_index++);
    if (indices.size() == 1) {
      const bool to_seed = spec.seed_fraction >= 0.5;
      (to_seed ? seed_rows : holdout_rows).push_back(indices[0]);
      if (warnings != nullptr) {
        warnings->push_back("split_train_seed: class '" + label +
                            "' has one sample; assigned to the " +
                            (to_seed ? "seed" : "holdout") + " side");
      }
      continue;
    }
    std::vector<std::size_t> shuffled = indices;
    shuffle(shuffled, rng);
    const auto take = static_cast<std::size_t>(
        std::llround(spec.seed_fraction * static_cast<double>(indices.size())));
    for (std::size_t i = 0; i < shuffled.size(); ++i) {
      (i < take ? seed_rows : holdout_rows).push_back(shuffled[i]);
    }
  }
  std::sort(seed_rows.begin(), seed_rows.end());
  std::sort(holdout_rows.begin(), holdout_rows.end());
  return {detail::take_rows(s, seed_rows), detail::take_rows(s, holdout_rows)};
}

}  // namespace mcgen

#endif  // MCGEN_TABLE_HPP_
