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

#include "mcgen/table.hpp"

#include <gtest/gtest.h>

#include "matrix_testing.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace mcgen {
namespace {

std::string write_temp_csv(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path, std::ios::binary);
  out << text;
  return path.string();
}

TEST(LoadCsvTest, ShapePassThrough) {
  const auto path =
      write_temp_csv("shape.csv", "x,y\n1,a\n2,b\n3,a\n");
  const Table t = load_csv(path);
  EXPECT_EQ(t.n_rows(), 3u);
  EXPECT_EQ(t.n_cols(), 2u);
  EXPECT_EQ(t.label_column, 1u);
}

TEST(LoadCsvTest, RaggedRowNamesTheRow) {
  const auto path = write_temp_csv("ragged.csv", "a,b,c\n1,2\n");
  try {
    load_csv(path);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos);
  }
}

TEST(LoadCsvTest, EmptyFileFails) {
  const auto path = write_temp_csv("empty.csv", "");
  EXPECT_THROW(load_csv(path), ValidationError);
}

TEST(LoadCsvTest, KindInference) {
  const auto path =
      write_temp_csv("kinds.csv", "x,y,label\n1,a,0\n2,b,1\n3,a,0\n");
  const Table t = load_csv(path);
  EXPECT_EQ(t.column_kinds[0], ColumnKind::kNumeric);
  EXPECT_EQ(t.column_kinds[1], ColumnKind::kCategorical);
  // the label column is categorical even though it parses as numeric
  EXPECT_EQ(t.column_kinds[2], ColumnKind::kCategorical);
}

TEST(LoadCsvTest, NonFiniteCellsAreNotNumeric) {
  const auto path =
      write_temp_csv("inf.csv", "x,y\n1,0\ninf,1\n3,0\n");
  const Table t = load_csv(path);
  EXPECT_EQ(t.column_kinds[0], ColumnKind::kCategorical);
}

TEST(LoadCsvTest, MissingValueInNumericColumnFails) {
  const auto path = write_temp_csv("missing.csv", "x,y\n1,0\n,1\n");
  EXPECT_THROW(load_csv(path), ValidationError);
}

TEST(LoadCsvTest, LabelColumnByName) {
  const auto path =
      write_temp_csv("named.csv", "label,x,y\n0,1,2\n1,3,4\n");
  const Table t = load_csv(path, std::string("label"));
  EXPECT_EQ(t.label_column, 0u);
  EXPECT_THROW(load_csv(path, std::string("nope")), ValidationError);
}

Table tiny_categorical() {
  Table t;
  t.column_names = {"color", "x", "label"};
  t.column_kinds = {ColumnKind::kCategorical, ColumnKind::kNumeric,
                    ColumnKind::kCategorical};
  t.rows = {{"red", "1", "0"}, {"blue", "2", "1"}, {"red", "3", "0"}};
  t.label_column = 2;
  return t;
}

TEST(OneHotTest, ExpandsByFirstAppearance) {
  const Table encoded = one_hot_encode(tiny_categorical());
  ASSERT_EQ(encoded.n_cols(), 4u);
  EXPECT_EQ(encoded.column_names[0], "color=red");
  EXPECT_EQ(encoded.column_names[1], "color=blue");
  EXPECT_EQ(encoded.rows[0][0], "1");
  EXPECT_EQ(encoded.rows[1][0], "0");
  EXPECT_EQ(encoded.rows[2][0], "1");
  EXPECT_EQ(encoded.rows[0][1], "0");
  EXPECT_EQ(encoded.rows[1][1], "1");
  EXPECT_EQ(encoded.rows[2][1], "0");
  EXPECT_EQ(encoded.label_column, 3u);
}

TEST(OneHotTest, NoCategoricalFeaturesIsIdentity) {
  Table t;
  t.column_names = {"x", "y", "label"};
  t.column_kinds = {ColumnKind::kNumeric, ColumnKind::kNumeric,
                    ColumnKind::kCategorical};
  t.rows = {{"1", "2", "a"}, {"3", "4", "b"}};
  t.label_column = 2;
  const Table encoded = one_hot_encode(t);
  EXPECT_EQ(encoded.column_names, t.column_names);
  EXPECT_EQ(encoded.rows, t.rows);
}

// Each encoded group sums to exactly 1 per row.
TEST(OneHotTest, GroupsPartitionEveryRow) {
  Table t;
  t.column_names = {"c", "x", "label"};
  t.column_kinds = {ColumnKind::kCategorical, ColumnKind::kNumeric,
                    ColumnKind::kCategorical};
  t.rows = {{"a", "1", "0"}, {"b", "2", "0"}, {"c", "3", "1"},
            {"a", "4", "1"}, {"c", "5", "0"}};
  t.label_column = 2;
  const Table encoded = one_hot_encode(t);
  ASSERT_EQ(encoded.n_cols(), 5u);
  for (const auto& row : encoded.rows) {
    int sum = 0;
    for (std::size_t c = 0; c < 3; ++c) sum += row[c] == "1" ? 1 : 0;
    EXPECT_EQ(sum, 1);
  }
}

TEST(OneHotTest, SingleValueColumnWarns) {
  Table t = tiny_categorical();
  for (auto& row : t.rows) row[0] = "red";
  std::vector<std::string> warnings;
  const Table encoded = one_hot_encode(t, &warnings);
  EXPECT_EQ(encoded.n_cols(), 3u);  // one constant column + x + label
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("single distinct value"), std::string::npos);
}

Table numeric_table(const std::vector<double>& column) {
  Table t;
  t.column_names = {"x", "y", "label"};
  t.column_kinds = {ColumnKind::kNumeric, ColumnKind::kNumeric,
                    ColumnKind::kCategorical};
  for (std::size_t i = 0; i < column.size(); ++i) {
    t.rows.push_back({csv::format_number(column[i]),
                      csv::format_number(static_cast<double>(i)), "0"});
  }
  t.label_column = 2;
  return t;
}

TEST(ScaleTest, EndpointsAndMidpoint) {
  const ScaledTable s = scale_to_unit(numeric_table({0.0, 5.0, 10.0}));
  EXPECT_DOUBLE_EQ(s.values(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(s.values(1, 0), 0.0);
  EXPECT_DOUBLE_EQ(s.values(2, 0), 1.0);
}

TEST(ScaleTest, AlreadyUnitRangeUnchanged) {
  const ScaledTable s = scale_to_unit(numeric_table({-1.0, 1.0}));
  EXPECT_DOUBLE_EQ(s.values(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(s.values(1, 0), 1.0);
}

TEST(ScaleTest, ConstantColumnMapsToZeroAndIsFlagged) {
  const ScaledTable s = scale_to_unit(numeric_table({7.0, 7.0, 7.0}));
  for (int r = 0; r < 3; ++r) EXPECT_DOUBLE_EQ(s.values(r, 0), 0.0);
  ASSERT_EQ(s.constant_features.size(), 1u);
  EXPECT_EQ(s.constant_features[0], 0u);
}

// scale followed by inverse recovers the input on non-constant features.
TEST(ScaleTest, InverseRoundTrip) {
  Rng rng = Rng::substream(21, Stream::kTest, 0);
  Table t;
  t.column_names = {"a", "b", "c", "label"};
  t.column_kinds = {ColumnKind::kNumeric, ColumnKind::kNumeric,
                    ColumnKind::kNumeric, ColumnKind::kCategorical};
  t.label_column = 3;
  Eigen::MatrixXd original(40, 3);
  for (int r = 0; r < 40; ++r) {
    std::vector<std::string> row;
    for (int c = 0; c < 3; ++c) {
      original(r, c) = (rng.uniform01() - 0.3) * std::pow(10.0, c);
      row.push_back(csv::format_number(original(r, c)));
    }
    row.push_back("0");
    t.rows.push_back(row);
  }
  const ScaledTable s = scale_to_unit(t);
  const Eigen::MatrixXd recovered = inverse_scale(s.values, s.ranges);
  EXPECT_LT((recovered - original).cwiseAbs().maxCoeff(), 1e-12);
}

ScaledTable labeled_rows(const std::vector<std::string>& labels) {
  ScaledTable s;
  s.feature_names = {"x", "y"};
  s.values.resize(static_cast<Eigen::Index>(labels.size()), 2);
  for (Eigen::Index r = 0; r < s.values.rows(); ++r) {
    s.values(r, 0) = static_cast<double>(r);
    s.values(r, 1) = -static_cast<double>(r);
  }
  s.labels = labels;
  return s;
}

TEST(SplitByLabelTest, PartitionsRows) {
  const auto split = split_by_label(labeled_rows({"A", "A", "B"}));
  ASSERT_EQ(split.size(), 2u);
  EXPECT_EQ(split.at("A").n_rows(), 2u);
  EXPECT_EQ(split.at("B").n_rows(), 1u);
  EXPECT_DOUBLE_EQ(split.at("B").values(0, 0), 2.0);
}

TEST(SplitByLabelTest, SingleClassIsIdentity) {
  const auto split = split_by_label(labeled_rows({"A", "A", "A"}));
  ASSERT_EQ(split.size(), 1u);
  EXPECT_EQ(split.at("A").n_rows(), 3u);
}

TEST(SplitByLabelTest, NoEmptyClassesEmitted) {
  const auto split = split_by_label(labeled_rows({"A", "A"}));
  EXPECT_EQ(split.count("B"), 0u);
}

TEST(SplitTrainSeedTest, FractionSizes) {
  std::vector<std::string> labels(100, "A");
  const auto [seed, holdout] = split_train_seed(
      labeled_rows(labels), SplitSpec::for_scenario(1, 77));
  EXPECT_EQ(seed.n_rows(), 20u);
  EXPECT_EQ(holdout.n_rows(), 80u);
}

TEST(SplitTrainSeedTest, DeterministicForSameSeed) {
  std::vector<std::string> labels(10, "A");
  const ScaledTable s = labeled_rows(labels);
  const SplitSpec spec = SplitSpec::for_scenario(2, 123);
  const auto [seed1, holdout1] = split_train_seed(s, spec);
  const auto [seed2, holdout2] = split_train_seed(s, spec);
  EXPECT_MATRIX_EQ(seed1.values, seed2.values);
  EXPECT_MATRIX_EQ(holdout1.values, holdout2.values);
}

TEST(SplitTrainSeedTest, StratifiedPerClass) {
  std::vector<std::string> labels;
  for (int i = 0; i < 50; ++i) labels.push_back("A");
  for (int i = 0; i < 50; ++i) labels.push_back("B");
  const auto [seed, holdout] = split_train_seed(
      labeled_rows(labels), SplitSpec::for_scenario(1, 9));
  std::map<std::string, int> counts;
  for (const auto& label : seed.labels) ++counts[label];
  EXPECT_EQ(counts["A"], 10);
  EXPECT_EQ(counts["B"], 10);
}

// Seed and holdout are disjoint and their union equals the input as a
// multiset of rows.
TEST(SplitTrainSeedTest, UnionIsInputMultiset) {
  std::vector<std::string> labels;
  for (int i = 0; i < 23; ++i) labels.push_back(i % 3 == 0 ? "A" : "B");
  const ScaledTable s = labeled_rows(labels);
  const auto [seed, holdout] =
      split_train_seed(s, SplitSpec::for_scenario(1, 4));
  EXPECT_EQ(seed.n_rows() + holdout.n_rows(), s.n_rows());
  std::multiset<double> input_keys, output_keys;
  for (std::size_t r = 0; r < s.n_rows(); ++r) {
    input_keys.insert(s.values(static_cast<Eigen::Index>(r), 0));
  }
  for (std::size_t r = 0; r < seed.n_rows(); ++r) {
    output_keys.insert(seed.values(static_cast<Eigen::Index>(r), 0));
  }
  for (std::size_t r = 0; r < holdout.n_rows(); ++r) {
    output_keys.insert(holdout.values(static_cast<Eigen::Index>(r), 0));
  }
  EXPECT_EQ(input_keys, output_keys);
}

TEST(SplitTrainSeedTest, SingleSampleClassGoesToLargerSide) {
  std::vector<std::string> labels(9, "A");
  labels.push_back("B");
  std::vector<std::string> warnings;
  const auto [seed, holdout] = split_train_seed(
      labeled_rows(labels), SplitSpec::for_scenario(1, 5), &warnings);
  int b_in_holdout = 0;
  for (const auto& label : holdout.labels) b_in_holdout += label == "B";
  EXPECT_EQ(b_in_holdout, 1);  // fraction 0.2: larger side is the holdout
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("one sample"), std::string::npos);
}

}  // namespace
}  // namespace mcgen
