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

#include "mcgen/evaluation.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <string>
#include <vector>

#include "mcgen/rng.hpp"

namespace mcgen {
namespace {

TEST(F1Test, PerfectPredictions) {
  const std::vector<std::string> y{"1", "0", "1", "0"};
  const F1Result r = f1_score(y, y, "1");
  EXPECT_DOUBLE_EQ(r.precision, 1.0);
  EXPECT_DOUBLE_EQ(r.recall, 1.0);
  EXPECT_DOUBLE_EQ(r.f1, 1.0);
}

// TP=1, FP=1, FN=1 -> precision = recall = F1 = 0.5.
TEST(F1Test, BalancedErrors) {
  const std::vector<std::string> pred{"1", "1", "0"};
  const std::vector<std::string> truth{"1", "0", "1"};
  const F1Result r = f1_score(pred, truth, "1");
  EXPECT_DOUBLE_EQ(r.precision, 0.5);
  EXPECT_DOUBLE_EQ(r.recall, 0.5);
  EXPECT_DOUBLE_EQ(r.f1, 0.5);
}

TEST(F1Test, AllNegativePredictionsScoreZero) {
  const std::vector<std::string> pred{"0", "0", "0"};
  const std::vector<std::string> truth{"1", "0", "1"};
  const F1Result r = f1_score(pred, truth, "1");
  EXPECT_DOUBLE_EQ(r.precision, 0.0);
  EXPECT_DOUBLE_EQ(r.recall, 0.0);
  EXPECT_DOUBLE_EQ(r.f1, 0.0);
}

TEST(F1Test, EmptyInputFails) {
  EXPECT_THROW(f1_score({}, {}, "1"), ValidationError);
  EXPECT_THROW(f1_score({"1"}, {"1", "0"}, "1"), ValidationError);
}

// F1 is the harmonic mean of precision and recall whenever both are
// nonzero, and the score ignores the order of (prediction, truth) pairs.
TEST(F1Test, HarmonicIdentityAndPermutationInvariance) {
  Rng rng = Rng::substream(61, Stream::kTest, 0);
  std::vector<std::string> pred, truth;
  for (int i = 0; i < 200; ++i) {
    pred.push_back(rng.uniform01() < 0.4 ? "1" : "0");
    truth.push_back(rng.uniform01() < 0.5 ? "1" : "0");
  }
  const F1Result r = f1_score(pred, truth, "1");
  if (r.precision + r.recall > 0.0) {
    EXPECT_NEAR(r.f1, 2.0 * r.precision * r.recall / (r.precision + r.recall),
                1e-12);
  }

  std::vector<std::size_t> perm(pred.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  shuffle(perm, rng);
  std::vector<std::string> pred2(pred.size()), truth2(truth.size());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    pred2[i] = pred[perm[i]];
    truth2[i] = truth[perm[i]];
  }
  const F1Result r2 = f1_score(pred2, truth2, "1");
  EXPECT_DOUBLE_EQ(r.f1, r2.f1);
  EXPECT_DOUBLE_EQ(r.precision, r2.precision);
  EXPECT_DOUBLE_EQ(r.recall, r2.recall);
}

// Swapping the positive class swaps the roles of FP and FN.
TEST(F1Test, SwappedPositiveClassTransposesErrors) {
  const std::vector<std::string> pred{"1", "1", "0", "0", "1"};
  const std::vector<std::string> truth{"1", "0", "1", "0", "0"};
  const F1Result pos = f1_score(pred, truth, "1");
  const F1Result neg = f1_score(pred, truth, "0");
  EXPECT_EQ(pos.fp, neg.fn);
  EXPECT_EQ(pos.fn, neg.fp);
  EXPECT_EQ(pos.tp, neg.tn);
}

TEST(TrainLogRegTest, SeparableTwoPoints) {
  Eigen::MatrixXd x(2, 2);
  x << -1.0, -1.0, 1.0, 1.0;
  const std::vector<std::string> y{"0", "1"};
  const LogRegModel model = train_logreg(x, y, "1");
  const F1Result r = f1_score(predict(model, x), y, "1");
  EXPECT_DOUBLE_EQ(r.f1, 1.0);
}

TEST(TrainLogRegTest, ZeroIterationsPredictsPositiveUniformly) {
  Eigen::MatrixXd x(4, 2);
  x << 1, 2, -3, 4, 0, 0, 2, -2;
  const std::vector<std::string> y{"0", "1", "0", "1"};
  LogRegConfig config;
  config.max_iterations = 0;
  const LogRegModel model = train_logreg(x, y, "1", config);
  EXPECT_TRUE(model.weights.isZero(0.0));
  EXPECT_EQ(model.bias, 0.0);
  for (const auto& p : predict(model, x)) EXPECT_EQ(p, "1");
}

// For a small enough learning rate, full-batch gradient descent cannot
// increase the loss.
TEST(TrainLogRegTest, LossIsNonIncreasingForSmallSteps) {
  Rng rng = Rng::substream(62, Stream::kTest, 0);
  Eigen::MatrixXd x(60, 3);
  std::vector<std::string> y;
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const bool positive = r % 2 == 0;
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      x(r, c) = rng.normal() + (positive ? 0.8 : -0.8);
    }
    y.push_back(positive ? "1" : "0");
  }
  LogRegConfig config;
  config.learning_rate = 0.05;
  config.max_iterations = 200;
  config.tolerance = 0.0;  // run all iterations
  std::vector<double> trace;
  train_logreg(x, y, "1", config, &trace);
  ASSERT_GT(trace.size(), 1u);
  for (std::size_t i = 1; i < trace.size(); ++i) {
    EXPECT_LE(trace[i], trace[i - 1] + 1e-12);
  }
}

TEST(TrainLogRegTest, SingleClassFailsNamingTheClass) {
  Eigen::MatrixXd x(3, 2);
  x.setZero();
  const std::vector<std::string> y{"A", "A", "A"};
  try {
    train_logreg(x, y, "A");
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("'A'"), std::string::npos);
  }
}

ScaledTable gaussian_dataset(std::size_t n, double separation,
                             std::uint64_t seed) {
  Rng rng = Rng::substream(seed, Stream::kTest, 1);
  ScaledTable s;
  s.feature_names = {"a", "b", "c"};
  s.values.resize(static_cast<Eigen::Index>(n), 3);
  for (Eigen::Index r = 0; r < s.values.rows(); ++r) {
    const bool positive = rng.uniform01() < 0.5;
    for (Eigen::Index c = 0; c < 3; ++c) {
      s.values(r, c) = rng.normal() + (positive ? separation : -separation);
    }
    s.labels.push_back(positive ? "1" : "0");
  }
  return s;
}

TEST(RunScenarioTest, DeterministicReports) {
  const ScaledTable data = gaussian_dataset(120, 1.0, 5);
  EvalConfig config;
  config.scenario = 2;
  config.privacy.epsilon_total = 1.0;
  config.privacy.k.is_percentage = true;
  config.privacy.k.percentage = 50.0;
  config.privacy.rng_seed = 42;
  config.positive_class = "1";
  const EvalReport a = run_scenario(data, config, 1);
  const EvalReport b = run_scenario(data, config, 1);
  EXPECT_EQ(a.per_round_f1, b.per_round_f1);
  EXPECT_EQ(a.f1, b.f1);
  EXPECT_EQ(a.failed_rounds, 0u);
}

TEST(RunScenarioTest, ScenarioFractionsControlSplitSizes) {
  const ScaledTable data = gaussian_dataset(100, 1.0, 6);
  EvalConfig config;
  config.positive_class = "1";
  config.privacy.rng_seed = 3;

  config.scenario = 1;
  auto [synth1, holdout1] = synthesis_round(data, config, 9);
  EXPECT_EQ(synth1.n_rows() + holdout1.n_rows(), 100u);
  EXPECT_NEAR(static_cast<double>(synth1.n_rows()), 20.0, 1.0);

  config.scenario = 2;
  auto [synth2, holdout2] = synthesis_round(data, config, 9);
  EXPECT_NEAR(static_cast<double>(synth2.n_rows()), 80.0, 1.0);
}

// The baseline protocol passes the seed through, so with a well-separated
// dataset both scenarios should classify nearly perfectly.
TEST(RunScenarioTest, BaselineOnSeparableData) {
  const ScaledTable data = gaussian_dataset(200, 2.0, 7);
  EvalConfig config;
  config.scenario = 2;
  config.baseline = true;
  config.positive_class = "1";
  config.privacy.rng_seed = 17;
  const EvalReport report = run_scenario(data, config, 5);
  EXPECT_EQ(report.failed_rounds, 0u);
  EXPECT_GT(report.f1, 0.95);
}

// A class whose rows all land in the seed leaves the training side with a
// single class in scenario 1; the round is recorded as failed and excluded.
TEST(RunScenarioTest, FailedRoundsAreRecordedAndExcluded) {
  ScaledTable data = gaussian_dataset(40, 1.0, 9);
  data.labels.assign(data.labels.size(), "0");
  data.labels[0] = "1";
  data.labels[1] = "1";
  EvalConfig config;
  config.scenario = 1;
  config.seed_fraction = 0.9;  // both "1" rows go to the seed side
  config.privacy.epsilon_total = 1.0;
  config.privacy.k.is_percentage = true;
  config.privacy.k.percentage = 100.0;
  config.privacy.rng_seed = 31;
  config.positive_class = "1";
  const EvalReport report = run_scenario(data, config, 3);
  EXPECT_EQ(report.failed_rounds, 3u);
  EXPECT_EQ(report.per_round_f1.size(), 0u);
  ASSERT_EQ(report.round_errors.size(), 3u);
  EXPECT_NE(report.round_errors[0].find("single class"), std::string::npos);
}

TEST(RunScenarioTest, SyntheticPathRunsEndToEnd) {
  const ScaledTable data = gaussian_dataset(160, 1.5, 8);
  EvalConfig config;
  config.scenario = 2;
  config.privacy.epsilon_total = std::numeric_limits<double>::infinity();
  config.privacy.k.is_percentage = true;
  config.privacy.k.percentage = 100.0;
  config.privacy.rng_seed = 23;
  config.positive_class = "1";
  const EvalReport report = run_scenario(data, config, 3);
  EXPECT_EQ(report.failed_rounds, 0u);
  EXPECT_GT(report.f1, 0.8);  // noise-free synthesis of separable data
}

}  // namespace
}  // namespace mcgen
