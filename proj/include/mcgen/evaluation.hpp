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

#ifndef MCGEN_EVALUATION_HPP_
#define MCGEN_EVALUATION_HPP_

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mcgen/error.hpp"
#include "mcgen/generator.hpp"
#include "mcgen/table.hpp"

namespace mcgen {

struct F1Result {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

// Precision, recall and F1 for a binary task with a designated positive
// class. Zero-division conventions: no positive predictions -> precision 0;
// no positive truths -> recall 0; precision + recall = 0 -> F1 0.
inline F1Result f1_score(const std::vector<std::string>& predictions,
                         const std::vector<std::string>& truth,
                         const std::string& positive_class) {
  if (predictions.empty() || predictions.size() != truth.size()) {
    throw ValidationError("f1_score",
                          "predictions and truth must be nonempty and equal "
                          "length");
  }
  F1Result r;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const bool predicted = predictions[i] == positive_class;
    const bool actual = truth[i] == positive_class;
    if (predicted && actual) ++r.tp;
    else if (predicted && !actual) ++r.fp;
    else if (!predicted && actual) ++r.fn;
    else ++r.tn;
  }
  r.precision = r.tp + r.fp == 0
                    ? 0.0
                    : static_cast<double>(r.tp) /
                          static_cast<double>(r.tp + r.fp);
  r.recall = r.tp + r.fn == 0 ? 0.0
                              : static_cast<double>(r.tp) /
                                    static_cast<double>(r.tp + r.fn);
  r.f1 = r.precision + r.recall == 0.0
             ? 0.0
             : 2.0 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

struct LogRegConfig {
  double learning_rate = 0.5;
  std::size_t max_iterations = 500;
  double l2 = 1e-3;
  double tolerance = 1e-9;  // relative loss-change stopping criterion
};

struct LogRegModel {
  Eigen::VectorXd weights;
  double bias = 0.0;
  std::string positive_class;
  std::string negative_class;
  bool converged = false;
  std::size_t iterations = 0;
  double final_loss = 0.0;
};

namespace detail {

inline double logistic_loss(const Eigen::VectorXd& z, const Eigen::VectorXd& y,
                            const Eigen::VectorXd& weights, double l2) {
  const auto n = static_cast<double>(z.size());
  double loss = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    // log(1 + e^z) - y z, computed stably
    loss += std::max(z(i), 0.0) + std::log1p(std::exp(-std::abs(z(i)))) -
            y(i) * z(i);
  }
  return loss / n + 0.5 * l2 * weights.squaredNorm() / n;
}

}  // namespace detail

// Full-batch gradient descent on the L2-regularized logistic loss, starting
// from zero weights; deterministic. Exactly two distinct labels are required
// in the training data.
inline LogRegModel train_logreg(const Eigen::MatrixXd& features,
                                const std::vector<std::string>& labels,
                                const std::string& positive_class,
                                const LogRegConfig& config = {},
                                std::vector<double>* loss_trace = nullptr) {
  if (static_cast<std::size_t>(features.rows()) != labels.size() ||
      labels.empty()) {
    throw ValidationError("train_logreg", "feature/label size mismatch");
  }
  std::set<std::string> distinct(labels.begin(), labels.end());
  if (distinct.size() < 2) {
    throw ValidationError("train_logreg",
                          "training data contains a single class: '" +
                              *distinct.begin() + "'");
  }
  if (distinct.size() > 2) {
    throw ValidationError("train_logreg",
                          "binary task only; found " +
                              std::to_string(distinct.size()) + " classes");
  }
  if (distinct.count(positive_class) == 0) {
    throw ValidationError("train_logreg", "positive class '" + positive_class +
                                              "' not present in training data");
  }

  LogRegModel model;
  model.positive_class = positive_class;
  for (const auto& label : distinct) {
    if (label != positive_class) model.negative_class = label;
  }

  const auto n = static_cast<double>(features.rows());
  Eigen::VectorXd y(features.rows());
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    y(i) = labels[static_cast<std::size_t>(i)] == positive_class ? 1.0 : 0.0;
  }

  model.weights = Eigen::VectorXd::Zero(features.cols());
  Eigen::VectorXd z = Eigen::VectorXd::Zero(features.rows());
  double loss = detail::logistic_loss(z, y, model.weights, config.l2);
  if (loss_trace != nullptr) loss_trace->push_back(loss);

  for (std::size_t iter = 0; iter < config.max_iterations; ++iter) {
    const Eigen::VectorXd p =
        z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
    const Eigen::VectorXd residual = p - y;
    const Eigen::VectorXd grad_w =
        features.transpose() * residual / n + config.l2 * model.weights / n;
    const double grad_b = residual.mean();

    model.weights -= config.learning_rate * grad_w;
    model.bias -= config.learning_rate * grad_b;
    z = features * model.weights;
    z.array() += model.bias;
    model.iterations = iter + 1;

    const double next_loss =
        detail::logistic_loss(z, y, model.weights, config.l2);
    if (loss_trace != nullptr) loss_trace->push_back(next_loss);
    if (std::abs(loss - next_loss) <=
        config.tolerance * std::max(1.0, std::abs(loss))) {
      loss = next_loss;
      model.converged = true;
      break;
    }
    loss = next_loss;
  }
  model.final_loss = loss;
  return model;
}

// Threshold rule: probability >= 0.5 predicts the positive class, so zero
// weights predict positive uniformly.
inline std::vector<std::string> predict(const LogRegModel& model,
                                        const Eigen::MatrixXd& features) {
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(features.rows()));
  const Eigen::VectorXd z =
      (features * model.weights).array() + model.bias;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    out.push_back(z(i) >= 0.0 ? model.positive_class : model.negative_class);
  }
  return out;
}

struct EvalConfig {
  int scenario = 1;
  std::optional<double> seed_fraction;  // defaults to 0.20 / 0.80 by scenario
  PrivacyConfig privacy;
  GeneratorConfig generator;
  FeatureClusteringOptions clustering;
  LogRegConfig logreg;
  std::string positive_class;
  bool clip = false;
  std::string dataset_id;
  // Pass the seed data through as the "synthetic" table: the non-private
  // baseline protocol.
  bool baseline = false;
};

struct EvalReport {
  int scenario = 1;
  std::string classifier = "logistic_regression";
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::vector<double> per_round_f1;
  std::vector<double> per_round_precision;
  std::vector<double> per_round_recall;
  std::size_t repetitions = 0;
  std::size_t failed_rounds = 0;
  std::vector<std::string> round_errors;
  double epsilon = 0.0;
  std::string k_description;
  std::uint64_t rng_seed = 0;
  std::string dataset_id;
};

// One synthesis round: split, scale with seed statistics only, cluster,
// sanitize, generate. Returns (synthetic-or-seed, holdout) in scaled space.
inline std::pair<ScaledTable, ScaledTable> synthesis_round(
    const ScaledTable& raw_features, const EvalConfig& config,
    std::uint64_t round_seed, std::vector<std::string>* warnings = nullptr) {
  const SplitSpec split_spec = SplitSpec::for_scenario(
      config.scenario, round_seed, config.seed_fraction);
  auto [seed_raw, holdout_raw] =
      split_train_seed(raw_features, split_spec, warnings);

  const auto ranges = fit_scaling(seed_raw);
  ScaledTable seed = apply_scaling(seed_raw, ranges);
  ScaledTable holdout = apply_scaling(holdout_raw, ranges);

  if (config.baseline) return {std::move(seed), std::move(holdout)};

  const PartitionChoice choice = select_partition(seed, config.clustering);
  PrivacyConfig privacy = config.privacy;
  privacy.rng_seed = round_seed;
  SyntheticResult generated = generate(split_by_label(seed), choice.partition,
                                       privacy, config.generator);
  ScaledTable synthetic = std::move(generated.table);
  if (config.clip) {
    synthetic.values = synthetic.values.cwiseMax(-1.0).cwiseMin(1.0);
  }
  return {std::move(synthetic), std::move(holdout)};
}

// Scenario 1 trains on the original holdout and tests on the synthetic data;
// scenario 2 trains on the synthetic data and tests on the original holdout.
// Rounds use seeds derived from config.privacy.rng_seed; failed rounds are
// recorded and excluded from the averages.
inline EvalReport run_scenario(const ScaledTable& raw_features,
                               const EvalConfig& config,
                               std::size_t repetitions) {
  if (repetitions == 0) {
    throw ValidationError("run_scenario", "repetitions must be positive");
  }
  if (config.scenario != 1 && config.scenario != 2) {
    throw ValidationError("run_scenario", "scenario must be 1 or 2");
  }

  EvalReport report;
  report.scenario = config.scenario;
  report.repetitions = repetitions;
  report.epsilon = config.privacy.epsilon_total;
  report.k_description = config.privacy.k.describe();
  report.rng_seed = config.privacy.rng_seed;
  report.dataset_id = config.dataset_id;

  for (std::size_t round = 0; round < repetitions; ++round) {
    const std::uint64_t round_seed =
        Rng::substream(config.privacy.rng_seed, Stream::kRound, round).next();
    try {
      auto [synthetic, holdout] =
          synthesis_round(raw_features, config, round_seed);
      const ScaledTable& train =
          config.scenario == 1 ? holdout : synthetic;
      const ScaledTable& test = config.scenario == 1 ? synthetic : holdout;

      const LogRegModel model = train_logreg(
          train.values, train.labels, config.positive_class, config.logreg);
      const F1Result f1 =
          f1_score(predict(model, test.values), test.labels,
                   config.positive_class);
      report.per_round_f1.push_back(f1.f1);
      report.per_round_precision.push_back(f1.precision);
      report.per_round_recall.push_back(f1.recall);
    } catch (const ValidationError& e) {
      ++report.failed_rounds;
      report.round_errors.push_back(e.what());
    }
  }

  const auto successes = report.per_round_f1.size();
  if (successes > 0) {
    const auto mean = [successes](const std::vector<double>& v) {
      double sum = 0.0;
      for (const double x : v) sum += x;
      return sum / static_cast<double>(successes);
    };
    report.f1 = mean(report.per_round_f1);
    report.precision = mean(report.per_round_precision);
    report.recall = mean(report.per_round_recall);
  }
  return report;
}

}  // namespace mcgen

#endif  // MCGEN_EVALUATION_HPP_
