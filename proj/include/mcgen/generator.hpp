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

#ifndef MCGEN_GENERATOR_HPP_
#define MCGEN_GENERATOR_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mcgen/error.hpp"
#include "mcgen/feature_clustering.hpp"
#include "mcgen/mdav.hpp"
#include "mcgen/rng.hpp"
#include "mcgen/sanitizer.hpp"
#include "mcgen/table.hpp"

namespace mcgen {

inline constexpr double kPsdFloor = 1e-8;

// Lifts a symmetric matrix onto the PSD cone by clipping eigenvalues below
// `floor` up to the floor. Sanitized covariances are symmetric but not
// guaranteed PSD, and Gaussian sampling needs PSD. Asymmetric input is
// symmetrized as (A + A^T)/2 first (reported through `symmetrized`).
inline Eigen::MatrixXd psd_repair(const Eigen::MatrixXd& sigma,
                                  double floor = kPsdFloor,
                                  bool* symmetrized = nullptr) {
  if (sigma.rows() != sigma.cols()) {
    throw ValidationError("psd_repair", "matrix must be square");
  }
  Eigen::MatrixXd sym = 0.5 * (sigma + sigma.transpose());
  if (symmetrized != nullptr) {
    *symmetrized = !sigma.isApprox(sigma.transpose(), 0.0);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw InternalError("psd_repair: eigendecomposition failed");
  }
  Eigen::VectorXd eigenvalues = solver.eigenvalues();
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    if (eigenvalues(i) < floor) eigenvalues(i) = floor;
  }
  const Eigen::MatrixXd repaired = solver.eigenvectors() *
                                   eigenvalues.asDiagonal() *
                                   solver.eigenvectors().transpose();
  return 0.5 * (repaired + repaired.transpose());
}

// Draws `count` rows from N(mean, covariance) as mean + L z, with L the
// symmetric PSD square root from the eigendecomposition (rank deficiency is
// fine: zero eigenvalues contribute nothing).
inline Eigen::MatrixXd sample_mvn(const Eigen::VectorXd& mean,
                                  const Eigen::MatrixXd& covariance,
                                  std::size_t count, Rng& rng) {
  const Eigen::Index d = mean.size();
  if (covariance.rows() != d || covariance.cols() != d) {
    throw ValidationError("sample_mvn", "covariance shape mismatch");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(covariance);
  if (solver.info() != Eigen::Success) {
    throw InternalError("sample_mvn: eigendecomposition failed");
  }
  if (solver.eigenvalues().minCoeff() < -1e-9) {
    throw ValidationError("sample_mvn",
                          "covariance is not PSD; run psd_repair first");
  }
  Eigen::VectorXd roots = solver.eigenvalues();
  for (Eigen::Index i = 0; i < roots.size(); ++i) {
    roots(i) = roots(i) > 0.0 ? std::sqrt(roots(i)) : 0.0;
  }
  const Eigen::MatrixXd factor = solver.eigenvectors() * roots.asDiagonal() *
                                 solver.eigenvectors().transpose();

  Eigen::MatrixXd rows(static_cast<Eigen::Index>(count), d);
  Eigen::VectorXd z(d);
  for (std::size_t r = 0; r < count; ++r) {
    for (Eigen::Index i = 0; i < d; ++i) z(i) = rng.normal();
    rows.row(static_cast<Eigen::Index>(r)) =
        (mean + factor * z).transpose();
  }
  return rows;
}

// How rows from different feature sets are joined into complete records.
// The sets are modeled as mutually independent, so a random alignment
// preserves the joint distribution; a fixed alignment would manufacture
// cross-set correlation out of cluster ordering. kByCluster keeps the raw
// cluster-order alignment for ablation.
enum class RowAlignment { kShuffled, kByCluster };

struct GeneratorConfig {
  std::size_t multiplier = 1;
  RowAlignment alignment = RowAlignment::kShuffled;

  void validate() const {
    if (multiplier < 1) {
      throw ValidationError("GeneratorConfig", "multiplier must be >= 1");
    }
  }
};

// Audit record for one sanitized cluster, logged into the run report.
struct ClusterAudit {
  std::string class_label;
  std::size_t ifs_index = 0;
  std::size_t cluster_index = 0;
  std::size_t size = 0;
  double epsilon_m = 0.0;
  double sensitivity = 0.0;
  double laplace_scale = 0.0;
};

struct SyntheticResult {
  ScaledTable table;  // scaled space; ranges copied from the seed for inverse
  std::vector<ClusterAudit> audits;
  // class label -> per-feature-set cluster size histogram
  std::map<std::string, std::vector<std::vector<std::size_t>>> cluster_sizes;
  std::vector<std::string> warnings;
  // provenance
  double epsilon = 0.0;
  std::string k_description;
  std::uint64_t rng_seed = 0;
  FeaturePartition partition;
};

// Joins per-feature-set column blocks into complete rows for one class:
// cluster blocks are already concatenated per set; each set's rows are
// optionally shuffled, then scattered back into the original column order.
inline Eigen::MatrixXd assemble(
    std::vector<Eigen::MatrixXd> per_set_blocks,
    const FeaturePartition& partition, std::size_t total_features,
    RowAlignment alignment, std::uint64_t seed, std::size_t class_index) {
  if (per_set_blocks.size() != partition.m()) {
    throw InternalError("assemble: one block per feature set required");
  }
  const Eigen::Index rows =
      per_set_blocks.empty() ? 0 : per_set_blocks[0].rows();
  for (const auto& block : per_set_blocks) {
    if (block.rows() != rows) {
      throw InternalError("assemble: per-set row totals differ");
    }
  }

  Eigen::MatrixXd out(rows, static_cast<Eigen::Index>(total_features));
  for (std::size_t m = 0; m < partition.m(); ++m) {
    Eigen::MatrixXd& block = per_set_blocks[m];
    if (alignment == RowAlignment::kShuffled) {
      std::vector<std::size_t> order(static_cast<std::size_t>(rows));
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      Rng rng = Rng::substream(seed, Stream::kShuffle, class_index, m);
      shuffle(order, rng);
      Eigen::MatrixXd permuted(rows, block.cols());
      for (std::size_t i = 0; i < order.size(); ++i) {
        permuted.row(static_cast<Eigen::Index>(i)) =
            block.row(static_cast<Eigen::Index>(order[i]));
      }
      block = std::move(permuted);
    }
    for (std::size_t c = 0; c < partition.sets[m].size(); ++c) {
      out.col(static_cast<Eigen::Index>(partition.sets[m][c])) =
          block.col(static_cast<Eigen::Index>(c));
    }
  }
  return out;
}

// Full per-class synthesis: project each feature set, microaggregate,
// extract and sanitize per-cluster statistics, repair, sample, and join.
// Every cluster contributes size * multiplier rows, so the synthetic class
// size is exactly multiplier times the seed class size.
inline SyntheticResult generate(
    const std::map<std::string, ScaledTable>& classes,
    const FeaturePartition& partition, const PrivacyConfig& privacy,
    const GeneratorConfig& config) {
  config.validate();
  privacy.validate();
  if (classes.empty()) {
    throw ValidationError("generate", "no classes to synthesize");
  }

  SyntheticResult result;
  result.epsilon = privacy.epsilon_total;
  result.k_description = privacy.k.describe();
  result.rng_seed = privacy.rng_seed;
  result.partition = partition;
  const ScaledTable& first = classes.begin()->second;
  const std::size_t d = first.n_features();
  partition.validate(d);
  result.table.feature_names = first.feature_names;
  result.table.ranges = first.ranges;
  result.table.constant_features = first.constant_features;

  const std::vector<double> shares = budget_split(partition, privacy.epsilon_total);

  std::vector<Eigen::MatrixXd> class_outputs;
  std::vector<const std::string*> class_labels;
  std::size_t total_rows = 0;

  std::size_t class_index = 0;
  for (const auto& [label, seed_table] : classes) {
    const std::size_t n_class = seed_table.n_rows();
    if (n_class == 0) {
      throw ValidationError("generate", "class '" + label + "' has no rows");
    }
    const std::size_t k = privacy.k.resolve(n_class);
    if (k == 1) {
      result.warnings.push_back(
          "generate: class '" + label +
          "' resolved to k=1; single-record clusters have degenerate "
          "covariance");
    }

    std::vector<Eigen::MatrixXd> per_set_blocks;
    std::vector<std::vector<std::size_t>> histograms;
    for (std::size_t m = 0; m < partition.m(); ++m) {
      const Eigen::MatrixXd projected = project(seed_table, partition.sets[m]);
      const ClusterAssignment assignment =
          mdav(projected, k, &result.warnings);
      histograms.push_back(assignment.cluster_sizes);

      const double delta = sensitivity(partition.sets[m], seed_table);
      Eigen::MatrixXd block(
          static_cast<Eigen::Index>(n_class * config.multiplier),
          projected.cols());
      Eigen::Index written = 0;
      for (std::size_t g = 0; g < assignment.cluster_count(); ++g) {
        const Eigen::MatrixXd members =
            cluster_rows(projected, assignment, g);
        ClusterModel model = extract_stats(members);
        model.ifs_index = m;
        model.class_label = label;

        Rng sanitize_rng = Rng::substream(privacy.rng_seed, Stream::kSanitize,
                                          class_index, m, g);
        const SanitizedModel sanitized = sanitize(
            model, delta, shares[m], privacy.budget_mode, sanitize_rng);
        result.audits.push_back({label, m, g, sanitized.size,
                                 sanitized.epsilon_m, sanitized.sensitivity,
                                 sanitized.laplace_scale});

        const Eigen::MatrixXd repaired = psd_repair(sanitized.covariance_dp);
        Rng sample_rng = Rng::substream(privacy.rng_seed, Stream::kSample,
                                        class_index, m, g);
        const std::size_t count = sanitized.size * config.multiplier;
        block.middleRows(written, static_cast<Eigen::Index>(count)) =
            sample_mvn(sanitized.mean_dp, repaired, count, sample_rng);
        written += static_cast<Eigen::Index>(count);
      }
      if (written != block.rows()) {
        throw InternalError("generate: cluster row totals do not cover the "
                            "class");
      }
      per_set_blocks.push_back(std::move(block));
    }
    result.cluster_sizes.emplace(label, std::move(histograms));

    class_outputs.push_back(assemble(std::move(per_set_blocks), partition, d,
                                     config.alignment, privacy.rng_seed,
                                     class_index));
    class_labels.push_back(&label);
    total_rows += static_cast<std::size_t>(class_outputs.back().rows());
    ++class_index;
  }

  result.table.values.resize(static_cast<Eigen::Index>(total_rows),
                             static_cast<Eigen::Index>(d));
  result.table.labels.reserve(total_rows);
  Eigen::Index row = 0;
  for (std::size_t i = 0; i < class_outputs.size(); ++i) {
    result.table.values.middleRows(row, class_outputs[i].rows()) =
        class_outputs[i];
    row += class_outputs[i].rows();
    result.table.labels.insert(result.table.labels.end(),
                               static_cast<std::size_t>(class_outputs[i].rows()),
                               *class_labels[i]);
  }
  return result;
}

}  // namespace mcgen

#endif  // MCGEN_GENERATOR_HPP_
