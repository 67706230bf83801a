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

#ifndef MCGEN_SANITIZER_HPP_
#define MCGEN_SANITIZER_HPP_

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "mcgen/error.hpp"
#include "mcgen/feature_clustering.hpp"
#include "mcgen/rng.hpp"
#include "mcgen/table.hpp"

namespace mcgen {

// How the per-set budget share covers the two releases (mean, covariance).
//   kSingle: the full share is used for each release, as the published
//            sanitizer writes it; sequential composition over both releases
//            then totals 2x the configured epsilon.
//   kComposed: each release gets half the share, so the two releases compose
//              to exactly the configured epsilon.
enum class BudgetMode { kSingle, kComposed };

inline std::string to_string(BudgetMode mode) {
  return mode == BudgetMode::kSingle ? "paper" : "strict";
}

inline BudgetMode budget_mode_from_string(const std::string& name) {
  if (name == "paper") return BudgetMode::kSingle;
  if (name == "strict") return BudgetMode::kComposed;
  throw ValidationError("PrivacyConfig",
                        "unknown budget mode '" + name +
                            "'; expected 'paper' or 'strict'");
}

// Cluster size parameter: either an absolute record count or a percentage of
// the per-class seed size.
struct KSpec {
  bool is_percentage = true;
  double percentage = 20.0;      // used when is_percentage
  std::size_t absolute = 2;      // used otherwise

  std::size_t resolve(std::size_t class_size) const {
    if (!is_percentage) return absolute;
    const auto k = static_cast<std::size_t>(std::llround(
        percentage / 100.0 * static_cast<double>(class_size)));
    return std::max<std::size_t>(1, k);
  }

  std::string describe() const {
    return is_percentage ? csv::format_number(percentage) + "%"
                         : std::to_string(absolute);
  }
};

struct PrivacyConfig {
  double epsilon_total = 1.0;
  KSpec k;
  BudgetMode budget_mode = BudgetMode::kSingle;
  std::uint64_t rng_seed = 0;

  void validate() const {
    if (!(epsilon_total > 0.0)) {
      throw ValidationError("PrivacyConfig", "epsilon must be positive");
    }
  }
};

// Per-cluster multivariate Gaussian statistics before sanitization.
struct ClusterModel {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  std::size_t size = 0;       // record count |c_i|
  std::size_t ifs_index = 0;
  std::string class_label;
};

// DP-perturbed model parameters plus the audit fields that produced them.
struct SanitizedModel {
  Eigen::VectorXd mean_dp;
  Eigen::MatrixXd covariance_dp;
  std::size_t size = 0;
  double epsilon_m = 0.0;      // full per-set budget share
  double sensitivity = 0.0;    // the Delta used
  double laplace_scale = 0.0;  // b actually used per release
};

// Column mean and biased (1/|c|) covariance of one cluster's rows. The
// biased normalization keeps a single-row cluster well-defined (zero
// matrix).
inline ClusterModel extract_stats(const Eigen::MatrixXd& rows) {
  if (rows.rows() == 0) {
    throw ValidationError("extract_stats", "cluster has no rows");
  }
  ClusterModel model;
  model.size = static_cast<std::size_t>(rows.rows());
  model.mean = rows.colwise().mean();
  const Eigen::MatrixXd centered = rows.rowwise() - model.mean.transpose();
  model.covariance =
      centered.transpose() * centered / static_cast<double>(rows.rows());
  return model;
}

// Per-set budget shares epsilon_m = (d_m / d) * epsilon. The last share
// absorbs the floating-point residue so the shares total epsilon exactly.
inline std::vector<double> budget_split(const FeaturePartition& partition,
                                        double epsilon_total) {
  const auto d = static_cast<double>(partition.total_features());
  if (d == 0.0) throw ValidationError("budget_split", "empty partition");
  std::vector<double> shares;
  shares.reserve(partition.m());
  double allocated = 0.0;
  for (std::size_t i = 0; i < partition.m(); ++i) {
    const double share =
        static_cast<double>(partition.sets[i].size()) / d * epsilon_total;
    shares.push_back(share);
    allocated += share;
  }
  if (std::isfinite(epsilon_total) && !shares.empty()) {
    const double residue = epsilon_total - allocated;
    if (std::abs(residue) > 1e-12 * std::max(1.0, epsilon_total)) {
      throw InternalError("budget_split: share sum drifted from epsilon");
    }
    shares.back() += residue;
  }
  return shares;
}

// L1 sensitivity of one feature set's statistics: the analytic post-scaling
// bound of 2 per feature, additive across the set. A data-dependent bound
// would itself leak, so the observed ranges are only validated, never used.
inline double sensitivity(const std::vector<std::size_t>& feature_set,
                          const ScaledTable& s) {
  constexpr double kBoundTolerance = 1e-9;
  for (const std::size_t f : feature_set) {
    if (f >= s.n_features()) {
      throw ValidationError("sensitivity", "feature index out of range");
    }
    const auto col = s.values.col(static_cast<Eigen::Index>(f));
    if (col.minCoeff() < -1.0 - kBoundTolerance ||
        col.maxCoeff() > 1.0 + kBoundTolerance) {
      throw ValidationError("sensitivity",
                            "feature '" + s.feature_names[f] +
                                "' is not scaled to [-1, 1]");
    }
  }
  return 2.0 * static_cast<double>(feature_set.size());
}

// i.i.d. Laplace(0, scale) draws; scale 0 yields zeros.
inline std::vector<double> laplace_noise(double scale, std::size_t count,
                                         Rng& rng) {
  if (scale < 0.0) {
    throw ValidationError("laplace_noise", "scale must be nonnegative");
  }
  std::vector<double> draws(count);
  for (auto& draw : draws) draw = rng.laplace(scale);
  return draws;
}

// Applies the Laplace mechanism to one cluster model with scale
// b = Delta / (|c_i| * eps), where eps is the full per-set share in kSingle
// mode and half of it in kComposed mode. The mean receives d independent
// draws; the covariance receives (d^2+d)/2 draws on the upper triangle,
// mirrored so the output stays exactly symmetric.
inline SanitizedModel sanitize(const ClusterModel& model, double delta,
                               double epsilon_m, BudgetMode mode, Rng& rng) {
  if (!(epsilon_m > 0.0)) {
    throw ValidationError("sanitize", "epsilon_m must be positive");
  }
  if (model.size < 1) throw ValidationError("sanitize", "empty cluster");

  const double epsilon_per_release =
      mode == BudgetMode::kComposed ? epsilon_m / 2.0 : epsilon_m;
  const double scale =
      delta / (static_cast<double>(model.size) * epsilon_per_release);

  SanitizedModel out;
  out.size = model.size;
  out.epsilon_m = epsilon_m;
  out.sensitivity = delta;
  out.laplace_scale = scale;

  const Eigen::Index d = model.mean.size();
  out.mean_dp = model.mean;
  for (Eigen::Index i = 0; i < d; ++i) out.mean_dp(i) += rng.laplace(scale);

  out.covariance_dp = model.covariance;
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i; j < d; ++j) {
      const double noise = rng.laplace(scale);
      out.covariance_dp(i, j) += noise;
      if (j != i) out.covariance_dp(j, i) = out.covariance_dp(i, j);
    }
  }
  return out;
}

}  // namespace mcgen

#endif  // MCGEN_SANITIZER_HPP_
