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

#ifndef MCGEN_NOISE_ACCOUNTANT_HPP_
#define MCGEN_NOISE_ACCOUNTANT_HPP_

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "mcgen/error.hpp"
#include "mcgen/rng.hpp"
#include "mcgen/sanitizer.hpp"

namespace mcgen {

// Closed-form noise totals for the two clustering strategies. The published
// totals are sums of per-entry Laplace scale parameters times dimension
// counts ("scale-sum" here); because a Laplace(0, b) entry has variance
// 2b^2, the accountant also reports the corresponding variance-sums, and the
// Monte Carlo check below validates the sanitizer against those.
//
// With the per-set budget share eps_m = (d_m/d) eps, the per-entry scale in
// cluster j of set m is Delta_m / (|C_j| eps_m); the mean of set m has d_m
// entries and its covariance d_m^2, which is what makes the multi-level
// covariance total strictly smaller than the flat-clustering one whenever
// every d_m < d.

// Multi-level total on the mean vector:
// sum_j (sum_m Delta_m) * d / (|C_j| * eps).
inline double noise_mean_ifs(const std::vector<std::size_t>& set_sizes,
                             const std::vector<std::size_t>& cluster_sizes,
                             const std::vector<double>& sensitivities,
                             double epsilon) {
  if (set_sizes.size() != sensitivities.size()) {
    throw ValidationError("noise_mean_ifs",
                          "one sensitivity per feature set required");
  }
  const auto d = static_cast<double>(
      std::accumulate(set_sizes.begin(), set_sizes.end(), std::size_t{0}));
  const double delta_total =
      std::accumulate(sensitivities.begin(), sensitivities.end(), 0.0);
  double total = 0.0;
  for (const std::size_t cluster : cluster_sizes) {
    total += delta_total * d / (static_cast<double>(cluster) * epsilon);
  }
  return total;
}

// Multi-level total on the covariance matrix:
// sum_j (sum_m d_m * Delta_m) * d / (|C_j| * eps).
inline double noise_cov_ifs(const std::vector<std::size_t>& set_sizes,
                            const std::vector<std::size_t>& cluster_sizes,
                            const std::vector<double>& sensitivities,
                            double epsilon) {
  if (set_sizes.size() != sensitivities.size()) {
    throw ValidationError("noise_cov_ifs",
                          "one sensitivity per feature set required");
  }
  const auto d = static_cast<double>(
      std::accumulate(set_sizes.begin(), set_sizes.end(), std::size_t{0}));
  double weighted = 0.0;
  for (std::size_t m = 0; m < set_sizes.size(); ++m) {
    weighted += static_cast<double>(set_sizes[m]) * sensitivities[m];
  }
  double total = 0.0;
  for (const std::size_t cluster : cluster_sizes) {
    total += weighted * d / (static_cast<double>(cluster) * epsilon);
  }
  return total;
}

// Flat (sample-level only) total on the mean: sum_j Delta_D * d / (|C_j| eps).
inline double noise_mean_noifs(const std::vector<std::size_t>& cluster_sizes,
                               double delta_d, double epsilon, std::size_t d) {
  double total = 0.0;
  for (const std::size_t cluster : cluster_sizes) {
    total += delta_d * static_cast<double>(d) /
             (static_cast<double>(cluster) * epsilon);
  }
  return total;
}

// Flat total on the covariance: sum_j Delta_D * d^2 / (|C_j| eps).
inline double noise_cov_noifs(const std::vector<std::size_t>& cluster_sizes,
                              double delta_d, double epsilon, std::size_t d) {
  double total = 0.0;
  for (const std::size_t cluster : cluster_sizes) {
    total += delta_d * static_cast<double>(d) * static_cast<double>(d) /
             (static_cast<double>(cluster) * epsilon);
  }
  return total;
}

namespace detail {

inline double per_release_epsilon(double epsilon, BudgetMode mode) {
  return mode == BudgetMode::kComposed ? epsilon / 2.0 : epsilon;
}

}  // namespace detail

// 2b^2 variance-sums matching the four totals above, using the Laplace scale
// the sanitizer actually applies (mode-aware).
inline double variance_mean_ifs(const std::vector<std::size_t>& set_sizes,
                                const std::vector<std::size_t>& cluster_sizes,
                                const std::vector<double>& sensitivities,
                                double epsilon, BudgetMode mode) {
  const auto d = static_cast<double>(
      std::accumulate(set_sizes.begin(), set_sizes.end(), std::size_t{0}));
  double total = 0.0;
  for (const std::size_t cluster : cluster_sizes) {
    for (std::size_t m = 0; m < set_sizes.size(); ++m) {
      const double eps_m = static_cast<double>(set_sizes[m]) / d * epsilon;
      const double b = sensitivities[m] /
                       (static_cast<double>(cluster) *
                        detail::per_release_epsilon(eps_m, mode));
      total += static_cast<double>(set_sizes[m]) * 2.0 * b * b;
    }
  }
  return total;
}

inline double variance_cov_ifs(const std::vector<std::size_t>& set_sizes,
                               const std::vector<std::size_t>& cluster_sizes,
                               const std::vector<double>& sensitivities,
                               double epsilon, BudgetMode mode) {
  const auto d = static_cast<double>(
      std::accumulate(set_sizes.begin(), set_sizes.end(), std::size_t{0}));
  double total = 0.0;
  for (const std::size_t cluster : cluster_sizes) {
    for (std::size_t m = 0; m < set_sizes.size(); ++m) {
      const double eps_m = static_cast<double>(set_sizes[m]) / d * epsilon;
      const double b = sensitivities[m] /
                       (static_cast<double>(cluster) *
                        detail::per_release_epsilon(eps_m, mode));
      const double dm = static_cast<double>(set_sizes[m]);
      total += dm * dm * 2.0 * b * b;
    }
  }
  return total;
}

inline double variance_mean_noifs(const std::vector<std::size_t>& cluster_sizes,
                                  double delta_d, double epsilon,
                                  std::size_t d, BudgetMode mode) {
  double total = 0.0;
  for (const std::size_t cluster : cluster_sizes) {
    const double b = delta_d / (static_cast<double>(cluster) *
                                detail::per_release_epsilon(epsilon, mode));
    total += static_cast<double>(d) * 2.0 * b * b;
  }
  return total;
}

inline double variance_cov_noifs(const std::vector<std::size_t>& cluster_sizes,
                                 double delta_d, double epsilon, std::size_t d,
                                 BudgetMode mode) {
  double total = 0.0;
  for (const std::size_t cluster : cluster_sizes) {
    const double b = delta_d / (static_cast<double>(cluster) *
                                detail::per_release_epsilon(epsilon, mode));
    total += static_cast<double>(d) * static_cast<double>(d) * 2.0 * b * b;
  }
  return total;
}

// Closed-form totals plus the runtime comparison between the multi-level and
// flat paths. `delta_d` is taken as the sum of the per-set sensitivities,
// which is exact for the additive range-based bound in use.
struct NoiseReport {
  double n_ifs_mean = 0.0;
  double n_ifs_cov = 0.0;
  double n_noifs_mean = 0.0;
  double n_noifs_cov = 0.0;
  double var_ifs_mean = 0.0;
  double var_ifs_cov = 0.0;
  double var_noifs_mean = 0.0;
  double var_noifs_cov = 0.0;
  std::vector<double> per_ifs_mean;  // pre-substitution per-set scale-sums
  std::vector<double> per_ifs_cov;
  std::vector<double> per_cluster_mean;  // per-cluster terms of the IFS totals
  std::vector<double> per_cluster_cov;
  // inputs echoed
  std::vector<std::size_t> set_sizes;
  std::vector<std::size_t> cluster_sizes;
  std::vector<double> sensitivities;
  double delta_d = 0.0;
  double epsilon = 0.0;
  BudgetMode mode = BudgetMode::kSingle;
  bool mean_totals_match = false;
  bool cov_not_worse = false;

  void verify() const {
    if (!mean_totals_match) {
      throw InternalError(
          "noise_accountant: multi-level and flat mean totals diverged");
    }
    if (!cov_not_worse) {
      throw InternalError(
          "noise_accountant: multi-level covariance noise exceeds the flat "
          "clustering total");
    }
  }
};

inline NoiseReport build_noise_report(
    const std::vector<std::size_t>& set_sizes,
    const std::vector<std::size_t>& cluster_sizes,
    const std::vector<double>& sensitivities, double epsilon,
    BudgetMode mode = BudgetMode::kSingle) {
  if (set_sizes.empty() || cluster_sizes.empty()) {
    throw ValidationError("build_noise_report",
                          "need at least one feature set and one cluster");
  }
  NoiseReport report;
  report.set_sizes = set_sizes;
  report.cluster_sizes = cluster_sizes;
  report.sensitivities = sensitivities;
  report.epsilon = epsilon;
  report.mode = mode;
  report.delta_d =
      std::accumulate(sensitivities.begin(), sensitivities.end(), 0.0);
  const std::size_t d =
      std::accumulate(set_sizes.begin(), set_sizes.end(), std::size_t{0});

  report.n_ifs_mean =
      noise_mean_ifs(set_sizes, cluster_sizes, sensitivities, epsilon);
  report.n_ifs_cov =
      noise_cov_ifs(set_sizes, cluster_sizes, sensitivities, epsilon);
  report.n_noifs_mean =
      noise_mean_noifs(cluster_sizes, report.delta_d, epsilon, d);
  report.n_noifs_cov =
      noise_cov_noifs(cluster_sizes, report.delta_d, epsilon, d);

  report.var_ifs_mean =
      variance_mean_ifs(set_sizes, cluster_sizes, sensitivities, epsilon, mode);
  report.var_ifs_cov =
      variance_cov_ifs(set_sizes, cluster_sizes, sensitivities, epsilon, mode);
  report.var_noifs_mean =
      variance_mean_noifs(cluster_sizes, report.delta_d, epsilon, d, mode);
  report.var_noifs_cov =
      variance_cov_noifs(cluster_sizes, report.delta_d, epsilon, d, mode);

  for (std::size_t m = 0; m < set_sizes.size(); ++m) {
    const double eps_m =
        static_cast<double>(set_sizes[m]) / static_cast<double>(d) * epsilon;
    double mean_sum = 0.0;
    double cov_sum = 0.0;
    for (const std::size_t cluster : cluster_sizes) {
      const double scale =
          sensitivities[m] / (static_cast<double>(cluster) * eps_m);
      mean_sum += scale * static_cast<double>(set_sizes[m]);
      cov_sum += scale * static_cast<double>(set_sizes[m]) *
                 static_cast<double>(set_sizes[m]);
    }
    report.per_ifs_mean.push_back(mean_sum);
    report.per_ifs_cov.push_back(cov_sum);
  }
  for (const std::size_t cluster : cluster_sizes) {
    report.per_cluster_mean.push_back(
        noise_mean_ifs(set_sizes, {cluster}, sensitivities, epsilon));
    report.per_cluster_cov.push_back(
        noise_cov_ifs(set_sizes, {cluster}, sensitivities, epsilon));
  }

  const double mean_gap = std::abs(report.n_ifs_mean - report.n_noifs_mean);
  report.mean_totals_match =
      mean_gap <= 1e-9 * std::max(report.n_noifs_mean, 1e-300);
  report.cov_not_worse =
      report.n_ifs_cov <= report.n_noifs_cov * (1.0 + 1e-12);
  return report;
}

// Empirical validation of the variance-sums against the sanitizer itself:
// sanitizes zero-statistics models `trials` times and aggregates per-entry
// sample variances with the theorems' dimension weighting (d_m entries per
// mean, d_m^2 per covariance).
struct MonteCarloCheck {
  double empirical_mean_total = 0.0;
  double empirical_cov_total = 0.0;
  double expected_mean_total = 0.0;
  double expected_cov_total = 0.0;
  std::size_t trials = 0;
};

inline MonteCarloCheck monte_carlo_noise_check(
    const std::vector<std::size_t>& set_sizes,
    const std::vector<std::size_t>& cluster_sizes, double epsilon,
    BudgetMode mode, std::size_t trials, std::uint64_t seed) {
  if (trials == 0) {
    throw ValidationError("monte_carlo_noise_check",
                          "trials must be positive");
  }
  if (trials < 2) {
    throw ValidationError("monte_carlo_noise_check",
                          "sample variance needs at least two trials");
  }
  FeaturePartition partition;
  std::size_t next = 0;
  for (const std::size_t size : set_sizes) {
    std::vector<std::size_t> set(size);
    for (auto& f : set) f = next++;
    partition.sets.push_back(std::move(set));
  }
  const std::vector<double> shares = budget_split(partition, epsilon);

  std::vector<double> sensitivities;
  sensitivities.reserve(set_sizes.size());
  for (const std::size_t size : set_sizes) {
    sensitivities.push_back(2.0 * static_cast<double>(size));
  }

  struct EntryStats {
    std::vector<double> sum;
    std::vector<double> sum_sq;
  };
  std::vector<std::vector<EntryStats>> mean_stats(cluster_sizes.size());
  std::vector<std::vector<EntryStats>> cov_stats(cluster_sizes.size());
  for (std::size_t j = 0; j < cluster_sizes.size(); ++j) {
    for (const std::size_t dm : set_sizes) {
      mean_stats[j].push_back({std::vector<double>(dm, 0.0),
                               std::vector<double>(dm, 0.0)});
      cov_stats[j].push_back({std::vector<double>(dm * dm, 0.0),
                              std::vector<double>(dm * dm, 0.0)});
    }
  }

  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng = Rng::substream(seed, Stream::kMonteCarlo, t);
    for (std::size_t j = 0; j < cluster_sizes.size(); ++j) {
      for (std::size_t m = 0; m < set_sizes.size(); ++m) {
        const auto dm = static_cast<Eigen::Index>(set_sizes[m]);
        ClusterModel zero;
        zero.mean = Eigen::VectorXd::Zero(dm);
        zero.covariance = Eigen::MatrixXd::Zero(dm, dm);
        zero.size = cluster_sizes[j];
        const SanitizedModel sanitized =
            sanitize(zero, sensitivities[m], shares[m], mode, rng);
        for (Eigen::Index i = 0; i < dm; ++i) {
          const double v = sanitized.mean_dp(i);
          mean_stats[j][m].sum[static_cast<std::size_t>(i)] += v;
          mean_stats[j][m].sum_sq[static_cast<std::size_t>(i)] += v * v;
        }
        for (Eigen::Index r = 0; r < dm; ++r) {
          for (Eigen::Index c = 0; c < dm; ++c) {
            const double v = sanitized.covariance_dp(r, c);
            const auto idx = static_cast<std::size_t>(r * dm + c);
            cov_stats[j][m].sum[idx] += v;
            cov_stats[j][m].sum_sq[idx] += v * v;
          }
        }
      }
    }
  }

  auto sample_variance = [trials](double sum, double sum_sq) {
    const auto n = static_cast<double>(trials);
    return (sum_sq - sum * sum / n) / (n - 1.0);
  };

  MonteCarloCheck check;
  check.trials = trials;
  for (std::size_t j = 0; j < cluster_sizes.size(); ++j) {
    for (std::size_t m = 0; m < set_sizes.size(); ++m) {
      for (std::size_t i = 0; i < mean_stats[j][m].sum.size(); ++i) {
        check.empirical_mean_total +=
            sample_variance(mean_stats[j][m].sum[i], mean_stats[j][m].sum_sq[i]);
      }
      for (std::size_t i = 0; i < cov_stats[j][m].sum.size(); ++i) {
        check.empirical_cov_total +=
            sample_variance(cov_stats[j][m].sum[i], cov_stats[j][m].sum_sq[i]);
      }
    }
  }
  check.expected_mean_total = variance_mean_ifs(set_sizes, cluster_sizes,
                                                sensitivities, epsilon, mode);
  check.expected_cov_total =
      variance_cov_ifs(set_sizes, cluster_sizes, sensitivities, epsilon, mode);
  return check;
}

}  // namespace mcgen

#endif  // MCGEN_NOISE_ACCOUNTANT_HPP_
