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

#ifndef MCGEN_FEATURE_CLUSTERING_HPP_
#define MCGEN_FEATURE_CLUSTERING_HPP_

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "mcgen/error.hpp"
#include "mcgen/table.hpp"

namespace mcgen {

// Grouping of the d features into m disjoint, nonempty independent feature
// sets. Canonical form: each set sorted ascending, sets ordered by their
// smallest member.
struct FeaturePartition {
  std::vector<std::vector<std::size_t>> sets;

  std::size_t m() const { return sets.size(); }

  std::vector<std::size_t> set_sizes() const {
    std::vector<std::size_t> sizes;
    sizes.reserve(sets.size());
    for (const auto& set : sets) sizes.push_back(set.size());
    return sizes;
  }

  std::size_t total_features() const {
    std::size_t total = 0;
    for (const auto& set : sets) total += set.size();
    return total;
  }

  void validate(std::size_t d) const {
    std::vector<bool> seen(d, false);
    for (const auto& set : sets) {
      if (set.empty()) throw InternalError("FeaturePartition: empty set");
      for (const std::size_t f : set) {
        if (f >= d || seen[f]) {
          throw InternalError("FeaturePartition: sets must partition 0..d-1");
        }
        seen[f] = true;
      }
    }
    if (total_features() != d) {
      throw InternalError("FeaturePartition: set sizes do not sum to d");
    }
  }
};

// Pairwise feature distances in the 2n(1 - Corr) metric.
struct DistanceMatrix {
  Eigen::MatrixXd dist;       // d x d, symmetric, zero diagonal
  std::size_t sample_count = 0;  // the n in the metric
};

struct CorrelationResult {
  Eigen::MatrixXd corr;
  std::vector<std::size_t> zero_variance_features;
};

// Pearson correlation between feature columns. A zero-variance feature gets
// correlation 0 against every other feature (and is flagged); the diagonal
// stays 1.
inline CorrelationResult pearson_corr_matrix(const ScaledTable& s) {
  const std::size_t n = s.n_rows();
  const std::size_t d = s.n_features();
  if (n < 2) {
    throw ValidationError("pearson_corr_matrix",
                          "correlation undefined for fewer than two samples");
  }
  if (d < 2) {
    throw ValidationError("pearson_corr_matrix", "need at least two features");
  }

  const Eigen::MatrixXd centered =
      s.values.rowwise() - s.values.colwise().mean();
  const Eigen::VectorXd norms = centered.colwise().norm();

  CorrelationResult result;
  result.corr = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(d),
                                          static_cast<Eigen::Index>(d));
  for (std::size_t f = 0; f < d; ++f) {
    if (norms(static_cast<Eigen::Index>(f)) == 0.0) {
      result.zero_variance_features.push_back(f);
    }
  }
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(d); ++i) {
    for (Eigen::Index j = i + 1; j < static_cast<Eigen::Index>(d); ++j) {
      double r = 0.0;
      if (norms(i) > 0.0 && norms(j) > 0.0) {
        r = centered.col(i).dot(centered.col(j)) / (norms(i) * norms(j));
        r = std::clamp(r, -1.0, 1.0);
      }
      result.corr(i, j) = r;
      result.corr(j, i) = r;
    }
  }
  return result;
}

// Distance between features: 2n[1 - Corr(X, Y)]. Correlation is used signed;
// set `absolute_corr` to use |Corr| instead (experimentation switch: the
// signed form puts perfectly anti-correlated features at maximal distance).
inline DistanceMatrix corr_to_distance(const Eigen::MatrixXd& corr,
                                       std::size_t sample_count,
                                       bool absolute_corr = false) {
  if (corr.rows() != corr.cols()) {
    throw ValidationError("corr_to_distance",
                          "correlation matrix must be square");
  }
  DistanceMatrix out;
  out.sample_count = sample_count;
  const double scale = 2.0 * static_cast<double>(sample_count);
  if (absolute_corr) {
    out.dist = scale * (1.0 - corr.array().abs());
  } else {
    out.dist = scale * (1.0 - corr.array());
  }
  out.dist.diagonal().setZero();
  return out;
}

namespace detail {

// One dendrogram merge: the two clusters named by their smallest member.
struct Merge {
  std::size_t low_rep;
  std::size_t high_rep;
};

// Full average-linkage merge sequence via Lance-Williams updates. Clusters
// are identified by their smallest member index; among equally close pairs,
// the lexicographically smallest (min rep, max rep) pair merges first.
inline std::vector<Merge> average_linkage_merges(const DistanceMatrix& dm) {
  const auto d = static_cast<std::size_t>(dm.dist.rows());
  Eigen::MatrixXd dist = dm.dist;
  std::vector<bool> active(d, true);
  std::vector<std::size_t> size(d, 1);

  std::vector<Merge> merges;
  merges.reserve(d - 1);
  for (std::size_t step = 0; step + 1 < d; ++step) {
    std::size_t best_i = 0, best_j = 0;
    double best = std::numeric_limits<double>::infinity();
    bool found = false;
    for (std::size_t i = 0; i < d; ++i) {
      if (!active[i]) continue;
      for (std::size_t j = i + 1; j < d; ++j) {
        if (!active[j]) continue;
        const double dij = dist(static_cast<Eigen::Index>(i),
                                static_cast<Eigen::Index>(j));
        if (!found || dij < best) {
          best = dij;
          best_i = i;
          best_j = j;
          found = true;
        }
        // Ties resolve to the smallest (i, j) pair, which the ascending scan
        // order already guarantees.
      }
    }
    if (!found) throw InternalError("average_linkage: no active pair");

    merges.push_back({best_i, best_j});
    const double wi = static_cast<double>(size[best_i]);
    const double wj = static_cast<double>(size[best_j]);
    for (std::size_t k = 0; k < d; ++k) {
      if (!active[k] || k == best_i || k == best_j) continue;
      const double dik = dist(static_cast<Eigen::Index>(best_i),
                              static_cast<Eigen::Index>(k));
      const double djk = dist(static_cast<Eigen::Index>(best_j),
                              static_cast<Eigen::Index>(k));
      const double merged = (wi * dik + wj * djk) / (wi + wj);
      dist(static_cast<Eigen::Index>(best_i), static_cast<Eigen::Index>(k)) =
          merged;
      dist(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(best_i)) =
          merged;
    }
    size[best_i] += size[best_j];
    active[best_j] = false;
  }
  return merges;
}

}  // namespace detail

// Cuts the average-linkage dendrogram at m clusters. Starting from d
// singletons, the closest pair of clusters merges until m remain; the
// partition for m is therefore always a coarsening of the one for m+1.
inline FeaturePartition agglomerative_cluster(const DistanceMatrix& dm,
                                              std::size_t m) {
  const auto d = static_cast<std::size_t>(dm.dist.rows());
  if (m < 1 || m > d) {
    throw ValidationError("agglomerative_cluster",
                          "m must lie in [1, d]; got m=" + std::to_string(m) +
                              ", d=" + std::to_string(d));
  }
  const auto merges = detail::average_linkage_merges(dm);

  std::vector<std::size_t> rep(d);
  for (std::size_t f = 0; f < d; ++f) rep[f] = f;
  auto find_rep = [&rep](std::size_t f) {
    while (rep[f] != f) {
      rep[f] = rep[rep[f]];
      f = rep[f];
    }
    return f;
  };
  for (std::size_t step = 0; step < d - m; ++step) {
    rep[merges[step].high_rep] = merges[step].low_rep;
  }

  std::vector<std::vector<std::size_t>> sets(d);
  for (std::size_t f = 0; f < d; ++f) sets[find_rep(f)].push_back(f);

  FeaturePartition partition;
  for (auto& set : sets) {
    if (!set.empty()) partition.sets.push_back(std::move(set));
  }
  partition.validate(d);
  if (partition.m() != m) {
    throw InternalError("agglomerative_cluster: produced wrong cluster count");
  }
  return partition;
}

// Davies-Bouldin index in the feature-distance metric, medoid formulation:
// S_i is the mean distance of set members to the set medoid (the member with
// minimal total intra-set distance) and M_ij the medoid-to-medoid distance.
// Coincident medoids (M_ij = 0) make the partition score +infinity.
inline double davies_bouldin(const FeaturePartition& partition,
                             const DistanceMatrix& dm) {
  const std::size_t m = partition.m();
  if (m < 2) {
    throw ValidationError("davies_bouldin", "undefined for fewer than 2 sets");
  }

  std::vector<std::size_t> medoids;
  std::vector<double> dispersions;
  medoids.reserve(m);
  dispersions.reserve(m);
  for (const auto& set : partition.sets) {
    std::size_t medoid = set[0];
    double best_total = std::numeric_limits<double>::infinity();
    for (const std::size_t candidate : set) {
      double total = 0.0;
      for (const std::size_t other : set) {
        total += dm.dist(static_cast<Eigen::Index>(candidate),
                         static_cast<Eigen::Index>(other));
      }
      if (total < best_total) {  // ties keep the lowest index (scan order)
        best_total = total;
        medoid = candidate;
      }
    }
    medoids.push_back(medoid);
    dispersions.push_back(best_total / static_cast<double>(set.size()));
  }

  double sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double worst = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i) continue;
      const double separation =
          dm.dist(static_cast<Eigen::Index>(medoids[i]),
                  static_cast<Eigen::Index>(medoids[j]));
      if (separation == 0.0) {
        return std::numeric_limits<double>::infinity();
      }
      worst = std::max(worst, (dispersions[i] + dispersions[j]) / separation);
    }
    sum += worst;
  }
  return sum / static_cast<double>(m);
}

struct PartitionChoice {
  FeaturePartition partition;
  std::size_t m = 0;
  double db_score = std::numeric_limits<double>::infinity();
  // (m, score) for every candidate evaluated, for the run report.
  std::vector<std::pair<std::size_t, double>> candidates;
  std::vector<std::size_t> zero_variance_features;
};

struct FeatureClusteringOptions {
  bool absolute_corr = false;
  std::size_t max_m = std::numeric_limits<std::size_t>::max();
  // Skips the Davies-Bouldin search entirely; the only way to get m = 1 or
  // m = d.
  std::optional<std::size_t> forced_m;
};

// Evaluates agglomerative_cluster for every m in [2, min(d-1, max_m)] and
// returns the partition minimizing the Davies-Bouldin index; ties break
// toward smaller m. For d = 2 the single candidate is m = 2.
inline PartitionChoice select_partition(
    const ScaledTable& s, const FeatureClusteringOptions& options = {}) {
  const std::size_t d = s.n_features();
  if (d < 2) {
    throw ValidationError("select_partition", "need at least two features");
  }
  const CorrelationResult corr = pearson_corr_matrix(s);
  const DistanceMatrix dm =
      corr_to_distance(corr.corr, s.n_rows(), options.absolute_corr);

  PartitionChoice choice;
  choice.zero_variance_features = corr.zero_variance_features;

  if (options.forced_m.has_value()) {
    choice.m = *options.forced_m;
    choice.partition = agglomerative_cluster(dm, choice.m);
    choice.db_score = choice.m >= 2
                          ? davies_bouldin(choice.partition, dm)
                          : std::numeric_limits<double>::quiet_NaN();
    return choice;
  }

  const std::size_t hi =
      d == 2 ? 2 : std::min(d - 1, std::max<std::size_t>(options.max_m, 2));
  for (std::size_t m = 2; m <= hi; ++m) {
    FeaturePartition candidate = agglomerative_cluster(dm, m);
    const double score = davies_bouldin(candidate, dm);
    choice.candidates.emplace_back(m, score);
    if (choice.m == 0 || score < choice.db_score) {
      choice.db_score = score;
      choice.m = m;
      choice.partition = std::move(candidate);
    }
  }
  return choice;
}

}  // namespace mcgen

#endif  // MCGEN_FEATURE_CLUSTERING_HPP_
