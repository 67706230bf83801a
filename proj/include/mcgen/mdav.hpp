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

#ifndef MCGEN_MDAV_HPP_
#define MCGEN_MDAV_HPP_

#include <Eigen/Dense>
#include <algorithm>
#include <limits>
#include <string>
#include <vector>

#include "mcgen/error.hpp"
#include "mcgen/table.hpp"

namespace mcgen {

// Row-to-cluster assignment from microaggregation. Every cluster has exactly
// k rows except at most one whose size lies in [k, 2k-1]; with fewer than k
// input rows the whole input becomes a single undersized cluster and
// `undersized` is set.
struct ClusterAssignment {
  std::vector<std::size_t> cluster_ids;   // one entry per input row
  std::vector<std::size_t> cluster_sizes;
  bool undersized = false;

  std::size_t cluster_count() const { return cluster_sizes.size(); }
};

// Column-subset copy of the feature matrix, rows in original order.
inline Eigen::MatrixXd project(const ScaledTable& s,
                               const std::vector<std::size_t>& feature_set) {
  if (feature_set.empty()) {
    throw ValidationError("project", "empty feature set");
  }
  std::vector<bool> seen(s.n_features(), false);
  for (const std::size_t f : feature_set) {
    if (f >= s.n_features()) {
      throw ValidationError("project", "feature index " + std::to_string(f) +
                                           " out of range");
    }
    if (seen[f]) {
      throw ValidationError("project", "duplicate feature index " +
                                           std::to_string(f));
    }
    seen[f] = true;
  }
  Eigen::MatrixXd out(s.values.rows(),
                      static_cast<Eigen::Index>(feature_set.size()));
  for (std::size_t i = 0; i < feature_set.size(); ++i) {
    out.col(static_cast<Eigen::Index>(i)) =
        s.values.col(static_cast<Eigen::Index>(feature_set[i]));
  }
  return out;
}

namespace detail {

// Index of the unassigned row farthest from `reference` in squared Euclidean
// distance; the lowest row index wins ties.
inline std::size_t farthest_from(const Eigen::MatrixXd& points,
                                 const std::vector<std::size_t>& unassigned,
                                 const Eigen::RowVectorXd& reference) {
  std::size_t best = unassigned.front();
  double best_dist = -1.0;
  for (const std::size_t r : unassigned) {
    const double dist =
        (points.row(static_cast<Eigen::Index>(r)) - reference).squaredNorm();
    if (dist > best_dist) {
      best_dist = dist;
      best = r;
    }
  }
  return best;
}

// Forms a cluster of `anchor` plus its k-1 nearest unassigned rows; ties
// order by (distance, row index).
inline std::vector<std::size_t> nearest_cluster(
    const Eigen::MatrixXd& points, std::vector<std::size_t>& unassigned,
    std::size_t anchor, std::size_t k) {
  const Eigen::RowVectorXd anchor_row =
      points.row(static_cast<Eigen::Index>(anchor));
  std::vector<std::pair<double, std::size_t>> by_distance;
  by_distance.reserve(unassigned.size());
  for (const std::size_t r : unassigned) {
    if (r == anchor) continue;
    by_distance.emplace_back(
        (points.row(static_cast<Eigen::Index>(r)) - anchor_row).squaredNorm(),
        r);
  }
  std::sort(by_distance.begin(), by_distance.end());

  std::vector<std::size_t> members{anchor};
  for (std::size_t i = 0; i + 1 < k && i < by_distance.size(); ++i) {
    members.push_back(by_distance[i].second);
  }
  std::vector<std::size_t> rest;
  rest.reserve(unassigned.size() - members.size());
  for (const std::size_t r : unassigned) {
    if (std::find(members.begin(), members.end(), r) == members.end()) {
      rest.push_back(r);
    }
  }
  unassigned = std::move(rest);
  return members;
}

}  // namespace detail

// Maximum-distance-to-average-record microaggregation in Euclidean distance.
// While at least 2k rows are unassigned: take the row r farthest from the
// centroid of the unassigned rows and cluster it with its k-1 nearest
// neighbours; if at least 2k rows still remain, do the same around the row
// farthest from r. The final k..2k-1 rows form one last cluster. All
// distance ties resolve to the lowest row index.
inline ClusterAssignment mdav(const Eigen::MatrixXd& points, std::size_t k,
                              std::vector<std::string>* warnings = nullptr) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (n == 0) throw ValidationError("mdav", "no rows");
  if (k == 0) throw ValidationError("mdav", "k must be at least 1");

  ClusterAssignment assignment;
  assignment.cluster_ids.assign(n, 0);

  if (n < k) {
    assignment.cluster_sizes = {n};
    assignment.undersized = true;
    if (warnings != nullptr) {
      warnings->push_back("mdav: " + std::to_string(n) + " rows with k=" +
                          std::to_string(k) +
                          "; emitting a single undersized cluster");
    }
    return assignment;
  }

  std::vector<std::size_t> unassigned(n);
  for (std::size_t r = 0; r < n; ++r) unassigned[r] = r;

  auto emit = [&assignment](const std::vector<std::size_t>& members) {
    const std::size_t id = assignment.cluster_sizes.size();
    for (const std::size_t r : members) assignment.cluster_ids[r] = id;
    assignment.cluster_sizes.push_back(members.size());
  };

  while (unassigned.size() >= 2 * k) {
    Eigen::RowVectorXd centroid =
        Eigen::RowVectorXd::Zero(points.cols());
    for (const std::size_t r : unassigned) {
      centroid += points.row(static_cast<Eigen::Index>(r));
    }
    centroid /= static_cast<double>(unassigned.size());

    const std::size_t far = detail::farthest_from(points, unassigned, centroid);
    const Eigen::RowVectorXd far_row =
        points.row(static_cast<Eigen::Index>(far));
    emit(detail::nearest_cluster(points, unassigned, far, k));

    if (unassigned.size() >= 2 * k) {
      const std::size_t opposite =
          detail::farthest_from(points, unassigned, far_row);
      emit(detail::nearest_cluster(points, unassigned, opposite, k));
    }
  }
  if (!unassigned.empty()) emit(unassigned);

  std::size_t total = 0;
  for (const std::size_t size : assignment.cluster_sizes) total += size;
  if (total != n) throw InternalError("mdav: cluster sizes do not sum to n");
  return assignment;
}

// Convenience: the rows of one cluster, in original row order.
inline Eigen::MatrixXd cluster_rows(const Eigen::MatrixXd& points,
                                    const ClusterAssignment& assignment,
                                    std::size_t cluster) {
  Eigen::MatrixXd out(
      static_cast<Eigen::Index>(assignment.cluster_sizes[cluster]),
      points.cols());
  Eigen::Index row = 0;
  for (std::size_t r = 0; r < assignment.cluster_ids.size(); ++r) {
    if (assignment.cluster_ids[r] == cluster) {
      out.row(row++) = points.row(static_cast<Eigen::Index>(r));
    }
  }
  return out;
}

}  // namespace mcgen

#endif  // MCGEN_MDAV_HPP_
