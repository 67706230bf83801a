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

#include "mcgen/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

namespace mcgen {
namespace {

TEST(RngTest, SubstreamsAreReproducible) {
  Rng a = Rng::substream(42, Stream::kSample, 1, 2, 3);
  Rng b = Rng::substream(42, Stream::kSample, 1, 2, 3);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
}

TEST(RngTest, SubstreamsWithDifferentTagsDiverge) {
  Rng a = Rng::substream(42, Stream::kSample, 1, 2, 3);
  Rng b = Rng::substream(42, Stream::kSample, 1, 2, 4);
  Rng c = Rng::substream(42, Stream::kSanitize, 1, 2, 3);
  EXPECT_NE(a.next(), b.next());
  Rng a2 = Rng::substream(42, Stream::kSample, 1, 2, 3);
  EXPECT_NE(a2.next(), c.next());
}

TEST(RngTest, Uniform01StaysInRange) {
  Rng rng(7);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform01();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}

TEST(RngTest, BelowStaysInBounds) {
  Rng rng(11);
  for (int i = 0; i < 10000; ++i) {
    EXPECT_LT(rng.below(7), 7u);
  }
  EXPECT_EQ(rng.below(1), 0u);
}

TEST(RngTest, LaplaceZeroScaleIsZero) {
  Rng rng(3);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(rng.laplace(0.0), 0.0);
}

// Laplace(0, b) has mean 0 and variance 2b^2.
TEST(RngTest, LaplaceMomentsMatchAnalytic) {
  Rng rng(12345);
  const std::size_t n = 1000000;
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rng.laplace(1.0);
    sum += x;
    sum_sq += x * x;
  }
  const double mean = sum / static_cast<double>(n);
  const double var = sum_sq / static_cast<double>(n) - mean * mean;
  EXPECT_NEAR(mean, 0.0, 0.01);
  EXPECT_NEAR(var, 2.0, 0.04);  // 2% of 2
}

TEST(RngTest, NormalMomentsAreSane) {
  Rng rng(99);
  const std::size_t n = 200000;
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sum_sq += x * x;
  }
  const double mean = sum / static_cast<double>(n);
  EXPECT_NEAR(mean, 0.0, 0.01);
  EXPECT_NEAR(sum_sq / static_cast<double>(n) - mean * mean, 1.0, 0.02);
}

TEST(RngTest, ShuffleIsDeterministicPermutation) {
  std::vector<int> v(20);
  std::iota(v.begin(), v.end(), 0);
  std::vector<int> w = v;
  Rng a(5), b(5);
  shuffle(v, a);
  shuffle(w, b);
  EXPECT_EQ(v, w);
  std::sort(w.begin(), w.end());
  std::vector<int> sorted(20);
  std::iota(sorted.begin(), sorted.end(), 0);
  EXPECT_EQ(w, sorted);
}

}  // namespace
}  // namespace mcgen
