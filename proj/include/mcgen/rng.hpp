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

#ifndef MCGEN_RNG_HPP_
#define MCGEN_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

namespace mcgen {

// Stream labels used to derive independent substreams from one master seed.
// Every randomized stage pulls from its own substream, so stages can be
// reordered, skipped, or run in parallel without changing each other's draws.
enum class Stream : std::uint64_t {
  kSplit = 1,
  kSanitize = 2,
  kSample = 3,
  kShuffle = 4,
  kRound = 5,
  kSweep = 6,
  kMonteCarlo = 7,
  kTest = 99,
};

namespace detail {

// splitmix64 finalizer; used only for seed derivation.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

// Deterministic random stream. The engine is std::mt19937_64 (its output
// sequence is pinned by the standard); all variate transforms are implemented
// here rather than with std::*_distribution, whose output is
// implementation-defined. Identical seeds therefore reproduce identical
// streams across platforms and standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Derives an independent substream from a master seed and a tag path,
  // e.g. substream(seed, Stream::kSample, class_index, ifs_index, cluster).
  template <typename... Tags>
  static Rng substream(std::uint64_t seed, Stream stream, Tags... tags) {
    std::uint64_t s = detail::mix64(seed);
    s = detail::mix64(s ^ detail::mix64(static_cast<std::uint64_t>(stream)));
    ((s = detail::mix64(s ^ detail::mix64(static_cast<std::uint64_t>(tags)))),
     ...);
    return Rng(s);
  }

  std::uint64_t next() { return engine_(); }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer on {0, ..., bound-1}; rejection sampling, no modulo bias.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = engine_();
      if (r >= threshold) return r % bound;
    }
  }

  // Laplace(0, scale) via the inverse CDF: x = -b sgn(u) ln(1 - 2|u|) with
  // u uniform on (-1/2, 1/2). scale = 0 returns 0 (the epsilon -> infinity
  // limit of the mechanism).
  double laplace(double scale) {
    if (scale == 0.0) return 0.0;
    double u = uniform01() - 0.5;
    while (u == -0.5) u = uniform01() - 0.5;
    const double sign = u > 0.0 ? 1.0 : (u < 0.0 ? -1.0 : 0.0);
    return -scale * sign * std::log1p(-2.0 * std::abs(u));
  }

  // Standard normal via Box-Muller; the second deviate of each pair is
  // cached, so consumption stays deterministic per stream.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u1 = uniform01();
    while (u1 == 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cached_ = radius * std::sin(angle);
    has_cached_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

// Fisher-Yates shuffle driven by Rng::below; std::shuffle is not portable
// across standard libraries.
template <typename T>
void shuffle(std::vector<T>& values, Rng& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    std::swap(values[i - 1], values[rng.below(i)]);
  }
}

}  // namespace mcgen

#endif  // MCGEN_RNG_HPP_
