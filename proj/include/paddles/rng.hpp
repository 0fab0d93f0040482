// Copyright 2026 The paddles-lab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace paddles {

/// SplitMix64 finalizer (Steele, Lea & Flood). Used to whiten user seeds and
/// to derive independent child streams.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed of child stream `stream` of a generator seeded with `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Portable, splittable random source.
///
/// The raw engine is std::mt19937_64, whose output sequence is fixed by the
/// C++ standard. Distributions are implemented here rather than taken from
/// <random>, since the standard leaves their algorithms unspecified:
///   - uniform():       top 53 bits of one engine draw, scaled to [0, 1)
///   - uniform_index(): rejection sampling on the raw 64-bit draw
///   - normal():        Box-Muller, two uniforms per variate, no caching
/// A given seed therefore produces the same stream on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  /// Independent generator for sub-stream `stream`. Pure function of
  /// (seed, stream); does not advance this generator.
  Rng split(std::uint64_t stream) const;

  std::uint64_t next_u64() { return engine_(); }
  double uniform();
  std::uint64_t uniform_index(std::uint64_t n);
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Fisher-Yates permutation of 0..n-1.
  std::vector<std::size_t> permutation(std::size_t n);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace paddles
