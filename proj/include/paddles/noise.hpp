// Copyright 2026 The paddles-lab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "paddles/dataset.hpp"

namespace paddles {

struct NoiseSpec {
  NoiseKind kind = NoiseKind::None;
  double epsilon = 0.0;
  std::uint64_t seed = 0;
};

/// Output of a label-noise generator.
struct NoisyLabels {
  Labels noisy;
  std::vector<std::uint8_t> flipped;
  std::vector<double> flip_rate;  // instance noise only
};

/// With probability eps a label moves to one of the K-1 other classes,
/// chosen uniformly; the expected disagreement rate is exactly eps.
NoisyLabels symmetric_noise(std::span<const int> clean, int num_classes, double epsilon, std::uint64_t seed);

/// With probability eps, y -> (y + 1) mod K. Requires eps <= 0.5.
NoisyLabels pairflip_noise(std::span<const int> clean, int num_classes, double epsilon, std::uint64_t seed);

/// Instance-dependent noise. Per sample, q_i ~ Normal(eps, 0.1^2) truncated
/// to [0, 1] (rejection sampling). A single projection W (d x K, standard
/// normal entries) scores each sample; the noisy label is drawn from
/// instance_flip_distribution(). Random streams: split(0) drives q,
/// split(1) drives W, split(2) drives the label draws.
NoisyLabels instance_noise(const Tensor& features, std::span<const int> clean, int num_classes, double epsilon,
                           std::uint64_t seed);

inline constexpr double kInstanceRateStd = 0.1;

/// q * softmax(x W) over the wrong classes, plus mass 1 - q on `clean`.
std::vector<double> instance_flip_distribution(std::span<const double> x, std::span<const double> projection,
                                               double q, int clean, int num_classes);

/// Applies `spec` to a clean labeled set.
NoisyDataset corrupt(const LabeledSet& clean, const NoiseSpec& spec);

struct NoiseReport {
  int num_classes = 0;
  double disagreement = 0.0;
  std::vector<double> transition;       // K x K, rows = clean class, row-normalized
  std::vector<std::size_t> flip_counts;  // flipped samples per clean class
  std::vector<std::size_t> class_counts;

  double transition_at(int clean, int noisy) const {
    return transition[static_cast<std::size_t>(clean) * static_cast<std::size_t>(num_classes) +
                      static_cast<std::size_t>(noisy)];
  }
};

/// Realized disagreement and empirical transition matrix. Rows of classes
/// with no samples are left at zero.
NoiseReport noise_report(const NoisyDataset& ds);

}  // namespace paddles
