// Copyright 2026 The paddles-lab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "paddles/tensor.hpp"

namespace paddles {

using Labels = std::vector<int>;

enum class NoiseKind { None, Symmetric, Pairflip, Instance };

std::string to_string(NoiseKind kind);
NoiseKind noise_kind_from_string(const std::string& name);

/// Features with trustworthy labels (test sets, pre-corruption data).
struct LabeledSet {
  Tensor features;  // [N x ...]
  Labels labels;
  int num_classes = 0;

  std::size_t size() const { return labels.size(); }
  void validate() const;
};

/// Training data as seen by a noisy-label learner, plus the hidden ground
/// truth that only the metrics may look at.
struct NoisyDataset {
  Tensor features;  // [N x ...]
  Labels clean_labels;
  Labels noisy_labels;
  int num_classes = 0;

  NoiseKind noise_kind = NoiseKind::None;
  double epsilon = 0.0;
  std::uint64_t noise_seed = 0;
  std::vector<double> flip_rate;  // per-sample q_i, instance-dependent noise only
  std::vector<std::uint8_t> flipped;

  std::size_t size() const { return clean_labels.size(); }
  /// Checks label ranges, sizes and flipped <=> (noisy != clean).
  void validate() const;

  LabeledSet clean_view() const { return {features, clean_labels, num_classes}; }
};

/// Directory layout:
///   features.bin   raw little-endian float64, row-major
///   features.json  {"magic": "PADDLES-TENSOR", "version": 1, "dtype": "float64", "shape": [...]}
///   labels.json    {k, noise_kind, epsilon, seed, clean_labels, noisy_labels, q}
void save_dataset(const std::filesystem::path& dir, const NoisyDataset& ds);
NoisyDataset load_dataset(const std::filesystem::path& dir);

}  // namespace paddles
