// Copyright 2026 The paddles-lab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "paddles/dataset.hpp"
#include "paddles/tensor.hpp"

namespace paddles {

class SegmentedModel;

/// Partition of the training set by agreement between the observed label
/// and the augmentation-averaged prediction.
struct ConfidentSplit {
  std::vector<std::size_t> labeled;  // D_lb, ascending sample index
  Labels labeled_labels;             // retained noisy label per D_lb entry
  std::vector<std::size_t> unlabeled;  // D_ub, ascending
  Labels predicted;                  // argmax prediction for every sample
};

/// Maps a batch of samples (rows of the feature tensor) to augmented rows.
/// `samples` are the dataset indices of the batch rows, so augmentations
/// can be seeded per sample.
using Augmentation = std::function<Tensor(const Tensor& batch, std::span<const std::size_t> samples)>;

Augmentation identity_augmentation();

/// Adds N(0, (fraction * std_f)^2) to every feature f, where std_f is the
/// feature's standard deviation over `reference`. Sample i draws from
/// Rng(seed).split(i).
Augmentation gaussian_feature_noise(const Tensor& reference, double fraction, std::uint64_t seed);

/// Row-wise softmax of the model under `augment`, [N x K] flattened.
std::vector<double> predict_probabilities(const SegmentedModel& model, const Tensor& features,
                                          const Augmentation& augment, std::size_t batch_size = 256);

/// Split from two probability tables: prediction = argmax of their mean
/// (ties -> lowest class index); sample i is confident iff its noisy label
/// equals the prediction.
ConfidentSplit split_from_probabilities(std::span<const double> probs_a, std::span<const double> probs_b,
                                        std::size_t num_classes, std::span<const int> noisy_labels);

ConfidentSplit select_confident(const SegmentedModel& model, const NoisyDataset& data, const Augmentation& first,
                                const Augmentation& second);

struct SplitMetrics {
  double test_accuracy = 0.0;
  double label_recall = 0.0;     // |D_lb correct| / |all correct|
  double label_precision = 0.0;  // |D_lb correct| / |D_lb|
  bool recall_defined = true;    // false when no sample is correctly labeled
  bool precision_defined = true; // false when D_lb is empty
  std::size_t confident_count = 0;
  std::size_t confident_correct = 0;
  std::size_t correct_total = 0;
};

/// Label recall and precision of a split against the hidden clean labels.
/// test_accuracy is left at 0.
SplitMetrics label_metrics(const ConfidentSplit& split, std::span<const int> clean_labels,
                           std::span<const int> noisy_labels);

SplitMetrics evaluate(const ConfidentSplit& split, const NoisyDataset& data, const SegmentedModel& model,
                      const LabeledSet& test);

}  // namespace paddles
