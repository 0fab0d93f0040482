// Copyright 2026 The paddles-lab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "paddles/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "paddles/errors.hpp"
#include "paddles/model.hpp"
#include "paddles/ops.hpp"
#include "paddles/rng.hpp"
#include "paddles/trainer.hpp"

namespace paddles {

Augmentation identity_augmentation() {
  return [](const Tensor& batch, std::span<const std::size_t>) { return batch; };
}

Augmentation gaussian_feature_noise(const Tensor& reference, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0)) throw ConfigError("augmentation noise fraction must be non-negative");
  const std::size_t n = reference.dim(0);
  const std::size_t d = n == 0 ? 0 : reference.numel() / n;
  std::vector<double> sigma(d, 0.0);
  auto v = reference.values();
  for (std::size_t f = 0; f < d; ++f) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += v[i * d + f];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) var += (v[i * d + f] - mean) * (v[i * d + f] - mean);
    sigma[f] = fraction * std::sqrt(var / static_cast<double>(n));
  }
  return [sigma, seed, d](const Tensor& batch, std::span<const std::size_t> samples) {
    if (batch.numel() != samples.size() * d) throw DimensionError("augmentation: batch does not match feature size");
    std::vector<double> out(batch.values().begin(), batch.values().end());
    for (std::size_t r = 0; r < samples.size(); ++r) {
      Rng rng = Rng(seed).split(samples[r]);
      for (std::size_t f = 0; f < d; ++f) out[r * d + f] += sigma[f] * rng.normal();
    }
    return Tensor::from(batch.shape(), std::move(out));
  };
}

std::vector<double> predict_probabilities(const SegmentedModel& model, const Tensor& features,
                                          const Augmentation& augment, std::size_t batch_size) {
  NoGradGuard no_grad;
  const std::size_t n = features.dim(0);
  std::vector<double> probs;
  probs.reserve(n * model.num_classes());
  std::vector<std::size_t> rows;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t stop = std::min(n, start + batch_size);
    rows.resize(stop - start);
    std::iota(rows.begin(), rows.end(), start);
    const Tensor batch = augment(gather_rows(features, rows), rows);
    const auto p = softmax_rows(model.forward_plain(batch));
    probs.insert(probs.end(), p.begin(), p.end());
  }
  return probs;
}

ConfidentSplit split_from_probabilities(std::span<const double> probs_a, std::span<const double> probs_b,
                                        std::size_t num_classes, std::span<const int> noisy_labels) {
  const std::size_t n = noisy_labels.size();
  if (num_classes == 0 || probs_a.size() != n * num_classes || probs_b.size() != n * num_classes) {
    throw DimensionError("confident split: probability tables do not match " + std::to_string(n) + " x " +
                         std::to_string(num_classes));
  }
  ConfidentSplit split;
  split.predicted.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = 0;
    double best_score = 0.5 * (probs_a[i * num_classes] + probs_b[i * num_classes]);
    for (std::size_t c = 1; c < num_classes; ++c) {
      const double score = 0.5 * (probs_a[i * num_classes + c] + probs_b[i * num_classes + c]);
      if (score > best_score) {
        best = c;
        best_score = score;
      }
    }
    split.predicted[i] = static_cast<int>(best);
    if (noisy_labels[i] == split.predicted[i]) {
      split.labeled.push_back(i);
      split.labeled_labels.push_back(noisy_labels[i]);
    } else {
      split.unlabeled.push_back(i);
    }
  }
  return split;
}

ConfidentSplit select_confident(const SegmentedModel& model, const NoisyDataset& data, const Augmentation& first,
                                const Augmentation& second) {
  const auto pa = predict_probabilities(model, data.features, first);
  const auto pb = predict_probabilities(model, data.features, second);
  return split_from_probabilities(pa, pb, model.num_classes(), data.noisy_labels);
}

SplitMetrics label_metrics(const ConfidentSplit& split, std::span<const int> clean_labels,
                           std::span<const int> noisy_labels) {
  if (clean_labels.size() != noisy_labels.size()) throw InputError("label metrics: label arrays differ in length");
  SplitMetrics m;
  for (std::size_t i = 0; i < clean_labels.size(); ++i) m.correct_total += clean_labels[i] == noisy_labels[i] ? 1 : 0;
  for (std::size_t i : split.labeled) {
    if (i >= clean_labels.size()) throw InputError("label metrics: split index " + std::to_string(i) + " out of range");
    m.confident_correct += clean_labels[i] == noisy_labels[i] ? 1 : 0;
  }
  m.confident_count = split.labeled.size();
  m.recall_defined = m.correct_total > 0;
  m.precision_defined = m.confident_count > 0;
  m.label_recall =
      m.recall_defined ? static_cast<double>(m.confident_correct) / static_cast<double>(m.correct_total) : 0.0;
  m.label_precision =
      m.precision_defined ? static_cast<double>(m.confident_correct) / static_cast<double>(m.confident_count) : 0.0;
  return m;
}

SplitMetrics evaluate(const ConfidentSplit& split, const NoisyDataset& data, const SegmentedModel& model,
                      const LabeledSet& test) {
  SplitMetrics m = label_metrics(split, data.clean_labels, data.noisy_labels);
  m.test_accuracy = accuracy(model, test);
  return m;
}

}  // namespace paddles
