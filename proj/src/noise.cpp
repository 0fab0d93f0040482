// Copyright 2026 The paddles-lab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "paddles/noise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "paddles/errors.hpp"
#include "paddles/rng.hpp"

namespace paddles {

namespace {

void check_common(std::span<const int> clean, int num_classes, double epsilon) {
  if (num_classes < 2) throw InputError("label noise needs at least 2 classes, got " + std::to_string(num_classes));
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw InputError("noise rate " + std::to_string(epsilon) + " outside [0, 1]");
  }
  for (std::size_t i = 0; i < clean.size(); ++i) {
    if (clean[i] < 0 || clean[i] >= num_classes) {
      throw InputError("clean label " + std::to_string(clean[i]) + " at index " + std::to_string(i) +
                       " outside [0, " + std::to_string(num_classes) + ")");
    }
  }
}

NoisyLabels finish(std::span<const int> clean, Labels noisy) {
  NoisyLabels out;
  out.flipped.resize(clean.size());
  for (std::size_t i = 0; i < clean.size(); ++i) out.flipped[i] = noisy[i] != clean[i] ? 1 : 0;
  out.noisy = std::move(noisy);
  return out;
}

}  // namespace

NoisyLabels symmetric_noise(std::span<const int> clean, int num_classes, double epsilon, std::uint64_t seed) {
  check_common(clean, num_classes, epsilon);
  Rng rng(seed);
  Labels noisy(clean.begin(), clean.end());
  for (std::size_t i = 0; i < clean.size(); ++i) {
    if (rng.uniform() < epsilon) {
      const int other = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(num_classes - 1)));
      noisy[i] = other < clean[i] ? other : other + 1;
    }
  }
  return finish(clean, std::move(noisy));
}

NoisyLabels pairflip_noise(std::span<const int> clean, int num_classes, double epsilon, std::uint64_t seed) {
  check_common(clean, num_classes, epsilon);
  if (epsilon > 0.5) {
    throw InputError("pairflip noise rate " + std::to_string(epsilon) +
                     " exceeds 0.5: the true class would no longer be identifiable");
  }
  Rng rng(seed);
  Labels noisy(clean.begin(), clean.end());
  for (std::size_t i = 0; i < clean.size(); ++i) {
    if (rng.uniform() < epsilon) noisy[i] = (clean[i] + 1) % num_classes;
  }
  return finish(clean, std::move(noisy));
}

std::vector<double> instance_flip_distribution(std::span<const double> x, std::span<const double> projection,
                                               double q, int clean, int num_classes) {
  const auto k = static_cast<std::size_t>(num_classes);
  const std::size_t d = x.size();
  if (projection.size() != d * k) throw DimensionError("instance noise: projection does not match feature size");
  std::vector<double> scores(k, 0.0);
  for (std::size_t f = 0; f < d; ++f)
    for (std::size_t c = 0; c < k; ++c) scores[c] += x[f] * projection[f * k + c];

  const auto y = static_cast<std::size_t>(clean);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < k; ++c)
    if (c != y) top = std::max(top, scores[c]);
  std::vector<double> dist(k, 0.0);
  double total = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    if (c == y) continue;
    dist[c] = std::exp(scores[c] - top);
    total += dist[c];
  }
  for (std::size_t c = 0; c < k; ++c) dist[c] = c == y ? 1.0 - q : q * dist[c] / total;
  return dist;
}

NoisyLabels instance_noise(const Tensor& features, std::span<const int> clean, int num_classes, double epsilon,
                           std::uint64_t seed) {
  check_common(clean, num_classes, epsilon);
  const std::size_t n = clean.size();
  if (!features.defined() || features.rank() < 1 || features.dim(0) != n) {
    throw DimensionError("instance noise: features do not hold " + std::to_string(n) + " samples");
  }
  const std::size_t d = n == 0 ? 0 : features.numel() / n;
  if (d == 0) throw InputError("instance noise: feature dimension is 0");
  const auto k = static_cast<std::size_t>(num_classes);

  const Rng root(seed);
  Rng rate_rng = root.split(0);
  Rng proj_rng = root.split(1);
  Rng label_rng = root.split(2);

  std::vector<double> q(n);
  for (auto& qi : q) {
    double v = rate_rng.normal(epsilon, kInstanceRateStd);
    while (v < 0.0 || v > 1.0) v = rate_rng.normal(epsilon, kInstanceRateStd);
    qi = v;
  }
  std::vector<double> projection(d * k);
  for (auto& w : projection) w = proj_rng.normal();

  auto fv = features.values();
  Labels noisy(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto dist = instance_flip_distribution(fv.subspan(i * d, d), projection, q[i], clean[i], num_classes);
    const double u = label_rng.uniform();
    double cum = 0.0;
    int pick = clean[i];
    for (std::size_t c = 0; c < k; ++c) {
      if (dist[c] <= 0.0) continue;
      cum += dist[c];
      pick = static_cast<int>(c);
      if (u < cum) break;
    }
    noisy[i] = pick;
  }
  NoisyLabels out = finish(clean, std::move(noisy));
  out.flip_rate = std::move(q);
  return out;
}

NoisyDataset corrupt(const LabeledSet& clean, const NoiseSpec& spec) {
  clean.validate();
  NoisyLabels drawn;
  switch (spec.kind) {
    case NoiseKind::None:
      if (spec.epsilon != 0.0) throw InputError("noise kind 'none' requires epsilon 0");
      drawn = finish(clean.labels, clean.labels);
      break;
    case NoiseKind::Symmetric:
      drawn = symmetric_noise(clean.labels, clean.num_classes, spec.epsilon, spec.seed);
      break;
    case NoiseKind::Pairflip:
      drawn = pairflip_noise(clean.labels, clean.num_classes, spec.epsilon, spec.seed);
      break;
    case NoiseKind::Instance:
      drawn = instance_noise(clean.features, clean.labels, clean.num_classes, spec.epsilon, spec.seed);
      break;
  }
  NoisyDataset ds;
  ds.features = clean.features;
  ds.clean_labels = clean.labels;
  ds.noisy_labels = std::move(drawn.noisy);
  ds.flipped = std::move(drawn.flipped);
  ds.flip_rate = std::move(drawn.flip_rate);
  ds.num_classes = clean.num_classes;
  ds.noise_kind = spec.kind;
  ds.epsilon = spec.epsilon;
  ds.noise_seed = spec.seed;
  ds.validate();
  return ds;
}

NoiseReport noise_report(const NoisyDataset& ds) {
  NoiseReport r;
  r.num_classes = ds.num_classes;
  const auto k = static_cast<std::size_t>(ds.num_classes);
  std::vector<std::size_t> counts(k * k, 0);
  r.flip_counts.assign(k, 0);
  r.class_counts.assign(k, 0);
  std::size_t disagree = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto y = static_cast<std::size_t>(ds.clean_labels[i]);
    const auto z = static_cast<std::size_t>(ds.noisy_labels[i]);
    ++counts[y * k + z];
    ++r.class_counts[y];
    if (y != z) {
      ++disagree;
      ++r.flip_counts[y];
    }
  }
  r.disagreement = ds.size() == 0 ? 0.0 : static_cast<double>(disagree) / static_cast<double>(ds.size());
  r.transition.assign(k * k, 0.0);
  for (std::size_t y = 0; y < k; ++y) {
    if (r.class_counts[y] == 0) continue;
    for (std::size_t z = 0; z < k; ++z) {
      r.transition[y * k + z] = static_cast<double>(counts[y * k + z]) / static_cast<double>(r.class_counts[y]);
    }
  }
  return r;
}

}  // namespace paddles
