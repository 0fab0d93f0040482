// Copyright 2026 The paddles-lab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "paddles/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "paddles/errors.hpp"
#include "paddles/rng.hpp"

namespace paddles {

namespace {

Labels balanced_labels(std::size_t n, int k, Rng& rng) {
  Labels labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % static_cast<std::size_t>(k));
  const auto order = rng.permutation(n);
  Labels shuffled(n);
  for (std::size_t i = 0; i < n; ++i) shuffled[i] = labels[order[i]];
  return shuffled;
}

// Distinct low spatial frequencies, lowest first; (u, v) and (-u, -v) are
// the same wave, so only one of each pair is listed.
std::vector<std::pair<int, int>> frequency_table(std::size_t height, std::size_t width, std::size_t count) {
  std::vector<std::pair<int, int>> table;
  const int hmax = static_cast<int>(height / 2), wmax = static_cast<int>(width / 2);
  for (int radius = 1; table.size() < count && radius <= hmax + wmax; ++radius) {
    for (int u = 0; u <= hmax && table.size() < count; ++u) {
      for (int v = -wmax + 1; v <= wmax && table.size() < count; ++v) {
        if (std::abs(u) + std::abs(v) != radius) continue;
        if (u == 0 && v < 0) continue;
        table.emplace_back(u, v);
      }
    }
  }
  if (table.size() < count) throw ConfigError("tiny images: grid too small for the requested number of classes");
  return table;
}

}  // namespace

LabeledSet gaussian_blobs(const BlobSpec& spec, std::size_t n, std::uint64_t stream) {
  if (spec.dim == 0) throw ConfigError("gaussian blobs: dim must be positive");
  if (spec.num_classes < 2) throw ConfigError("gaussian blobs: need at least 2 classes");
  const Rng root(spec.seed);
  Rng centre_rng = root.split(0);
  const auto k = static_cast<std::size_t>(spec.num_classes);
  std::vector<double> centres(k * spec.dim);
  for (auto& c : centres) c = centre_rng.normal(0.0, spec.separation);

  Rng sample_rng = root.split(1000 + stream);
  LabeledSet out;
  out.num_classes = spec.num_classes;
  out.labels = balanced_labels(n, spec.num_classes, sample_rng);
  std::vector<double> values(n * spec.dim);
  for (std::size_t i = 0; i < n; ++i) {
    const auto y = static_cast<std::size_t>(out.labels[i]);
    for (std::size_t f = 0; f < spec.dim; ++f) {
      values[i * spec.dim + f] = centres[y * spec.dim + f] + sample_rng.normal(0.0, spec.spread);
    }
  }
  out.features = Tensor::from({n, spec.dim}, std::move(values));
  return out;
}

LabeledSet tiny_images(const TinyImageSpec& spec, std::size_t n, std::uint64_t stream) {
  if (spec.height < 2 || spec.width < 2 || spec.channels == 0) throw ConfigError("tiny images: bad image shape");
  if (spec.num_classes < 2) throw ConfigError("tiny images: need at least 2 classes");
  const auto k = static_cast<std::size_t>(spec.num_classes);
  const auto freqs = frequency_table(spec.height, spec.width, k);
  const Rng root(spec.seed);
  Rng structure_rng = root.split(0);
  std::vector<double> class_phase(k * spec.channels);
  for (auto& p : class_phase) p = 2.0 * std::numbers::pi * structure_rng.uniform();

  Rng sample_rng = root.split(1000 + stream);
  LabeledSet out;
  out.num_classes = spec.num_classes;
  out.labels = balanced_labels(n, spec.num_classes, sample_rng);
  const std::size_t plane = spec.height * spec.width;
  std::vector<double> values(n * spec.channels * plane);
  for (std::size_t i = 0; i < n; ++i) {
    const auto y = static_cast<std::size_t>(out.labels[i]);
    const auto [u, v] = freqs[y];
    const double amplitude = 0.8 + 0.4 * sample_rng.uniform();
    const double jitter = spec.phase_jitter * (2.0 * sample_rng.uniform() - 1.0);
    for (std::size_t c = 0; c < spec.channels; ++c) {
      const double phi = class_phase[y * spec.channels + c] + jitter;
      for (std::size_t h = 0; h < spec.height; ++h) {
        for (std::size_t w = 0; w < spec.width; ++w) {
          const double arg = 2.0 * std::numbers::pi *
                             (static_cast<double>(u) * static_cast<double>(h) / static_cast<double>(spec.height) +
                              static_cast<double>(v) * static_cast<double>(w) / static_cast<double>(spec.width));
          values[(i * spec.channels + c) * plane + h * spec.width + w] =
              amplitude * std::cos(arg + phi) + sample_rng.normal(0.0, spec.pixel_noise);
        }
      }
    }
  }
  out.features = Tensor::from({n, spec.channels, spec.height, spec.width}, std::move(values));
  return out;
}

}  // namespace paddles
