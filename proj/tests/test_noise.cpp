// Copyright 2026 The paddles-lab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numeric>

#include "oracles.hpp"
#include "paddles/dataset.hpp"
#include "paddles/errors.hpp"
#include "paddles/noise.hpp"
#include "paddles/rng.hpp"
#include "paddles/synthetic.hpp"

using namespace paddles;

namespace {

Labels balanced_labels(std::size_t n, int k) {
  Labels y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<int>(i % static_cast<std::size_t>(k));
  return y;
}

double disagreement(const Labels& a, const Labels& b) {
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i] ? 1 : 0;
  return static_cast<double>(d) / static_cast<double>(a.size());
}

LabeledSet gaussian_set(std::size_t n, std::size_t d, int k, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(n * d);
  for (double& v : x) v = rng.normal();
  return {Tensor::from({n, d}, std::move(x)), balanced_labels(n, k), k};
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("paddles_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("symmetric noise edge cases") {
  const Labels y = balanced_labels(1000, 10);
  CHECK(symmetric_noise(y, 10, 0.0, 1).noisy == y);

  const Labels two = balanced_labels(500, 2);
  const auto flipped = symmetric_noise(two, 2, 1.0, 2);
  for (std::size_t i = 0; i < two.size(); ++i) CHECK(flipped.noisy[i] == 1 - two[i]);

  CHECK_THROWS_AS(symmetric_noise(y, 10, 1.2, 3), InputError);
  CHECK_THROWS_AS(symmetric_noise(y, 10, -0.1, 3), InputError);
}

TEST_CASE("symmetric noise rate and uniform off-diagonal rows") {
  const Labels y = balanced_labels(100000, 10);
  const auto out = symmetric_noise(y, 10, 0.5, 4);
  const double rate = disagreement(y, out.noisy);
  CHECK(rate >= 0.49);
  CHECK(rate <= 0.51);
  NoisyDataset ds;
  ds.clean_labels = y;
  ds.noisy_labels = out.noisy;
  ds.flipped = out.flipped;
  ds.num_classes = 10;
  const NoiseReport r = noise_report(ds);
  // Each row holds 10k samples; cells are binomial around eps / (K - 1).
  const double p = 0.5 / 9.0, sd = std::sqrt(p * (1.0 - p) / 10000.0);
  for (int a = 0; a < 10; ++a)
    for (int b = 0; b < 10; ++b)
      if (a != b) CHECK(std::abs(r.transition_at(a, b) - p) < 5.0 * sd);
}

TEST_CASE("no generator maps a flip onto the clean class") {
  const Labels y = balanced_labels(20000, 7);
  const auto x = gaussian_set(20000, 5, 7, 5);
  for (const NoisyLabels& out : {symmetric_noise(y, 7, 0.6, 6), pairflip_noise(y, 7, 0.4, 7),
                                 instance_noise(x.features, y, 7, 0.4, 8)}) {
    for (std::size_t i = 0; i < y.size(); ++i) CHECK((out.flipped[i] != 0) == (out.noisy[i] != y[i]));
  }
}

TEST_CASE("pairflip noise") {
  const Labels y = balanced_labels(1000, 10);
  CHECK(pairflip_noise(y, 10, 0.0, 1).noisy == y);
  const Labels last{9};
  // Forcing a flip on a single K-1 label wraps to class 0.
  bool wrapped = false;
  for (std::uint64_t s = 0; s < 64 && !wrapped; ++s) {
    const auto out = pairflip_noise(last, 10, 0.5, s);
    if (out.flipped[0]) {
      CHECK(out.noisy[0] == 0);
      wrapped = true;
    }
  }
  CHECK(wrapped);

  try {
    pairflip_noise(y, 10, 0.6, 3);
    FAIL("expected an InputError");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("identifiab") != std::string::npos);
  }

  const Labels big = balanced_labels(100000, 10);
  const auto out = pairflip_noise(big, 10, 0.45, 9);
  const double rate = disagreement(big, out.noisy);
  CHECK(rate >= 0.44);
  CHECK(rate <= 0.46);
  for (std::size_t i = 0; i < big.size(); ++i)
    if (out.noisy[i] != big[i]) CHECK(out.noisy[i] == (big[i] + 1) % 10);
}

TEST_CASE("pairflip transitions live on the diagonal and superdiagonal") {
  const Labels y = balanced_labels(50000, 10);
  const auto out = pairflip_noise(y, 10, 0.45, 10);
  NoisyDataset ds;
  ds.clean_labels = y;
  ds.noisy_labels = out.noisy;
  ds.flipped = out.flipped;
  ds.num_classes = 10;
  const NoiseReport r = noise_report(ds);
  for (int a = 0; a < 10; ++a)
    for (int b = 0; b < 10; ++b)
      if (b != a && b != (a + 1) % 10) CHECK(r.transition_at(a, b) == 0.0);
}

TEST_CASE("instance noise") {
  const auto set = gaussian_set(100000, 32, 10, 11);
  const auto out = instance_noise(set.features, set.labels, 10, 0.4, 12);
  CHECK(std::abs(disagreement(set.labels, out.noisy) - 0.4) < 0.03);
  for (double q : out.flip_rate) CHECK((q >= 0.0 && q <= 1.0));

  CHECK_THROWS_AS(instance_noise(Tensor::zeros({3, 0}), Labels{0, 1, 0}, 2, 0.2, 1), InputError);
}

TEST_CASE("instance flip distribution is a pure function of features, rate and projection") {
  const auto x = oracle::random_values(6, 13);
  const auto w = oracle::random_values(6 * 4, 14);
  const auto a = instance_flip_distribution(x, w, 0.3, 2, 4);
  const auto b = instance_flip_distribution(x, w, 0.3, 2, 4);
  CHECK(a == b);
  CHECK(a[2] == doctest::Approx(0.7));
  CHECK(std::accumulate(a.begin(), a.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));

  // Two identical rows in one dataset receive identical distributions; with
  // the same uniform draw they flip identically.
  const auto set = gaussian_set(2, 6, 4, 15);
  std::vector<double> dup(set.features.values().begin(), set.features.values().begin() + 6);
  dup.insert(dup.end(), dup.begin(), dup.end());
  const auto d0 = instance_flip_distribution(std::span<const double>(dup).subspan(0, 6), w, 0.25, 1, 4);
  const auto d1 = instance_flip_distribution(std::span<const double>(dup).subspan(6, 6), w, 0.25, 1, 4);
  CHECK(d0 == d1);
}

TEST_CASE("noise report of a clean dataset") {
  const Labels y = balanced_labels(300, 3);
  NoisyDataset ds;
  ds.clean_labels = y;
  ds.noisy_labels = y;
  ds.flipped.assign(y.size(), 0);
  ds.num_classes = 3;
  const NoiseReport r = noise_report(ds);
  CHECK(r.disagreement == 0.0);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) CHECK(r.transition_at(a, b) == (a == b ? 1.0 : 0.0));
}

TEST_CASE("noise generation is seed-deterministic") {
  const auto set = gaussian_set(5000, 8, 5, 16);
  for (NoiseKind kind : {NoiseKind::Symmetric, NoiseKind::Pairflip, NoiseKind::Instance}) {
    const NoisyDataset a = corrupt(set, {kind, 0.3, 17});
    const NoisyDataset b = corrupt(set, {kind, 0.3, 17});
    const NoisyDataset c = corrupt(set, {kind, 0.3, 18});
    CHECK(a.noisy_labels == b.noisy_labels);
    CHECK(a.flip_rate == b.flip_rate);
    CHECK(a.noisy_labels != c.noisy_labels);
  }
}

TEST_CASE("synthetic generators are deterministic and balanced") {
  TinyImageSpec spec;
  spec.seed = 3;
  const LabeledSet a = tiny_images(spec, 200, 0), b = tiny_images(spec, 200, 0), c = tiny_images(spec, 200, 1);
  CHECK(a.features.shape() == Shape{200, 1, 8, 8});
  CHECK(std::equal(a.features.values().begin(), a.features.values().end(), b.features.values().begin()));
  CHECK(a.labels == b.labels);
  CHECK_FALSE(std::equal(a.features.values().begin(), a.features.values().end(), c.features.values().begin()));
  std::vector<int> counts(10, 0);
  for (int y : a.labels) ++counts[static_cast<std::size_t>(y)];
  for (int n : counts) CHECK(n == 20);

  BlobSpec blobs;
  blobs.seed = 4;
  const LabeledSet g = gaussian_blobs(blobs, 100, 0);
  CHECK(g.features.shape() == Shape{100, 16});
  CHECK(g.labels == gaussian_blobs(blobs, 100, 0).labels);
}

TEST_CASE("dataset snapshots round-trip bit-exactly") {
  const auto set = gaussian_set(64, 4, 3, 19);
  const NoisyDataset ds = corrupt(set, {NoiseKind::Instance, 0.3, 20});
  const auto dir = scratch_dir("dataset");
  save_dataset(dir, ds);
  const NoisyDataset back = load_dataset(dir);
  CHECK(back.features.shape() == ds.features.shape());
  CHECK(std::equal(back.features.values().begin(), back.features.values().end(), ds.features.values().begin()));
  CHECK(back.clean_labels == ds.clean_labels);
  CHECK(back.noisy_labels == ds.noisy_labels);
  CHECK(back.flipped == ds.flipped);
  CHECK(back.flip_rate == ds.flip_rate);
  CHECK(back.noise_kind == ds.noise_kind);
  CHECK(back.epsilon == ds.epsilon);
  CHECK(back.noise_seed == ds.noise_seed);
  std::filesystem::remove_all(dir);
  CHECK_THROWS_AS(load_dataset(dir), IoError);
}
