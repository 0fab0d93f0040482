// Copyright 2026 The paddles-lab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "paddles/dataset.hpp"

namespace paddles {

/// K isotropic Gaussian clusters in `dim` dimensions. Cluster centres are
/// drawn from N(0, separation^2 I) using `seed`; samples add N(0, spread^2 I).
struct BlobSpec {
  std::size_t dim = 16;
  int num_classes = 10;
  double separation = 1.0;
  double spread = 1.0;
  std::uint64_t seed = 0;
};

/// Tiny images of shape [channels x height x width]. Class c is a plane
/// wave cos(2*pi*(u_c*h/H + v_c*w/W) + phi_c) with a class-specific
/// frequency (u_c, v_c) and phase phi_c; each sample jitters the amplitude
/// and phase and adds per-pixel Gaussian noise.
struct TinyImageSpec {
  std::size_t height = 8;
  std::size_t width = 8;
  std::size_t channels = 1;
  int num_classes = 10;
  double pixel_noise = 0.8;
  double phase_jitter = 0.5;  // radians, uniform in [-j, j]
  std::uint64_t seed = 0;
};

/// `n` samples with balanced, shuffled labels. Class structure depends only
/// on spec.seed, so different `stream` values give train/test splits of the
/// same problem.
LabeledSet gaussian_blobs(const BlobSpec& spec, std::size_t n, std::uint64_t stream);
LabeledSet tiny_images(const TinyImageSpec& spec, std::size_t n, std::uint64_t stream);

}  // namespace paddles
