// Copyright 2026 The paddles-lab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <span>

#include "paddles/tensor.hpp"

namespace paddles::fft {

using Complex = std::complex<double>;

/// Unnormalized discrete Fourier transform of one contiguous line,
///   X[u] = sum_p x[p] * exp(sign * 2*pi*i * p*u / n),
/// with sign = -1 for the forward and +1 for the inverse direction.
/// Mixed-radix Cooley-Tukey: the length is split by its smallest prime
/// factor, prime lengths fall back to direct summation.
void transform(std::span<Complex> line, bool inverse);

/// Applies transform() to every line of `data` (row-major, `shape`) along
/// `axis`, then multiplies by `scale`.
void transform_axis(std::span<Complex> data, const Shape& shape, std::size_t axis, bool inverse, double scale = 1.0);

}  // namespace paddles::fft
