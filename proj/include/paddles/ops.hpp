// Copyright 2026 The paddles-lab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>
#include <vector>

#include "paddles/tensor.hpp"

namespace paddles {

// Elementwise (shapes must match exactly).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor square(const Tensor& a);
Tensor relu(const Tensor& x);

/// Sum of all elements, rank-0 result.
Tensor sum(const Tensor& x);

Tensor reshape(const Tensor& x, Shape shape);
/// [N x ...] -> [N x prod(...)]
Tensor flatten(const Tensor& x);

/// [m x k] * [k x n] -> [m x n]
Tensor matmul(const Tensor& a, const Tensor& b);
/// [N x D] + [D] broadcast over rows.
Tensor add_row_bias(const Tensor& x, const Tensor& bias);
/// [N x C x H x W] + [C] broadcast over batch and space.
Tensor add_channel_bias(const Tensor& x, const Tensor& bias);

/// Cross-correlation of [N x C x H x W] with [F x C x kh x kw].
Tensor conv2d(const Tensor& x, const Tensor& w, std::size_t stride = 1, std::size_t pad = 0);

/// Non-overlapping window average over the two trailing axes. Extents are
/// floored, so trailing rows/columns that do not fill a window are dropped.
Tensor avg_pool2d(const Tensor& x, std::size_t window = 2);

/// Mean over the batch of w[y_i] * -log softmax(logits_i)[y_i].
/// `class_weights`, when given, has one non-negative entry per class.
Tensor cross_entropy(const Tensor& logits, std::span<const int> labels,
                     std::optional<std::span<const double>> class_weights = std::nullopt);

/// Row-wise softmax of [N x K] values, no graph.
std::vector<double> softmax_rows(const Tensor& logits);

/// Rows of x (first axis) picked by `rows`, as a fresh leaf.
Tensor gather_rows(const Tensor& x, std::span<const std::size_t> rows);

}  // namespace paddles
