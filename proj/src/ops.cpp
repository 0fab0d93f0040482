// Copyright 2026 The paddles-lab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "paddles/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "paddles/errors.hpp"

namespace paddles {

namespace {

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
}

void require_rank(const char* op, const Tensor& x, std::size_t rank) {
  if (x.rank() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " + shape_str(x.shape()));
  }
}

// Range of output positions o with 0 <= o*stride + offset - pad < extent.
std::pair<std::size_t, std::size_t> valid_range(std::size_t out_extent, std::size_t in_extent, std::size_t stride,
                                                std::size_t offset, std::size_t pad) {
  const long s = static_cast<long>(stride);
  const long shift = static_cast<long>(offset) - static_cast<long>(pad);
  long lo = 0;
  if (shift < 0) lo = (-shift + s - 1) / s;
  long hi = (static_cast<long>(in_extent) - 1 - shift);
  if (hi < 0) return {0, 0};
  hi = std::min(hi / s + 1, static_cast<long>(out_extent));
  if (lo >= hi) return {0, 0};
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape("add", a, b);
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.at(i) + b.at(i);
  return make_op_result("add", a.shape(), std::move(out), {a, b}, [](auto g, auto gin) {
    for (auto* buf : gin) {
      if (!buf) continue;
      for (std::size_t i = 0; i < g.size(); ++i) (*buf)[i] += g[i];
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape("sub", a, b);
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.at(i) - b.at(i);
  return make_op_result("sub", a.shape(), std::move(out), {a, b}, [](auto g, auto gin) {
    if (gin[0])
      for (std::size_t i = 0; i < g.size(); ++i) (*gin[0])[i] += g[i];
    if (gin[1])
      for (std::size_t i = 0; i < g.size(); ++i) (*gin[1])[i] -= g[i];
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape("mul", a, b);
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.at(i) * b.at(i);
  return make_op_result("mul", a.shape(), std::move(out), {a, b}, [a, b](auto g, auto gin) {
    if (gin[0])
      for (std::size_t i = 0; i < g.size(); ++i) (*gin[0])[i] += g[i] * b.at(i);
    if (gin[1])
      for (std::size_t i = 0; i < g.size(); ++i) (*gin[1])[i] += g[i] * a.at(i);
  });
}

Tensor scale(const Tensor& a, double factor) {
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.at(i) * factor;
  return make_op_result("scale", a.shape(), std::move(out), {a}, [factor](auto g, auto gin) {
    for (std::size_t i = 0; i < g.size(); ++i) (*gin[0])[i] += g[i] * factor;
  });
}

Tensor square(const Tensor& a) {
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.at(i) * a.at(i);
  return make_op_result("square", a.shape(), std::move(out), {a}, [a](auto g, auto gin) {
    for (std::size_t i = 0; i < g.size(); ++i) (*gin[0])[i] += 2.0 * a.at(i) * g[i];
  });
}

Tensor relu(const Tensor& x) {
  std::vector<double> out(x.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.at(i) > 0.0 ? x.at(i) : 0.0;
  return make_op_result("relu", x.shape(), std::move(out), {x}, [x](auto g, auto gin) {
    auto& dx = *gin[0];
    for (std::size_t i = 0; i < g.size(); ++i)
      if (x.at(i) > 0.0) dx[i] += g[i];
  });
}

Tensor sum(const Tensor& x) {
  double total = 0.0;
  for (double v : x.values()) total += v;
  return make_op_result("sum", {}, {total}, {x}, [](auto g, auto gin) {
    for (double& d : *gin[0]) d += g[0];
  });
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_numel(shape) != x.numel()) {
    throw DimensionError("reshape: cannot view " + shape_str(x.shape()) + " as " + shape_str(shape));
  }
  std::vector<double> out(x.values().begin(), x.values().end());
  return make_op_result("reshape", std::move(shape), std::move(out), {x}, [](auto g, auto gin) {
    for (std::size_t i = 0; i < g.size(); ++i) (*gin[0])[i] += g[i];
  });
}

Tensor flatten(const Tensor& x) {
  if (x.rank() < 1) throw DimensionError("flatten: rank-0 tensor");
  return reshape(x, {x.dim(0), x.numel() / std::max<std::size_t>(x.dim(0), 1)});
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw DimensionError("matmul: incompatible shapes " + shape_str(a.shape()) + " and " + shape_str(b.shape()));
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  auto av = a.values();
  auto bv = b.values();
  std::vector<double> out(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double* row = out.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = av[i * k + p];
      const double* brow = bv.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) row[j] += aip * brow[j];
    }
  }
  return make_op_result("matmul", {m, n}, std::move(out), {a, b}, [a, b, m, k, n](auto g, auto gin) {
    auto av = a.values();
    auto bv = b.values();
    if (gin[0]) {
      // dA = G * B^T
      auto& da = *gin[0];
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j) acc += g[i * n + j] * bv[p * n + j];
          da[i * k + p] += acc;
        }
    }
    if (gin[1]) {
      // dB = A^T * G
      auto& db = *gin[1];
      std::vector<double> acc(k * n, 0.0);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          const double aip = av[i * k + p];
          for (std::size_t j = 0; j < n; ++j) acc[p * n + j] += aip * g[i * n + j];
        }
      for (std::size_t q = 0; q < acc.size(); ++q) db[q] += acc[q];
    }
  });
}

Tensor add_row_bias(const Tensor& x, const Tensor& bias) {
  require_rank("add_row_bias", x, 2);
  if (bias.rank() != 1 || bias.dim(0) != x.dim(1)) {
    throw DimensionError("add_row_bias: bias " + shape_str(bias.shape()) + " does not match " + shape_str(x.shape()));
  }
  const std::size_t rows = x.dim(0), cols = x.dim(1);
  std::vector<double> out(x.numel());
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] = x.at(r * cols + c) + bias.at(c);
  return make_op_result("add_row_bias", x.shape(), std::move(out), {x, bias}, [rows, cols](auto g, auto gin) {
    if (gin[0])
      for (std::size_t i = 0; i < g.size(); ++i) (*gin[0])[i] += g[i];
    if (gin[1]) {
      std::vector<double> acc(cols, 0.0);
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) acc[c] += g[r * cols + c];
      for (std::size_t c = 0; c < cols; ++c) (*gin[1])[c] += acc[c];
    }
  });
}

Tensor add_channel_bias(const Tensor& x, const Tensor& bias) {
  require_rank("add_channel_bias", x, 4);
  if (bias.rank() != 1 || bias.dim(0) != x.dim(1)) {
    throw DimensionError("add_channel_bias: bias " + shape_str(bias.shape()) + " does not match " +
                         shape_str(x.shape()));
  }
  const std::size_t batch = x.dim(0), channels = x.dim(1), plane = x.dim(2) * x.dim(3);
  std::vector<double> out(x.numel());
  for (std::size_t n = 0; n < batch; ++n)
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t base = (n * channels + c) * plane;
      for (std::size_t i = 0; i < plane; ++i) out[base + i] = x.at(base + i) + bias.at(c);
    }
  return make_op_result("add_channel_bias", x.shape(), std::move(out), {x, bias},
                        [batch, channels, plane](auto g, auto gin) {
                          if (gin[0])
                            for (std::size_t i = 0; i < g.size(); ++i) (*gin[0])[i] += g[i];
                          if (gin[1]) {
                            for (std::size_t c = 0; c < channels; ++c) {
                              double acc = 0.0;
                              for (std::size_t n = 0; n < batch; ++n) {
                                const std::size_t base = (n * channels + c) * plane;
                                for (std::size_t i = 0; i < plane; ++i) acc += g[base + i];
                              }
                              (*gin[1])[c] += acc;
                            }
                          }
                        });
}

Tensor conv2d(const Tensor& x, const Tensor& w, std::size_t stride, std::size_t pad) {
  require_rank("conv2d input", x, 4);
  require_rank("conv2d kernel", w, 4);
  if (stride == 0) throw ConfigError("conv2d: stride must be positive");
  const std::size_t N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const std::size_t F = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  if (w.dim(1) != C) {
    throw DimensionError("conv2d: kernel " + shape_str(w.shape()) + " expects " + std::to_string(w.dim(1)) +
                         " channels, input " + shape_str(x.shape()) + " has " + std::to_string(C));
  }
  if (kh > H + 2 * pad || kw > W + 2 * pad) {
    throw ConfigError("conv2d: kernel " + shape_str(w.shape()) + " larger than padded input " + shape_str(x.shape()));
  }
  if ((H + 2 * pad - kh) % stride != 0 || (W + 2 * pad - kw) % stride != 0) {
    throw ConfigError("conv2d: non-integral output extent for input " + shape_str(x.shape()) + ", kernel " +
                      shape_str(w.shape()) + ", stride " + std::to_string(stride) + ", pad " + std::to_string(pad));
  }
  const std::size_t Ho = (H + 2 * pad - kh) / stride + 1;
  const std::size_t Wo = (W + 2 * pad - kw) / stride + 1;

  // Visits every (input, kernel, output) triple in a fixed order.
  auto for_each_tap = [=](auto&& fn) {
    for (std::size_t n = 0; n < N; ++n)
      for (std::size_t f = 0; f < F; ++f)
        for (std::size_t c = 0; c < C; ++c)
          for (std::size_t i = 0; i < kh; ++i) {
            const auto [oh_lo, oh_hi] = valid_range(Ho, H, stride, i, pad);
            for (std::size_t j = 0; j < kw; ++j) {
              const auto [ow_lo, ow_hi] = valid_range(Wo, W, stride, j, pad);
              const std::size_t w_idx = ((f * C + c) * kh + i) * kw + j;
              for (std::size_t oh = oh_lo; oh < oh_hi; ++oh) {
                const std::size_t ih = oh * stride + i - pad;
                const std::size_t x_row = ((n * C + c) * H + ih) * W;
                const std::size_t o_row = ((n * F + f) * Ho + oh) * Wo;
                fn(w_idx, x_row, o_row, ow_lo, ow_hi, j);
              }
            }
          }
  };

  auto xv = x.values();
  auto wv = w.values();
  std::vector<double> out(N * F * Ho * Wo, 0.0);
  for_each_tap([&](std::size_t w_idx, std::size_t x_row, std::size_t o_row, std::size_t lo, std::size_t hi,
                   std::size_t j) {
    const double k = wv[w_idx];
    for (std::size_t ow = lo; ow < hi; ++ow) out[o_row + ow] += k * xv[x_row + ow * stride + j - pad];
  });

  return make_op_result("conv2d", {N, F, Ho, Wo}, std::move(out), {x, w},
                        [x, w, for_each_tap, stride, pad](auto g, auto gin) {
                          auto xv = x.values();
                          auto wv = w.values();
                          if (gin[0]) {
                            auto& dx = *gin[0];
                            for_each_tap([&](std::size_t w_idx, std::size_t x_row, std::size_t o_row,
                                             std::size_t lo, std::size_t hi, std::size_t j) {
                              const double k = wv[w_idx];
                              for (std::size_t ow = lo; ow < hi; ++ow)
                                dx[x_row + ow * stride + j - pad] += k * g[o_row + ow];
                            });
                          }
                          if (gin[1]) {
                            std::vector<double> acc(w.numel(), 0.0);
                            for_each_tap([&](std::size_t w_idx, std::size_t x_row, std::size_t o_row,
                                             std::size_t lo, std::size_t hi, std::size_t j) {
                              double s = 0.0;
                              for (std::size_t ow = lo; ow < hi; ++ow)
                                s += g[o_row + ow] * xv[x_row + ow * stride + j - pad];
                              acc[w_idx] += s;
                            });
                            auto& dw = *gin[1];
                            for (std::size_t q = 0; q < acc.size(); ++q) dw[q] += acc[q];
                          }
                        });
}

Tensor avg_pool2d(const Tensor& x, std::size_t window) {
  if (x.rank() < 2) throw DimensionError("avg_pool2d: need at least 2 axes, got " + shape_str(x.shape()));
  if (window == 0) throw ConfigError("avg_pool2d: window must be positive");
  const std::size_t H = x.dim(x.rank() - 2), W = x.dim(x.rank() - 1);
  const std::size_t Ho = H / window, Wo = W / window;
  if (Ho == 0 || Wo == 0) {
    throw ConfigError("avg_pool2d: window " + std::to_string(window) + " collapses " + shape_str(x.shape()));
  }
  const std::size_t planes = x.numel() / (H * W);
  const double inv = 1.0 / static_cast<double>(window * window);
  Shape out_shape = x.shape();
  out_shape[out_shape.size() - 2] = Ho;
  out_shape[out_shape.size() - 1] = Wo;

  std::vector<double> out(planes * Ho * Wo);
  auto xv = x.values();
  for (std::size_t p = 0; p < planes; ++p)
    for (std::size_t oh = 0; oh < Ho; ++oh)
      for (std::size_t ow = 0; ow < Wo; ++ow) {
        double acc = 0.0;
        for (std::size_t a = 0; a < window; ++a)
          for (std::size_t b = 0; b < window; ++b) acc += xv[(p * H + oh * window + a) * W + ow * window + b];
        out[(p * Ho + oh) * Wo + ow] = acc * inv;
      }
  return make_op_result("avg_pool2d", std::move(out_shape), std::move(out), {x},
                        [planes, H, W, Ho, Wo, window, inv](auto g, auto gin) {
                          auto& dx = *gin[0];
                          for (std::size_t p = 0; p < planes; ++p)
                            for (std::size_t oh = 0; oh < Ho; ++oh)
                              for (std::size_t ow = 0; ow < Wo; ++ow) {
                                const double d = g[(p * Ho + oh) * Wo + ow] * inv;
                                for (std::size_t a = 0; a < window; ++a)
                                  for (std::size_t b = 0; b < window; ++b)
                                    dx[(p * H + oh * window + a) * W + ow * window + b] += d;
                              }
                        });
}

Tensor cross_entropy(const Tensor& logits, std::span<const int> labels,
                     std::optional<std::span<const double>> class_weights) {
  require_rank("cross_entropy", logits, 2);
  const std::size_t N = logits.dim(0), K = logits.dim(1);
  if (labels.size() != N) {
    throw DimensionError("cross_entropy: " + std::to_string(labels.size()) + " labels for logits " +
                         shape_str(logits.shape()));
  }
  if (N == 0) throw InputError("cross_entropy: empty batch");
  for (std::size_t i = 0; i < N; ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= K) {
      throw InputError("cross_entropy: label " + std::to_string(labels[i]) + " at index " + std::to_string(i) +
                       " outside [0, " + std::to_string(K) + ")");
    }
  }
  std::vector<double> weights(K, 1.0);
  if (class_weights) {
    if (class_weights->size() != K) {
      throw DimensionError("cross_entropy: " + std::to_string(class_weights->size()) + " class weights for " +
                           std::to_string(K) + " classes");
    }
    for (std::size_t c = 0; c < K; ++c) {
      const double wc = (*class_weights)[c];
      if (!std::isfinite(wc) || wc < 0.0) {
        throw InputError("cross_entropy: class weight " + std::to_string(c) + " must be finite and non-negative");
      }
      weights[c] = wc;
    }
  }

  auto z = logits.values();
  std::vector<double> probs(N * K);
  double total = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double* row = z.data() + i * K;
    const double m = *std::max_element(row, row + K);
    double s = 0.0;
    for (std::size_t c = 0; c < K; ++c) {
      probs[i * K + c] = std::exp(row[c] - m);
      s += probs[i * K + c];
    }
    for (std::size_t c = 0; c < K; ++c) probs[i * K + c] /= s;
    const auto y = static_cast<std::size_t>(labels[i]);
    total += weights[y] * -(row[y] - m - std::log(s));
  }
  const double inv_n = 1.0 / static_cast<double>(N);
  std::vector<int> saved_labels(labels.begin(), labels.end());
  return make_op_result("cross_entropy", {}, {total * inv_n}, {logits},
                        [probs = std::move(probs), saved_labels = std::move(saved_labels), weights, N, K,
                         inv_n](auto g, auto gin) {
                          auto& dz = *gin[0];
                          for (std::size_t i = 0; i < N; ++i) {
                            const auto y = static_cast<std::size_t>(saved_labels[i]);
                            const double row_scale = g[0] * weights[y] * inv_n;
                            for (std::size_t c = 0; c < K; ++c) {
                              const double target = c == y ? 1.0 : 0.0;
                              dz[i * K + c] += (probs[i * K + c] - target) * row_scale;
                            }
                          }
                        });
}

std::vector<double> softmax_rows(const Tensor& logits) {
  require_rank("softmax_rows", logits, 2);
  const std::size_t N = logits.dim(0), K = logits.dim(1);
  auto z = logits.values();
  std::vector<double> probs(N * K);
  for (std::size_t i = 0; i < N; ++i) {
    const double* row = z.data() + i * K;
    const double m = *std::max_element(row, row + K);
    double s = 0.0;
    for (std::size_t c = 0; c < K; ++c) {
      probs[i * K + c] = std::exp(row[c] - m);
      s += probs[i * K + c];
    }
    for (std::size_t c = 0; c < K; ++c) probs[i * K + c] /= s;
  }
  return probs;
}

Tensor gather_rows(const Tensor& x, std::span<const std::size_t> rows) {
  if (x.rank() < 1) throw DimensionError("gather_rows: rank-0 tensor");
  const std::size_t stride = x.numel() / std::max<std::size_t>(x.dim(0), 1);
  Shape shape = x.shape();
  shape[0] = rows.size();
  std::vector<double> out(rows.size() * stride);
  auto xv = x.values();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= x.dim(0)) throw InputError("gather_rows: row " + std::to_string(rows[r]) + " out of range");
    std::copy_n(xv.begin() + static_cast<std::ptrdiff_t>(rows[r] * stride), stride,
                out.begin() + static_cast<std::ptrdiff_t>(r * stride));
  }
  return Tensor::from(std::move(shape), std::move(out));
}

}  // namespace paddles
