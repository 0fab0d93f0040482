// Copyright 2026 The paddles-lab Authors.
// SPDX-License-Identifier: Apache-2.0

// Independent reference implementations used by the tests.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "paddles/model.hpp"
#include "paddles/ops.hpp"
#include "paddles/tensor.hpp"

namespace oracle {

using paddles::Shape;
using paddles::Tensor;
using cplx = std::complex<double>;

inline std::vector<double> random_values(std::size_t n, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = dist(gen);
  return v;
}

inline Tensor random_tensor(Shape shape, std::uint64_t seed, bool requires_grad = false) {
  const std::size_t n = paddles::shape_numel(shape);
  return Tensor::from(std::move(shape), random_values(n, seed), requires_grad);
}

/// Central differences of f at x.
inline std::vector<double> fd_gradient(std::vector<double> x, const std::function<double(std::span<const double>)>& f,
                                       double h = 1e-5) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = f(x);
    x[i] = keep - h;
    const double down = f(x);
    x[i] = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

/// Max of |a - n| / max(|a|, |n|) over coordinates where |a| or |n| >= floor.
inline double max_rel_error(std::span<const double> analytic, std::span<const double> numeric, double floor = 1e-8) {
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double scale = std::max(std::abs(analytic[i]), std::abs(numeric[i]));
    if (scale < floor) continue;
    worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / scale);
  }
  return worst;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

/// O(M^2) DFT over the trailing `k` axes (k = 1 or 2) of a complex array.
inline std::vector<cplx> direct_dft(std::span<const cplx> x, const Shape& shape, std::size_t k, bool inverse) {
  const std::size_t m = shape[shape.size() - k];
  const std::size_t n = k == 2 ? shape.back() : 1;
  const std::size_t block = m * n;
  const double sign = inverse ? 1.0 : -1.0;
  const double norm = inverse ? 1.0 / static_cast<double>(block) : 1.0;
  std::vector<cplx> out(x.size());
  for (std::size_t b = 0; b < x.size() / block; ++b) {
    const cplx* in = x.data() + b * block;
    for (std::size_t u = 0; u < m; ++u) {
      for (std::size_t v = 0; v < n; ++v) {
        cplx acc = 0.0;
        for (std::size_t p = 0; p < m; ++p) {
          for (std::size_t q = 0; q < n; ++q) {
            const double angle = sign * 2.0 * std::numbers::pi *
                                 (static_cast<double>(u * p % m) / static_cast<double>(m) +
                                  static_cast<double>(v * q % n) / static_cast<double>(n));
            acc += in[p * n + q] * cplx(std::cos(angle), std::sin(angle));
          }
        }
        out[b * block + u * n + v] = acc * norm;
      }
    }
  }
  return out;
}

inline std::vector<cplx> to_complex(std::span<const double> re) { return {re.begin(), re.end()}; }

enum class Held { Amplitude, Phase, Nothing };

/// Real output of the gate with one spectral component taken from `held`
/// instead of `live`: idft(recombine(A, P)) where the held component comes
/// from the spectrum of `held`.
inline std::vector<double> held_gate(std::span<const double> live, std::span<const double> held, const Shape& shape,
                                     std::size_t k, Held which) {
  const auto fl = direct_dft(to_complex(live), shape, k, false);
  const auto fh = direct_dft(to_complex(held), shape, k, false);
  std::vector<cplx> mixed(fl.size());
  for (std::size_t i = 0; i < fl.size(); ++i) {
    const double amp = which == Held::Amplitude ? std::abs(fh[i]) : std::abs(fl[i]);
    const double ph = which == Held::Phase ? std::arg(fh[i]) : std::arg(fl[i]);
    mixed[i] = std::polar(amp, ph);
  }
  const auto back = direct_dft(mixed, shape, k, true);
  std::vector<double> out(back.size());
  for (std::size_t i = 0; i < back.size(); ++i) out[i] = back[i].real();
  return out;
}

inline std::size_t gate_rank(const Shape& shape) { return shape.size() >= 3 ? 2 : 1; }

/// Loss of `model` on (x, labels) with the gate at the model's gate index
/// replaced by held_gate(live, held), where `held` is the feature at the
/// gate for the current parameters. Computed without the autograd graph.
inline double held_model_loss(const paddles::SegmentedModel& model, const Tensor& x, std::span<const int> labels,
                              Held which, std::span<const double> held) {
  paddles::NoGradGuard no_grad;
  Tensor h = x;
  for (std::size_t l = 0; l < model.num_stages(); ++l) {
    h = model.stage_forward(l, h);
    if (l == model.gate_index()) {
      const Shape shape = h.shape();
      h = Tensor::from(shape, held_gate(h.values(), held, shape, gate_rank(shape), which));
    }
  }
  return paddles::cross_entropy(h, labels).item();
}

/// Feature entering the gate for the current parameters.
inline std::vector<double> gate_input(const paddles::SegmentedModel& model, const Tensor& x) {
  paddles::NoGradGuard no_grad;
  Tensor h = x;
  for (std::size_t l = 0; l <= model.gate_index(); ++l) h = model.stage_forward(l, h);
  return {h.values().begin(), h.values().end()};
}

/// Finite differences of held_model_loss with respect to every parameter
/// of `model`, in parameters() order; the held component stays at its
/// value for the unperturbed parameters.
inline std::vector<std::vector<double>> held_parameter_gradients(const paddles::SegmentedModel& model, const Tensor& x,
                                                                 std::span<const int> labels, Held which,
                                                                 double h = 1e-5) {
  const std::vector<double> held = gate_input(model, x);
  std::vector<std::vector<double>> out;
  for (Tensor p : model.parameters()) {
    auto values = p.mutable_values();
    std::vector<double> g(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double keep = values[i];
      values[i] = keep + h;
      const double up = held_model_loss(model, x, labels, which, held);
      values[i] = keep - h;
      const double down = held_model_loss(model, x, labels, which, held);
      values[i] = keep;
      g[i] = (up - down) / (2.0 * h);
    }
    out.push_back(std::move(g));
  }
  return out;
}

/// Direct nested-loop convolution, [N x C x H x W] * [F x C x kh x kw].
inline std::vector<double> naive_conv(std::span<const double> x, const Shape& xs, std::span<const double> w,
                                      const Shape& ws, std::size_t stride, std::size_t pad, Shape* out_shape) {
  const std::size_t n = xs[0], c = xs[1], h = xs[2], wd = xs[3];
  const std::size_t f = ws[0], kh = ws[2], kw = ws[3];
  const std::size_t oh = (h + 2 * pad - kh) / stride + 1, ow = (wd + 2 * pad - kw) / stride + 1;
  *out_shape = {n, f, oh, ow};
  std::vector<double> out(n * f * oh * ow, 0.0);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < f; ++b)
      for (std::size_t y = 0; y < oh; ++y)
        for (std::size_t z = 0; z < ow; ++z) {
          double acc = 0.0;
          for (std::size_t ch = 0; ch < c; ++ch)
            for (std::size_t i = 0; i < kh; ++i)
              for (std::size_t j = 0; j < kw; ++j) {
                const long r = static_cast<long>(y * stride + i) - static_cast<long>(pad);
                const long s = static_cast<long>(z * stride + j) - static_cast<long>(pad);
                if (r < 0 || s < 0 || r >= static_cast<long>(h) || s >= static_cast<long>(wd)) continue;
                acc += x[((a * c + ch) * h + static_cast<std::size_t>(r)) * wd + static_cast<std::size_t>(s)] *
                       w[((b * c + ch) * kh + i) * kw + j];
              }
          out[((a * f + b) * oh + y) * ow + z] = acc;
        }
  return out;
}

}  // namespace oracle
