// Copyright 2026 The paddles-lab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "paddles/fft.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <vector>

#include "paddles/errors.hpp"

namespace paddles::fft {

namespace {

struct Plan {
  std::size_t n = 0;
  std::vector<std::size_t> factors;  // prime factors, ascending
  std::vector<Complex> twiddle;      // exp(-2*pi*i*k/n), k < n
};

const Plan& plan_for(std::size_t n) {
  thread_local std::map<std::size_t, Plan> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  Plan plan;
  plan.n = n;
  for (std::size_t rest = n, p = 2; rest > 1;) {
    if (p * p > rest) {
      plan.factors.push_back(rest);
      break;
    }
    if (rest % p == 0) {
      plan.factors.push_back(p);
      rest /= p;
    } else {
      ++p;
    }
  }
  plan.twiddle.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    plan.twiddle[k] = Complex(std::cos(angle), std::sin(angle));
  }
  return cache.emplace(n, std::move(plan)).first->second;
}

// Decimation in time. Reads x[0], x[stride], ... (len values), writes the
// transform contiguously to y. `level` indexes plan.factors.
void recurse(const Complex* x, std::size_t stride, Complex* y, std::size_t len, std::size_t level, const Plan& plan,
             bool inverse, std::vector<Complex>& scratch) {
  if (len == 1) {
    y[0] = x[0];
    return;
  }
  const std::size_t radix = plan.factors[level];
  const std::size_t sub = len / radix;
  for (std::size_t s = 0; s < radix; ++s) {
    recurse(x + s * stride, stride * radix, y + s * sub, sub, level + 1, plan, inverse, scratch);
  }
  // Twiddle for exponent e at this length: W_len^e = W_n^(e * n/len).
  const std::size_t tw_step = plan.n / len;
  auto twiddle = [&](std::size_t e) {
    const Complex w = plan.twiddle[(e % len) * tw_step];
    return inverse ? std::conj(w) : w;
  };
  const std::size_t base = scratch.size();
  scratch.resize(base + radix);
  for (std::size_t k = 0; k < sub; ++k) {
    for (std::size_t q = 0; q < radix; ++q) {
      const std::size_t u = k + q * sub;
      Complex acc = y[k];
      for (std::size_t s = 1; s < radix; ++s) acc += twiddle(s * u) * y[s * sub + k];
      scratch[base + q] = acc;
    }
    for (std::size_t q = 0; q < radix; ++q) y[k + q * sub] = scratch[base + q];
  }
  scratch.resize(base);
}

}  // namespace

void transform(std::span<Complex> line, bool inverse) {
  const std::size_t n = line.size();
  if (n <= 1) return;
  const Plan& plan = plan_for(n);
  std::vector<Complex> input(line.begin(), line.end());
  std::vector<Complex> scratch;
  scratch.reserve(n);
  recurse(input.data(), 1, line.data(), n, 0, plan, inverse, scratch);
}

void transform_axis(std::span<Complex> data, const Shape& shape, std::size_t axis, bool inverse, double scale) {
  if (axis >= shape.size()) throw UsageError("transform_axis: axis out of range for " + shape_str(shape));
  if (data.size() != shape_numel(shape)) throw DimensionError("transform_axis: data does not match " + shape_str(shape));
  const std::size_t len = shape[axis];
  std::size_t inner = 1;
  for (std::size_t a = axis + 1; a < shape.size(); ++a) inner *= shape[a];
  const std::size_t outer = len == 0 ? 0 : data.size() / (len * inner);

  std::vector<Complex> line(len);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t i = 0; i < inner; ++i) {
      Complex* base = data.data() + o * len * inner + i;
      for (std::size_t p = 0; p < len; ++p) line[p] = base[p * inner];
      transform(line, inverse);
      for (std::size_t p = 0; p < len; ++p) base[p * inner] = line[p] * scale;
    }
  }
}

}  // namespace paddles::fft
