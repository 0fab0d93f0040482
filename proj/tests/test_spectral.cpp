// Copyright 2026 The paddles-lab Authors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "paddles/errors.hpp"
#include "paddles/fft.hpp"
#include "paddles/ops.hpp"
#include "paddles/spectral.hpp"

using namespace paddles;

namespace {

std::vector<double> vec(std::span<const double> s) { return {s.begin(), s.end()}; }

std::vector<double> reals(const std::vector<oracle::cplx>& v) {
  std::vector<double> out;
  for (const auto& c : v) out.push_back(c.real());
  return out;
}

std::vector<double> imags(const std::vector<oracle::cplx>& v) {
  std::vector<double> out;
  for (const auto& c : v) out.push_back(c.imag());
  return out;
}

std::vector<std::size_t> trailing(const Shape& s, std::size_t k) {
  std::vector<std::size_t> axes;
  for (std::size_t a = s.size() - k; a < s.size(); ++a) axes.push_back(a);
  return axes;
}

const GateMode kModes[] = {GateMode::PassBoth, GateMode::DetachAmplitude, GateMode::DetachPhase, GateMode::DetachBoth};

}  // namespace

TEST_CASE("dft of constant and delta signals") {
  const auto c = dft(Tensor::from({4}, {1, 1, 1, 1}), {0});
  CHECK(oracle::max_abs_diff(c.real.values(), std::vector<double>{4, 0, 0, 0}) < 1e-15);
  CHECK(oracle::max_abs_diff(c.imag.values(), std::vector<double>{0, 0, 0, 0}) < 1e-15);
  const auto d = dft(Tensor::from({4}, {1, 0, 0, 0}), {0});
  CHECK(oracle::max_abs_diff(d.real.values(), std::vector<double>{1, 1, 1, 1}) < 1e-15);
  CHECK(oracle::max_abs_diff(d.imag.values(), std::vector<double>{0, 0, 0, 0}) < 1e-15);
}

TEST_CASE("dft requires trailing axes") {
  CHECK_THROWS_AS(dft(Tensor::zeros({4}), {}), UsageError);
}

TEST_CASE("dft matches direct summation with Parseval") {
  for (std::size_t m : {1u, 2u, 3u, 5u, 7u, 12u, 16u, 30u}) {
    CAPTURE(m);
    const Tensor x = oracle::random_tensor({m}, 100 + m);
    const auto ref = oracle::direct_dft(oracle::to_complex(x.values()), {m}, 1, false);
    const auto s = dft(x, {0});
    CHECK(oracle::max_abs_diff(s.real.values(), reals(ref)) < 1e-9);
    CHECK(oracle::max_abs_diff(s.imag.values(), imags(ref)) < 1e-9);
    double energy = 0.0, spectral = 0.0;
    for (double v : x.values()) energy += v * v;
    for (const auto& f : ref) spectral += std::norm(f);
    CHECK(std::abs(energy - spectral / static_cast<double>(m)) <= 1e-9 * energy);
  }
}

TEST_CASE("fft line transform agrees with direct summation for mixed radices") {
  for (std::size_t m : {6u, 9u, 10u, 11u, 24u, 49u, 64u}) {
    CAPTURE(m);
    const auto re = oracle::random_values(m, 200 + m);
    const auto im = oracle::random_values(m, 300 + m);
    std::vector<fft::Complex> line(m);
    for (std::size_t i = 0; i < m; ++i) line[i] = {re[i], im[i]};
    const auto ref = oracle::direct_dft(line, {m}, 1, false);
    fft::transform(line, false);
    for (std::size_t i = 0; i < m; ++i) CHECK(std::abs(line[i] - ref[i]) < 1e-9);
  }
}

TEST_CASE("2-D dft over the spatial axes") {
  const Shape s{2, 3, 4, 6};
  const Tensor x = oracle::random_tensor(s, 7);
  const auto ref = oracle::direct_dft(oracle::to_complex(x.values()), s, 2, false);
  const auto spec = dft(x, {2, 3});
  CHECK(oracle::max_abs_diff(spec.real.values(), reals(ref)) < 1e-9);
  CHECK(oracle::max_abs_diff(spec.imag.values(), imags(ref)) < 1e-9);
}

TEST_CASE("dft is linear") {
  const Shape s{3, 8};
  const Tensor a = oracle::random_tensor(s, 1), b = oracle::random_tensor(s, 2);
  const double p = 1.7, q = -0.3;
  const auto fa = dft(a, {1}), fb = dft(b, {1});
  const auto fc = dft(add(scale(a, p), scale(b, q)), {1});
  for (std::size_t i = 0; i < a.numel(); ++i) {
    const double re = p * fa.real.at(i) + q * fb.real.at(i);
    const double im = p * fa.imag.at(i) + q * fb.imag.at(i);
    const double mag = std::max(1.0, std::hypot(re, im));
    CHECK(std::abs(fc.real.at(i) - re) <= 1e-9 * mag);
    CHECK(std::abs(fc.imag.at(i) - im) <= 1e-9 * mag);
  }
}

TEST_CASE("dft of a real input is conjugate symmetric") {
  const Shape s{5, 6};
  const Tensor x = oracle::random_tensor(s, 9);
  const auto f = dft(x, {0, 1});
  for (std::size_t u = 0; u < 5; ++u)
    for (std::size_t v = 0; v < 6; ++v) {
      const std::size_t i = u * 6 + v, j = ((5 - u) % 5) * 6 + (6 - v) % 6;
      CHECK(std::abs(f.real.at(i) - f.real.at(j)) < 1e-9);
      CHECK(std::abs(f.imag.at(i) + f.imag.at(j)) < 1e-9);
    }
}

TEST_CASE("idft") {
  ComplexSpectrum s{Tensor::from({4}, {4, 0, 0, 0}), Tensor::zeros({4}), {0}};
  CHECK(oracle::max_abs_diff(idft(s).values(), std::vector<double>{1, 1, 1, 1}) < 1e-15);

  // A random spectrum is not conjugate symmetric, so compare the complex inverse.
  const Shape shape{3, 10};
  const auto re = oracle::random_values(30, 11), im = oracle::random_values(30, 12);
  std::vector<oracle::cplx> z(30);
  for (std::size_t i = 0; i < 30; ++i) z[i] = {re[i], im[i]};
  const auto ref = oracle::direct_dft(z, shape, 1, true);
  const auto inv = idft_complex({Tensor::from(shape, re), Tensor::from(shape, im), {1}});
  CHECK(oracle::max_abs_diff(inv.real.values(), reals(ref)) < 1e-9);
  CHECK(oracle::max_abs_diff(inv.imag.values(), imags(ref)) < 1e-9);
  CHECK_THROWS_AS(idft({Tensor::from(shape, re), Tensor::from(shape, im), {1}}), NumericalError);

  // Real-valued inverse of a genuine real signal's spectrum.
  const Tensor x = oracle::random_tensor(shape, 13);
  CHECK(oracle::max_abs_diff(idft(dft(x, {1})).values(), x.values()) < 1e-12);
}

TEST_CASE("disentangle") {
  ComplexSpectrum s{Tensor::from({2}, {3, -2}), Tensor::from({2}, {4, 0}), {0}};
  const auto p = disentangle(s);
  CHECK(p.amplitude.at(0) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(p.phase.at(0) == doctest::Approx(std::atan2(4.0, 3.0)).epsilon(1e-15));
  CHECK(p.amplitude.at(1) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(p.phase.at(1) == doctest::Approx(std::numbers::pi).epsilon(1e-15));

  ComplexSpectrum neg{Tensor::from({1}, {-2}), Tensor::from({1}, {-0.0}), {0}};
  CHECK(disentangle(neg).phase.at(0) == doctest::Approx(std::numbers::pi).epsilon(1e-15));
}

TEST_CASE("disentangle gradients match finite differences") {
  const Shape s{12};
  auto re = oracle::random_values(12, 20), im = oracle::random_values(12, 21);
  for (std::size_t i = 0; i < 12; ++i)
    if (std::hypot(re[i], im[i]) < 1e-3) re[i] = 0.5;
  for (bool amplitude : {true, false}) {
    CAPTURE(amplitude);
    const Tensor r = Tensor::from(s, re, true), q = Tensor::from(s, im, true);
    const auto p = disentangle({r, q, {0}});
    backward(sum(amplitude ? p.amplitude : p.phase));
    auto f = [&](std::span<const double> rr, std::span<const double> qq) {
      double acc = 0.0;
      for (std::size_t i = 0; i < rr.size(); ++i) acc += amplitude ? std::hypot(rr[i], qq[i]) : std::atan2(qq[i], rr[i]);
      return acc;
    };
    const auto fr = oracle::fd_gradient(re, [&](std::span<const double> v) { return f(v, im); });
    const auto fq = oracle::fd_gradient(im, [&](std::span<const double> v) { return f(re, v); });
    CHECK(oracle::max_rel_error(r.grad(), fr) < 1e-4);
    CHECK(oracle::max_rel_error(q.grad(), fq) < 1e-4);
  }
}

TEST_CASE("disentangle guards zero-magnitude bins") {
  const Tensor r = Tensor::from({2}, {0.0, 1.0}, true), q = Tensor::from({2}, {0.0, 1.0}, true);
  const auto p = disentangle({r, q, {0}});
  CHECK(p.phase.at(0) == 0.0);
  backward(add(sum(p.amplitude), sum(p.phase)));
  CHECK(r.grad()[0] == 0.0);
  CHECK(q.grad()[0] == 0.0);
  CHECK(std::isfinite(r.grad()[1]));
}

TEST_CASE("recombine") {
  const auto s = recombine({Tensor::from({2}, {5, 0}), Tensor::from({2}, {std::atan2(4.0, 3.0), 1.3}), {0}});
  CHECK(std::abs(s.real.at(0) - 3.0) < 1e-12);
  CHECK(std::abs(s.imag.at(0) - 4.0) < 1e-12);
  CHECK(s.real.at(1) == 0.0);
  CHECK(s.imag.at(1) == 0.0);
  CHECK_THROWS_AS(recombine({Tensor::zeros({2}), Tensor::zeros({3}), {0}}), DimensionError);

  const Shape shape{4, 9};
  auto re = oracle::random_values(36, 30), im = oracle::random_values(36, 31);
  for (std::size_t i = 0; i < 36; ++i)
    if (std::hypot(re[i], im[i]) < 1e-6) re[i] = 0.1;
  const ComplexSpectrum z{Tensor::from(shape, re), Tensor::from(shape, im), {1}};
  const auto back = recombine(disentangle(z));
  CHECK(oracle::max_abs_diff(back.real.values(), re) < 1e-9);
  CHECK(oracle::max_abs_diff(back.imag.values(), im) < 1e-9);
}

TEST_CASE("gated forward is the identity for every mode") {
  const Shape shapes[] = {{8}, {16}, {1, 1, 8, 8}, {4, 8, 16, 16}, {3, 10}, {2, 3, 5, 7}};
  std::uint64_t seed = 500;
  for (const Shape& s : shapes) {
    for (GateMode m : kModes) {
      CAPTURE(shape_str(s));
      CAPTURE(to_string(m));
      const Tensor x = oracle::random_tensor(s, ++seed);
      CHECK(oracle::max_abs_diff(gated_forward(x, m).values(), x.values()) < 1e-9);
    }
  }
}

TEST_CASE("detaching both spectra severs the graph") {
  const Tensor x = oracle::random_tensor({2, 8}, 40, true);
  backward(add(sum(square(gated_forward(x, GateMode::DetachBoth))), scale(sum(x), 0.0)));
  for (double g : x.grad()) CHECK(g == 0.0);
  // Without another path to x the loss is constant and x gets no gradient.
  const Tensor y = oracle::random_tensor({2, 8}, 41, true);
  backward(sum(square(gated_forward(y, GateMode::DetachBoth))));
  CHECK_FALSE(y.has_grad());
}

TEST_CASE("gate gradients match the held-component oracle") {
  const Shape shapes[] = {{1, 2, 8, 8}, {3, 12}};
  for (const Shape& s : shapes) {
    const std::size_t k = oracle::gate_rank(s);
    const auto v = oracle::random_values(shape_numel(s), 41 + s.size());
    const auto r = oracle::random_values(shape_numel(s), 43 + s.size());
    for (auto [mode, held] : {std::pair{GateMode::DetachAmplitude, oracle::Held::Amplitude},
                              std::pair{GateMode::DetachPhase, oracle::Held::Phase},
                              std::pair{GateMode::PassBoth, oracle::Held::Nothing}}) {
      CAPTURE(shape_str(s));
      CAPTURE(to_string(mode));
      const Tensor x = Tensor::from(s, v, true);
      const Tensor y = gated_forward(x, mode);
      backward(sum(mul(square(y), Tensor::from(s, r))));
      const auto f = oracle::fd_gradient(v, [&](std::span<const double> live) {
        const auto out = oracle::held_gate(live, v, s, k, held);
        double acc = 0.0;
        for (std::size_t i = 0; i < out.size(); ++i) acc += out[i] * out[i] * r[i];
        return acc;
      });
      CHECK(oracle::max_rel_error(x.grad(), f, 1e-8) < 1e-4);
    }
  }
}

TEST_CASE("amplitude and phase branches partition the gradient") {
  const Shape shapes[] = {{16}, {2, 12}, {2, 3, 8, 8}};
  for (const Shape& s : shapes) {
    CAPTURE(shape_str(s));
    const auto v = oracle::random_values(shape_numel(s), 60 + s.size());
    const auto r = oracle::random_values(shape_numel(s), 61 + s.size());
    std::vector<std::vector<double>> grads;
    for (GateMode m : {GateMode::PassBoth, GateMode::DetachAmplitude, GateMode::DetachPhase}) {
      const Tensor x = Tensor::from(s, v, true);
      backward(sum(mul(square(gated_forward(x, m)), Tensor::from(s, r))));
      grads.push_back(vec(x.grad()));
    }
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(std::abs(grads[0][i] - grads[1][i] - grads[2][i]) < 1e-8);
    // Pass-both gradient equals the gate-free one.
    const Tensor x = Tensor::from(s, v, true);
    backward(sum(mul(square(x), Tensor::from(s, r))));
    CHECK(oracle::max_abs_diff(grads[0], x.grad()) < 1e-8);
  }
}

TEST_CASE("spatial axes") {
  CHECK(spatial_axes({8}) == std::vector<std::size_t>{0});
  CHECK(spatial_axes({3, 8}) == std::vector<std::size_t>{1});
  CHECK(spatial_axes({2, 3, 8, 8}) == std::vector<std::size_t>{2, 3});
  CHECK(trailing({2, 3, 8, 8}, 2) == spatial_axes({2, 3, 8, 8}));
}
