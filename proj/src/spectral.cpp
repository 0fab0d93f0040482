// Copyright 2026 The paddles-lab Authors.
// SPDX-License-Identifier: Apache-2.0

#include "paddles/spectral.hpp"

#include <cmath>
#include <numbers>

#include "paddles/errors.hpp"
#include "paddles/fft.hpp"
#include "paddles/ops.hpp"

namespace paddles {

namespace {

using fft::Complex;

void check_axes(const Shape& shape, const std::vector<std::size_t>& axes) {
  if (axes.empty()) throw UsageError("spectral transform: empty axis list");
  const std::size_t r = shape.size();
  const bool last_one = axes.size() == 1 && r >= 1 && axes[0] == r - 1;
  const bool last_two = axes.size() == 2 && r >= 2 && axes[0] == r - 2 && axes[1] == r - 1;
  if (!last_one && !last_two) {
    throw UsageError("spectral transform: axes must be the last one or two axes of " + shape_str(shape));
  }
  for (std::size_t a : axes) {
    if (shape[a] == 0) throw UsageError("spectral transform: zero extent along axis " + std::to_string(a));
  }
}

// Packs (re, im) into [shape..., 2], transforms along `axis` and scales.
// Backward applies the conjugate-transposed map: the opposite direction
// with the same scale.
Tensor axis_transform(const Tensor& re, const Tensor& im, std::size_t axis, bool inverse, double scale) {
  if (re.shape() != im.shape()) {
    throw DimensionError("spectrum parts differ in shape: " + shape_str(re.shape()) + " vs " + shape_str(im.shape()));
  }
  const Shape shape = re.shape();
  const std::size_t n = re.numel();
  std::vector<Complex> data(n);
  for (std::size_t i = 0; i < n; ++i) data[i] = Complex(re.at(i), im.at(i));
  fft::transform_axis(data, shape, axis, inverse, scale);

  std::vector<double> packed(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    packed[2 * i] = data[i].real();
    packed[2 * i + 1] = data[i].imag();
  }
  Shape packed_shape = shape;
  packed_shape.push_back(2);
  return make_op_result(inverse ? "idft_axis" : "dft_axis", std::move(packed_shape), std::move(packed), {re, im},
                        [shape, axis, inverse, scale, n](auto g, auto gin) {
                          std::vector<Complex> cot(n);
                          for (std::size_t i = 0; i < n; ++i) cot[i] = Complex(g[2 * i], g[2 * i + 1]);
                          fft::transform_axis(cot, shape, axis, !inverse, scale);
                          if (gin[0])
                            for (std::size_t i = 0; i < n; ++i) (*gin[0])[i] += cot[i].real();
                          if (gin[1])
                            for (std::size_t i = 0; i < n; ++i) (*gin[1])[i] += cot[i].imag();
                        });
}

Tensor take_component(const Tensor& packed, std::size_t component) {
  Shape shape(packed.shape().begin(), packed.shape().end() - 1);
  const std::size_t n = packed.numel() / 2;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = packed.at(2 * i + component);
  return make_op_result(component == 0 ? "real_part" : "imag_part", std::move(shape), std::move(out), {packed},
                        [component, n](auto g, auto gin) {
                          for (std::size_t i = 0; i < n; ++i) (*gin[0])[2 * i + component] += g[i];
                        });
}

ComplexSpectrum transform(const ComplexSpectrum& s, bool inverse) {
  check_axes(s.real.shape(), s.axes);
  Tensor re = s.real;
  Tensor im = s.imag;
  for (std::size_t axis : s.axes) {
    const double scale = inverse ? 1.0 / static_cast<double>(re.dim(axis)) : 1.0;
    Tensor packed = axis_transform(re, im, axis, inverse, scale);
    re = take_component(packed, 0);
    im = take_component(packed, 1);
  }
  return {re, im, s.axes};
}

void require_same_shape(const char* what, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(what) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
  }
}

}  // namespace

std::string to_string(GateMode mode) {
  switch (mode) {
    case GateMode::PassBoth:
      return "pass_both";
    case GateMode::DetachAmplitude:
      return "detach_amplitude";
    case GateMode::DetachPhase:
      return "detach_phase";
    case GateMode::DetachBoth:
      return "detach_both";
  }
  return "unknown";
}

GateMode gate_mode_from_string(const std::string& name) {
  for (GateMode m : {GateMode::PassBoth, GateMode::DetachAmplitude, GateMode::DetachPhase, GateMode::DetachBoth}) {
    if (to_string(m) == name) return m;
  }
  throw ConfigError("unknown gate mode '" + name + "'");
}

std::vector<std::size_t> spatial_axes(const Shape& shape) {
  if (shape.empty()) throw UsageError("spectral gate: rank-0 tensor has no transform axis");
  if (shape.size() <= 2) return {shape.size() - 1};
  return {shape.size() - 2, shape.size() - 1};
}

ComplexSpectrum dft(const Tensor& x, std::vector<std::size_t> axes) {
  check_axes(x.shape(), axes);
  return transform({x, Tensor::zeros(x.shape()), std::move(axes)}, false);
}

ComplexSpectrum dft(const ComplexSpectrum& s) { return transform(s, false); }

ComplexSpectrum idft_complex(const ComplexSpectrum& s) { return transform(s, true); }

Tensor idft(const ComplexSpectrum& s) {
  ComplexSpectrum out = transform(s, true);
  double residue = 0.0;
  for (double v : out.imag.values()) residue = std::max(residue, std::abs(v));
  if (!(residue < kImagResidueLimit)) {
    throw NumericalError("idft: imaginary residue " + std::to_string(residue) + " exceeds " +
                         std::to_string(kImagResidueLimit));
  }
  return out.real;
}

SpectralPair disentangle(const ComplexSpectrum& s) {
  require_same_shape("disentangle", s.real, s.imag);
  const std::size_t n = s.real.numel();
  std::vector<double> amp(n), phase(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double re = s.real.at(i), im = s.imag.at(i);
    amp[i] = std::hypot(re, im);
    if (amp[i] < kPhaseGuard) {
      phase[i] = 0.0;
    } else {
      phase[i] = std::atan2(im, re);
      if (phase[i] == -std::numbers::pi) phase[i] = std::numbers::pi;
    }
  }
  const Tensor re = s.real, im = s.imag;
  const std::vector<double> mags = amp;
  Tensor amplitude = make_op_result("amplitude", re.shape(), std::move(amp), {re, im},
                                    [re, im, mags](auto g, auto gin) {
                                      for (std::size_t i = 0; i < g.size(); ++i) {
                                        if (mags[i] < kPhaseGuard) continue;
                                        if (gin[0]) (*gin[0])[i] += g[i] * re.at(i) / mags[i];
                                        if (gin[1]) (*gin[1])[i] += g[i] * im.at(i) / mags[i];
                                      }
                                    });
  Tensor phase_t = make_op_result("phase", re.shape(), std::move(phase), {re, im}, [re, im, mags](auto g, auto gin) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (mags[i] < kPhaseGuard) continue;
      const double m2 = mags[i] * mags[i];
      if (gin[0]) (*gin[0])[i] += g[i] * -im.at(i) / m2;
      if (gin[1]) (*gin[1])[i] += g[i] * re.at(i) / m2;
    }
  });
  return {amplitude, phase_t, s.axes};
}

ComplexSpectrum recombine(const SpectralPair& p) {
  require_same_shape("recombine", p.amplitude, p.phase);
  const std::size_t n = p.amplitude.numel();
  std::vector<double> cosv(n), sinv(n), re(n), im(n);
  for (std::size_t i = 0; i < n; ++i) {
    cosv[i] = std::cos(p.phase.at(i));
    sinv[i] = std::sin(p.phase.at(i));
    re[i] = p.amplitude.at(i) * cosv[i];
    im[i] = p.amplitude.at(i) * sinv[i];
  }
  const Tensor amp = p.amplitude;
  Tensor real = make_op_result("polar_real", amp.shape(), std::move(re), {p.amplitude, p.phase},
                               [amp, cosv, sinv](auto g, auto gin) {
                                 for (std::size_t i = 0; i < g.size(); ++i) {
                                   if (gin[0]) (*gin[0])[i] += g[i] * cosv[i];
                                   if (gin[1]) (*gin[1])[i] += g[i] * -amp.at(i) * sinv[i];
                                 }
                               });
  Tensor imag = make_op_result("polar_imag", amp.shape(), std::move(im), {p.amplitude, p.phase},
                               [amp, cosv, sinv](auto g, auto gin) {
                                 for (std::size_t i = 0; i < g.size(); ++i) {
                                   if (gin[0]) (*gin[0])[i] += g[i] * sinv[i];
                                   if (gin[1]) (*gin[1])[i] += g[i] * amp.at(i) * cosv[i];
                                 }
                               });
  return {real, imag, p.axes};
}

SpectralPair apply_gate(const SpectralPair& p, GateMode mode) {
  SpectralPair out = p;
  if (mode == GateMode::DetachAmplitude || mode == GateMode::DetachBoth) out.amplitude = stop_gradient(p.amplitude);
  if (mode == GateMode::DetachPhase || mode == GateMode::DetachBoth) out.phase = stop_gradient(p.phase);
  return out;
}

Tensor gated_forward(const Tensor& x, GateMode mode) { return gated_forward(x, mode, spatial_axes(x.shape())); }

Tensor gated_forward(const Tensor& x, GateMode mode, std::vector<std::size_t> axes) {
  return idft(recombine(apply_gate(disentangle(dft(x, std::move(axes))), mode)));
}

}  // namespace paddles
