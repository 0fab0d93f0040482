// Copyright 2026 The paddles-lab Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "paddles/tensor.hpp"

namespace paddles {

/// Which spectral components keep their edge to the upstream graph.
enum class GateMode { PassBoth, DetachAmplitude, DetachPhase, DetachBoth };

std::string to_string(GateMode mode);
GateMode gate_mode_from_string(const std::string& name);

/// Frequency-domain feature. `real` and `imag` share a shape; `axes` are the
/// trailing axes the transform ran over.
struct ComplexSpectrum {
  Tensor real;
  Tensor imag;
  std::vector<std::size_t> axes;
};

/// Polar form of a spectrum: amplitude >= 0, phase in (-pi, pi].
struct SpectralPair {
  Tensor amplitude;
  Tensor phase;
  std::vector<std::size_t> axes;
};

/// Below this magnitude a bin's phase is 0 and carries no gradient.
inline constexpr double kPhaseGuard = 1e-12;
/// Largest imaginary residue idft() tolerates before refusing to drop it.
inline constexpr double kImagResidueLimit = 1e-6;

/// Transform axes used by the gate: the last axis for rank <= 2 (vector
/// features, [N x D]), the last two for rank >= 3 (spatial maps).
std::vector<std::size_t> spatial_axes(const Shape& shape);

/// Unnormalized forward DFT of a real tensor over `axes` (the last one or
/// two axes), one axis after another. Differentiable.
ComplexSpectrum dft(const Tensor& x, std::vector<std::size_t> axes);
ComplexSpectrum dft(const ComplexSpectrum& s);

/// Normalized inverse (1/M per axis) back to a real tensor. Throws
/// NumericalError if the imaginary residue reaches kImagResidueLimit.
Tensor idft(const ComplexSpectrum& s);
/// Normalized inverse keeping the complex result.
ComplexSpectrum idft_complex(const ComplexSpectrum& s);

/// amplitude = |F|, phase = atan2(Im F, Re F).
SpectralPair disentangle(const ComplexSpectrum& s);

/// real = A cos(phi), imag = A sin(phi).
ComplexSpectrum recombine(const SpectralPair& p);

/// Cuts the upstream edge of the component(s) named by `mode`.
SpectralPair apply_gate(const SpectralPair& p, GateMode mode);

/// idft(recombine(gate(disentangle(dft(x))))). Value-identical to x up to
/// round-off; the gradient only flows through the components left attached.
Tensor gated_forward(const Tensor& x, GateMode mode);
Tensor gated_forward(const Tensor& x, GateMode mode, std::vector<std::size_t> axes);

}  // namespace paddles
