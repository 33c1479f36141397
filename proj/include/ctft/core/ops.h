// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// Differentiable element-wise, shape and reduction operations on
// ComplexTensor. Binary arithmetic broadcasts with numpy rules.
//
// Ops documented as "real" act on the real part only and produce a real
// tensor; they are meant for losses, norms and attention scores.

#pragma once

#include <complex>
#include <vector>

#include "ctft/core/tensor.h"

namespace ctft {

template <typename Real>
using CT = ComplexTensor<Real>;

// Arithmetic.
template <typename Real> CT<Real> add(const CT<Real>& a, const CT<Real>& b);
template <typename Real> CT<Real> sub(const CT<Real>& a, const CT<Real>& b);
template <typename Real> CT<Real> mul(const CT<Real>& a, const CT<Real>& b);
template <typename Real> CT<Real> div(const CT<Real>& a, const CT<Real>& b);
template <typename Real> CT<Real> scale(const CT<Real>& a, std::complex<Real> alpha);
template <typename Real> CT<Real> add_scalar(const CT<Real>& a, std::complex<Real> c);
template <typename Real> CT<Real> neg(const CT<Real>& a);
template <typename Real> CT<Real> conj(const CT<Real>& a);

// |z|, |z|^2; real outputs. The gradient of |z| at z = 0 is taken as 0.
template <typename Real> CT<Real> abs(const CT<Real>& a);
template <typename Real> CT<Real> abs2(const CT<Real>& a);
template <typename Real> CT<Real> real_part(const CT<Real>& a);
template <typename Real> CT<Real> imag_part(const CT<Real>& a);
// re + j*im from two real tensors of equal shape.
template <typename Real> CT<Real> make_complex(const CT<Real>& re, const CT<Real>& im);

// Real element-wise functions.
template <typename Real> CT<Real> log(const CT<Real>& a);
template <typename Real> CT<Real> exp(const CT<Real>& a);
template <typename Real> CT<Real> sqrt(const CT<Real>& a);
template <typename Real> CT<Real> clamp(const CT<Real>& a, Real lo, Real hi);
// Real softmax over the last axis.
template <typename Real> CT<Real> softmax(const CT<Real>& a);

// max(0, re) + j max(0, im).
template <typename Real> CT<Real> crelu(const CT<Real>& a);

// Inverted dropout with the same keep mask on real and imaginary parts.
template <typename Real> CT<Real> dropout(const CT<Real>& a, double p, Rng& rng);

// Shape.
template <typename Real> CT<Real> reshape(const CT<Real>& a, const Shape& shape);
template <typename Real> CT<Real> permute(const CT<Real>& a, const std::vector<int>& perm);
template <typename Real> CT<Real> transpose(const CT<Real>& a, int d0, int d1);
template <typename Real> CT<Real> concat(const std::vector<CT<Real>>& parts, int axis);
template <typename Real> CT<Real> narrow(const CT<Real>& a, int axis, int64_t start, int64_t length);
template <typename Real> std::vector<CT<Real>> split(const CT<Real>& a, int axis, const std::vector<int64_t>& sizes);
// Reflection padding (no edge repeat) is applied repeatedly when the pad
// exceeds the axis length.
template <typename Real> CT<Real> pad_reflect(const CT<Real>& a, int axis, int64_t before, int64_t after);
template <typename Real> CT<Real> pad_zero(const CT<Real>& a, int axis, int64_t before, int64_t after);

// Reductions.
template <typename Real> CT<Real> sum(const CT<Real>& a);
template <typename Real> CT<Real> mean(const CT<Real>& a);
template <typename Real> CT<Real> sum(const CT<Real>& a, int axis, bool keepdim = false);
template <typename Real> CT<Real> mean(const CT<Real>& a, int axis, bool keepdim = false);

// Source index of each position of a reflect-padded axis.
int64_t reflect_index(int64_t i, int64_t n);

}  // namespace ctft
