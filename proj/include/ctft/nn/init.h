// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cmath>

#include "ctft/core/tensor.h"

namespace ctft {

// Complex Glorot: Rayleigh modulus with scale 1/sqrt(fan_in + fan_out) and
// uniform phase, so that Var(w) = 2 / (fan_in + fan_out).
template <typename Real>
ComplexTensor<Real> complex_glorot(const Shape& shape, int64_t fan_in, int64_t fan_out, Rng& rng) {
  ComplexTensor<Real> t(shape);
  const double sigma = 1.0 / std::sqrt(static_cast<double>(fan_in + fan_out));
  auto re = t.mutable_real();
  auto im = t.mutable_imag();
  for (size_t k = 0; k < re.size(); ++k) {
    const double r = sigma * std::sqrt(-2.0 * std::log1p(-rng.uniform()));
    const double phi = rng.uniform(-M_PI, M_PI);
    re[k] = static_cast<Real>(r * std::cos(phi));
    im[k] = static_cast<Real>(r * std::sin(phi));
  }
  return t;
}

}  // namespace ctft
