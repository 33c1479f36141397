// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// Real FFTs backed by FFTW. Plans are cached per size and shared across
// threads; execution is reentrant.

#pragma once

#include <complex>
#include <span>

namespace ctft {

// out[k] = sum_n in[n] exp(-2 pi j k n / N), k = 0..N/2. in.size() == N.
template <typename Real>
void rfft(std::span<const Real> in, std::span<std::complex<Real>> out);

// Unnormalized inverse of a one-sided spectrum assuming Hermitian symmetry:
// out[n] = sum_{k=0}^{N-1} X[k] exp(2 pi j k n / N). Imaginary parts of the
// DC and Nyquist bins are ignored. out.size() == N.
template <typename Real>
void irfft(std::span<const std::complex<Real>> in, std::span<Real> out);

}  // namespace ctft
