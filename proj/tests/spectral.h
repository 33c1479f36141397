// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// Whole-signal periodogram measurements for band-limit checks.

#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "ctft/core/random.h"
#include "ctft/dsp/fft.h"

namespace ctft::testing {

// Hann-windowed periodogram power per one-sided bin, signal zero-padded to
// an even length.
inline std::vector<double> periodogram(const std::vector<double>& x) {
  const size_t n = x.size() + (x.size() % 2);
  std::vector<double> w(n, 0.0);
  for (size_t i = 0; i < x.size(); ++i)
    w[i] = x[i] * (0.5 - 0.5 * std::cos(2.0 * M_PI * double(i) / double(x.size())));
  std::vector<std::complex<double>> X(n / 2 + 1);
  rfft<double>(w, X);
  std::vector<double> p(X.size());
  for (size_t k = 0; k < X.size(); ++k) p[k] = std::norm(X[k]);
  return p;
}

// Total periodogram power in [lo, hi) Hz.
inline double band_power(const std::vector<double>& p, int rate, double lo, double hi) {
  const double n = 2.0 * double(p.size() - 1);
  double s = 0.0;
  for (size_t k = 0; k < p.size(); ++k) {
    const double f = double(k) * rate / n;
    if (f >= lo && f < hi) s += p[k];
  }
  return s;
}

inline double db(double ratio) { return 10.0 * std::log10(ratio); }

inline std::vector<double> tone(double freq, int rate, size_t n, double amp = 1.0,
                                double phase = 0.0) {
  std::vector<double> x(n);
  for (size_t i = 0; i < n; ++i) x[i] = amp * std::sin(2.0 * M_PI * freq * double(i) / rate + phase);
  return x;
}

inline std::vector<double> white_noise(size_t n, uint64_t seed, double amp = 0.5) {
  Rng rng(seed);
  std::vector<double> x(n);
  for (auto& v : x) v = amp * rng.normal();
  return x;
}

}  // namespace ctft::testing
