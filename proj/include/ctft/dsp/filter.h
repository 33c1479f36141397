// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <vector>

#include "ctft/dsp/waveform.h"

namespace ctft {

// H(z) = (b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2)
struct Biquad {
  double b0, b1, b2, a1, a2;
};

struct BiquadCascade {
  std::vector<Biquad> sections;
  double cutoff = 0.0;  // Hz
  int rate = 0;
  int order = 0;
};

// Bilinear-transform Butterworth low-pass; |H| = 1/sqrt(2) at cutoff.
BiquadCascade design_butterworth_lowpass(int order, double cutoff, int rate);

double magnitude_response(const BiquadCascade& filt, double freq);
bool is_stable(const BiquadCascade& filt);

// Single causal pass with zero initial state.
std::vector<double> sosfilt(const BiquadCascade& filt, const std::vector<double>& x);

// Samples until the impulse response stays below 1e-9 of its peak.
int settle_length(const BiquadCascade& filt);

// Forward-backward filtering with odd edge extension and steady-state
// initial conditions.
Waveform filter_zero_phase(const Waveform& wave, const BiquadCascade& filt);

}  // namespace ctft
