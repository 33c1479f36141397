// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include "ctft/dsp/waveform.h"

namespace ctft {

struct SincParams {
  double beta = 8.6;        // Kaiser window shape
  int zero_crossings = 64;  // per side, in units of the low rate
  // -6 dB point relative to the low-rate Nyquist frequency.
  double cutoff = 0.95;
};

// Keeps every factor-th sample; the caller band-limits first.
Waveform downsample(const Waveform& wave, int factor);

// Zero-stuffing followed by a Kaiser-windowed sinc low-pass with gain
// `factor`. Output length = input length * factor.
Waveform sinc_upsample(const Waveform& wave, int factor, const SincParams& params = {});

// Polyphase rational resampling to `target_rate` with the same kernel
// family; the low-pass sits at the smaller of the two Nyquist rates.
Waveform resample(const Waveform& wave, int target_rate, const SincParams& params = {});

// Zeroth-order modified Bessel function of the first kind.
double bessel_i0(double x);

}  // namespace ctft
