// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <string>

#include "ctft/core/digest.h"
#include "ctft/dsp/resample.h"
#include "ctft/dsp/waveform.h"

namespace ctft {

struct PairedExample {
  Waveform hr;
  Waveform lr_upsampled;
  int source_lr_rate = 0;
};

struct PipelineParams {
  int hr_rate = 48000;
  double clip_seconds = 4.0;
  int filter_order = 6;
  // Anti-alias cutoff as a fraction of the low-rate Nyquist.
  double cutoff_ratio = 0.99;
  SincParams sinc;

  // Canonical text form; every field at full precision.
  std::string canonical() const;
  Digest digest() const { return sha256(canonical()); }
};

// Zero-pads or trims at the end to round(seconds * rate) samples.
Waveform standardize_length(const Waveform& wave, double seconds = 4.0);

// Low-pass, decimate to lr_rate and sinc-interpolate back to the input rate.
// Throws DomainError unless lr_rate divides the input rate.
PairedExample make_lr_hr_pair(const Waveform& hr, int lr_rate, const PipelineParams& params = {});

// Clip at a source path turned into the training target: resampled to
// hr_rate when needed, then length-standardized.
Waveform prepare_target(const Waveform& source, const PipelineParams& params);

// Hann-windowed periodogram power above `freq` relative to the power below it,
// in dB.
double above_band_db(const Waveform& wave, double freq);

// Spot check of the PairedExample band-limit invariant.
bool satisfies_band_limit(const PairedExample& ex, double max_db = -60.0);

}  // namespace ctft
