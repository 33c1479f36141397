// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "ctft/dsp/waveform.h"

namespace ctft {

// Log-spectral distance (log10 units) at n_fft 2048, hop 512.
double lsd(const Waveform& reference, const Waveform& estimate);

// SI-SDR in dB clamped to [-100, 100].
double si_sdr_metric(const Waveform& reference, const Waveform& estimate);

// Classic STOI. Both inputs are resampled to 10 kHz. Throws DomainError when
// fewer than 30 frames survive silent-frame removal.
double stoi(const Waveform& reference, const Waveform& estimate);

struct ClipMetrics {
  std::string clip_id;
  double lsd = 0.0;
  double stoi = 0.0;
  double si_sdr = 0.0;
};

struct MetricReport {
  std::vector<ClipMetrics> clips;

  void add(const std::string& clip_id, const Waveform& reference, const Waveform& estimate);
  // Arithmetic means; clip_id "mean". Throws when empty.
  ClipMetrics aggregate() const;
  // clip_id,lsd,stoi,si_sdr rows followed by the aggregate row.
  void write_csv(std::ostream& os) const;
};

}  // namespace ctft
