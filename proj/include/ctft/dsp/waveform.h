// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cmath>
#include <vector>

#include "ctft/core/error.h"

namespace ctft {

// Mono signal at an integer sample rate. Finite, non-empty.
class Waveform {
 public:
  Waveform() = default;
  Waveform(std::vector<double> samples, int rate) : samples_(std::move(samples)), rate_(rate) {
    if (rate_ <= 0) throw DomainError("waveform sample rate must be positive");
    if (samples_.empty()) throw DomainError("waveform must contain at least one sample");
    for (double v : samples_)
      if (!std::isfinite(v)) throw NumericError("waveform contains NaN or Inf");
  }

  const std::vector<double>& samples() const { return samples_; }
  int rate() const { return rate_; }
  size_t size() const { return samples_.size(); }
  double duration() const { return static_cast<double>(samples_.size()) / rate_; }
  double operator[](size_t i) const { return samples_[i]; }

 private:
  std::vector<double> samples_;
  int rate_ = 0;
};

}  // namespace ctft
