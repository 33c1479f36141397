// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// One-sided STFT / overlap-add iSTFT. Frame t covers samples
// [t*hop, t*hop + n_fft) of the (optionally reflect-padded) signal; the
// window of length win_length is centred inside n_fft.

#pragma once

#include <vector>

#include "ctft/core/tensor.h"
#include "ctft/dsp/waveform.h"

namespace ctft {

enum class WindowKind { kHann, kSqrtHann };

struct StftConfig {
  int n_fft = 1024;
  int hop = 256;
  int win_length = 1024;
  WindowKind window = WindowKind::kHann;
  bool center = true;

  void validate() const;
  int bins() const { return n_fft / 2 + 1; }
  // Frames produced for a signal of `length` samples.
  int64_t frames(int64_t length) const;
  bool operator==(const StftConfig&) const = default;
};

// Periodic window of win_length samples.
std::vector<double> make_window(WindowKind kind, int length);
// Window of length n_fft with the analysis window centred and zero-padded.
std::vector<double> padded_window(const StftConfig& cfg);

// True when sum_t w^2(n - t*hop) is constant (relative 1e-10).
bool satisfies_cola(const StftConfig& cfg);

struct Spectrogram {
  ComplexTensor<double> data;  // [F, T]
  StftConfig config;
  int origin_rate = 0;
};

Spectrogram stft(const Waveform& wave, const StftConfig& cfg);
// Throws DspError when cfg violates COLA.
Waveform istft(const Spectrogram& spec, const StftConfig& cfg, int64_t out_length);

// Differentiable forms. signal: [B, L] (real part used) -> [B, F, T].
template <typename Real>
ComplexTensor<Real> stft(const ComplexTensor<Real>& signal, const StftConfig& cfg);
// spec: [B, F, T] -> real [B, out_length].
template <typename Real>
ComplexTensor<Real> istft(const ComplexTensor<Real>& spec, const StftConfig& cfg,
                          int64_t out_length);

}  // namespace ctft
