// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// Training losses. Tensor forms take real signals [B, L] (or spectra
// [B, ...] for the two spectral terms), evaluate each example and average
// over the batch.

#pragma once

#include <map>
#include <string>
#include <vector>

#include "ctft/dsp/stft.h"
#include "ctft/dsp/waveform.h"

namespace ctft {

inline constexpr double kSpectralEps = 1e-7;
inline constexpr double kSiSdrEps = 1e-8;
inline constexpr double kSiSdrCapDb = 100.0;

struct ResolutionSet {
  std::vector<StftConfig> configs;

  // (256,128,256), (512,256,512), (1024,512,1024).
  static ResolutionSet standard();
  static ResolutionSet single(int n_fft, int hop, int win);
  void validate() const;
};

// ||x - x_hat||_F / (||x||_F + eps) per example.
template <typename Real>
ComplexTensor<Real> spectral_convergence(const ComplexTensor<Real>& x,
                                         const ComplexTensor<Real>& x_hat);

// mean |log(|x| + eps) - log(|x_hat| + eps)|; inputs are real.
template <typename Real>
ComplexTensor<Real> log_magnitude(const ComplexTensor<Real>& x, const ComplexTensor<Real>& x_hat);

// (1/S) sum_s SC + MAG on the real parts of each STFT.
template <typename Real>
ComplexTensor<Real> mr_stft_loss_real(const ComplexTensor<Real>& target,
                                      const ComplexTensor<Real>& estimate,
                                      const ResolutionSet& res);

// Real-part terms plus the same terms on the imaginary parts.
template <typename Real>
ComplexTensor<Real> mr_stft_loss_complex(const ComplexTensor<Real>& target,
                                         const ComplexTensor<Real>& estimate,
                                         const ResolutionSet& res);

// Single resolution (320, 80, 320).
template <typename Real>
ComplexTensor<Real> sr_stft_loss(const ComplexTensor<Real>& target,
                                 const ComplexTensor<Real>& estimate);

// -SI-SDR in dB with SI-SDR clamped to [-100, 100]. Throws DomainError on an
// all-zero target.
template <typename Real>
ComplexTensor<Real> si_sdr_loss(const ComplexTensor<Real>& target,
                                const ComplexTensor<Real>& estimate);

double mr_stft_loss_real(const Waveform& target, const Waveform& estimate,
                         const ResolutionSet& res = ResolutionSet::standard());
double mr_stft_loss_complex(const Waveform& target, const Waveform& estimate,
                            const ResolutionSet& res = ResolutionSet::standard());
double sr_stft_loss(const Waveform& target, const Waveform& estimate);
double si_sdr_loss(const Waveform& target, const Waveform& estimate);

enum class SpectralLoss { kMrStftReal, kMrStftComplex, kSrStft };

struct LossConfig {
  SpectralLoss spectral = SpectralLoss::kMrStftReal;
  ResolutionSet resolutions = ResolutionSet::standard();
  bool use_si_sdr = true;
  double si_sdr_weight = 1.0;
};

std::string to_string(SpectralLoss v);

// Components: sc_re/<s>, mag_re/<s> (and sc_im, mag_im for the complex
// loss), spectral, si_sdr. total = spectral + weight * si_sdr.
struct LossReport {
  double total = 0.0;
  std::map<std::string, double> components;

  // "total=<v> key=<v> ..." in key order.
  std::string to_record() const;
};

template <typename Real>
struct LossValue {
  ComplexTensor<Real> total;
  LossReport report;
};

template <typename Real>
LossValue<Real> total_loss(const ComplexTensor<Real>& target, const ComplexTensor<Real>& estimate,
                           const LossConfig& cfg);

LossReport total_loss(const Waveform& target, const Waveform& estimate, const LossConfig& cfg);

}  // namespace ctft
