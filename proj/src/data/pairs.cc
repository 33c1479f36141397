// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "ctft/data/pairs.h"

#include <cmath>
#include <complex>
#include <sstream>

#include "ctft/dsp/fft.h"
#include "ctft/dsp/filter.h"

namespace ctft {

std::string PipelineParams::canonical() const {
  std::ostringstream os;
  os.precision(17);
  os << "hr_rate=" << hr_rate << ";clip_seconds=" << clip_seconds << ";filter_order=" << filter_order
     << ";cutoff_ratio=" << cutoff_ratio << ";sinc.beta=" << sinc.beta
     << ";sinc.zero_crossings=" << sinc.zero_crossings << ";sinc.cutoff=" << sinc.cutoff;
  return os.str();
}

Waveform standardize_length(const Waveform& wave, double seconds) {
  const auto n = static_cast<size_t>(std::llround(seconds * wave.rate()));
  if (n == 0) throw DomainError("standardize_length: target length is zero samples");
  if (wave.size() == n) return wave;
  std::vector<double> x(wave.samples().begin(), wave.samples().begin() + std::min(n, wave.size()));
  x.resize(n, 0.0);
  return Waveform(std::move(x), wave.rate());
}

PairedExample make_lr_hr_pair(const Waveform& hr, int lr_rate, const PipelineParams& params) {
  if (lr_rate <= 0 || lr_rate > hr.rate() || hr.rate() % lr_rate != 0)
    throw DomainError("make_lr_hr_pair: " + std::to_string(lr_rate) + " Hz does not divide " +
                      std::to_string(hr.rate()) + " Hz");
  const int factor = hr.rate() / lr_rate;
  const auto filt = design_butterworth_lowpass(params.filter_order, params.cutoff_ratio * lr_rate / 2.0, hr.rate());
  const Waveform filtered = filter_zero_phase(hr, filt);
  Waveform up = sinc_upsample(downsample(filtered, factor), factor, params.sinc);
  if (up.size() != hr.size()) {
    std::vector<double> x = up.samples();
    x.resize(hr.size(), 0.0);
    up = Waveform(std::move(x), hr.rate());
  }
  return {hr, std::move(up), lr_rate};
}

Waveform prepare_target(const Waveform& source, const PipelineParams& params) {
  const Waveform at_rate = source.rate() == params.hr_rate ? source : resample(source, params.hr_rate, params.sinc);
  return standardize_length(at_rate, params.clip_seconds);
}

double above_band_db(const Waveform& wave, double freq) {
  const auto& s = wave.samples();
  const size_t n = s.size() + (s.size() % 2);
  std::vector<double> w(n, 0.0);
  for (size_t i = 0; i < s.size(); ++i) w[i] = s[i] * (0.5 - 0.5 * std::cos(2 * M_PI * double(i) / double(s.size())));
  std::vector<std::complex<double>> X(n / 2 + 1);
  rfft<double>(w, X);
  double above = 0, below = 0;
  for (size_t k = 0; k < X.size(); ++k) (double(k) * wave.rate() / double(n) >= freq ? above : below) += std::norm(X[k]);
  if (below <= 0) return above > 0 ? INFINITY : -INFINITY;
  return 10 * std::log10(above / below);
}

bool satisfies_band_limit(const PairedExample& ex, double max_db) {
  if (ex.source_lr_rate >= ex.lr_upsampled.rate()) return true;
  return above_band_db(ex.lr_upsampled, ex.source_lr_rate / 2.0) <= max_db;
}

}  // namespace ctft
