// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "ctft/dsp/resample.h"

#include <cmath>
#include <numeric>

namespace ctft {

namespace {

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  return std::sin(M_PI * x) / (M_PI * x);
}

// Low-pass kernel sampled on the high-rate grid, t in high-rate samples.
// `ratio` = high rate / low rate.
struct Kernel {
  Kernel(int ratio, const SincParams& p)
      : ratio(ratio), half(static_cast<int64_t>(p.zero_crossings) * ratio) {
    taps.resize(2 * half + 1);
    const double norm = bessel_i0(p.beta);
    for (int64_t i = -half; i <= half; ++i) {
      const double r = static_cast<double>(i) / half;
      const double w = bessel_i0(p.beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / norm;
      taps[i + half] = p.cutoff * sinc(p.cutoff * static_cast<double>(i) / ratio) * w;
    }
  }
  double at(int64_t t) const { return (t < -half || t > half) ? 0.0 : taps[t + half]; }
  int ratio;
  int64_t half;
  std::vector<double> taps;
};

}  // namespace

double bessel_i0(double x) {
  double sum = 1.0, term = 1.0;
  const double q = x * x / 4.0;
  for (int k = 1; k < 500; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum;
}

Waveform downsample(const Waveform& wave, int factor) {
  if (factor < 1) throw DomainError("downsample factor must be >= 1");
  if (wave.rate() % factor != 0)
    throw DomainError("downsample: rate " + std::to_string(wave.rate()) +
                      " is not divisible by " + std::to_string(factor));
  if (factor == 1) return wave;
  std::vector<double> y;
  y.reserve((wave.size() + factor - 1) / factor);
  for (size_t i = 0; i < wave.size(); i += factor) y.push_back(wave[i]);
  return Waveform(std::move(y), wave.rate() / factor);
}

Waveform sinc_upsample(const Waveform& wave, int factor, const SincParams& params) {
  if (factor < 1) throw DomainError("sinc_upsample factor must be >= 1");
  if (factor == 1) return wave;
  const Kernel h(factor, params);
  const auto& x = wave.samples();
  const int64_t n_in = static_cast<int64_t>(x.size());
  const int64_t n_out = n_in * factor;
  std::vector<double> y(n_out, 0.0);
  for (int64_t n = 0; n < n_out; ++n) {
    // Contributing inputs m satisfy |n - m*factor| <= half.
    const int64_t m_lo = std::max<int64_t>(0, (n - h.half + factor - 1) / factor);
    const int64_t m_hi = std::min<int64_t>(n_in - 1, (n + h.half) / factor);
    double acc = 0.0;
    for (int64_t m = m_lo; m <= m_hi; ++m) acc += x[m] * h.at(n - m * factor);
    y[n] = acc;
  }
  return Waveform(std::move(y), wave.rate() * factor);
}

Waveform resample(const Waveform& wave, int target_rate, const SincParams& params) {
  if (target_rate <= 0) throw DomainError("resample: target rate must be positive");
  if (target_rate == wave.rate()) return wave;
  const int g = std::gcd(wave.rate(), target_rate);
  const int up = target_rate / g, down = wave.rate() / g;
  // Kernel on the common grid (rate * up), band-limited to the lower rate.
  const int ratio = std::max(up, down);
  const Kernel h(ratio, params);
  const auto& x = wave.samples();
  const int64_t n_in = static_cast<int64_t>(x.size());
  const int64_t n_out = (n_in * up + down - 1) / down;
  std::vector<double> y(n_out, 0.0);
  const double gain = static_cast<double>(up) / ratio;
  for (int64_t n = 0; n < n_out; ++n) {
    const int64_t pos = n * down;  // on the common grid
    const int64_t m_lo = std::max<int64_t>(0, (pos - h.half + up - 1) / up);
    const int64_t m_hi = std::min<int64_t>(n_in - 1, (pos + h.half) / up);
    double acc = 0.0;
    for (int64_t m = m_lo; m <= m_hi; ++m) acc += x[m] * h.at(pos - m * up);
    y[n] = gain * acc;
  }
  return Waveform(std::move(y), target_rate);
}

}  // namespace ctft
