// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "ctft/dsp/filter.h"

#include <algorithm>
#include <cmath>
#include <complex>

#include "ctft/core/ops.h"

namespace ctft {

namespace {

struct State {
  double z1 = 0.0, z2 = 0.0;
};

double dc_gain(const Biquad& s) { return (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2); }

// Transposed direct form II state for a constant input of amplitude 1.
State steady_state(const Biquad& s) {
  const double g = dc_gain(s);
  State st;
  st.z2 = s.b2 - s.a2 * g;
  st.z1 = s.b1 - s.a1 * g + st.z2;
  return st;
}

void run(const BiquadCascade& filt, std::vector<double>& x, std::vector<State> state) {
  for (size_t k = 0; k < filt.sections.size(); ++k) {
    const Biquad& s = filt.sections[k];
    State& st = state[k];
    for (double& v : x) {
      const double in = v;
      const double y = s.b0 * in + st.z1;
      st.z1 = s.b1 * in - s.a1 * y + st.z2;
      st.z2 = s.b2 * in - s.a2 * y;
      v = y;
    }
  }
}

std::vector<State> scaled_initial(const BiquadCascade& filt, double x0) {
  std::vector<State> st(filt.sections.size());
  double scale = x0;
  for (size_t k = 0; k < filt.sections.size(); ++k) {
    const State ss = steady_state(filt.sections[k]);
    st[k] = {ss.z1 * scale, ss.z2 * scale};
    scale *= dc_gain(filt.sections[k]);
  }
  return st;
}

}  // namespace

BiquadCascade design_butterworth_lowpass(int order, double cutoff, int rate) {
  if (order < 2 || order % 2 != 0)
    throw DspError("butterworth order must be even and >= 2, got " + std::to_string(order));
  if (rate <= 0 || cutoff <= 0.0 || cutoff >= rate / 2.0)
    throw DspError("butterworth cutoff " + std::to_string(cutoff) +
                   " Hz must lie strictly inside (0, " + std::to_string(rate / 2.0) + ")");
  BiquadCascade filt;
  filt.cutoff = cutoff;
  filt.rate = rate;
  filt.order = order;
  const double k = 2.0 * rate;
  const double wa = k * std::tan(M_PI * cutoff / rate);
  for (int i = 0; i < order / 2; ++i) {
    // Analog prototype pole p = exp(j*theta), left half-plane.
    const double theta = M_PI * (2.0 * i + order + 1) / (2.0 * order);
    const double re = std::cos(theta);
    const double a0 = k * k - 2.0 * re * wa * k + wa * wa;
    const double a1 = 2.0 * (wa * wa - k * k);
    const double a2 = k * k + 2.0 * re * wa * k + wa * wa;
    const double b = wa * wa;
    filt.sections.push_back({b / a0, 2.0 * b / a0, b / a0, a1 / a0, a2 / a0});
  }
  return filt;
}

double magnitude_response(const BiquadCascade& filt, double freq) {
  const std::complex<double> z1 = std::polar(1.0, -2.0 * M_PI * freq / filt.rate);
  const std::complex<double> z2 = z1 * z1;
  std::complex<double> h = 1.0;
  for (const auto& s : filt.sections)
    h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
  return std::abs(h);
}

bool is_stable(const BiquadCascade& filt) {
  for (const auto& s : filt.sections)
    if (!(std::abs(s.a2) < 1.0 && std::abs(s.a1) < 1.0 + s.a2)) return false;
  return true;
}

std::vector<double> sosfilt(const BiquadCascade& filt, const std::vector<double>& x) {
  std::vector<double> y = x;
  run(filt, y, std::vector<State>(filt.sections.size()));
  return y;
}

int settle_length(const BiquadCascade& filt) {
  constexpr int kMax = 1 << 18;
  std::vector<State> st(filt.sections.size());
  double peak = 0.0;
  int last = 0;
  for (int n = 0; n < kMax; ++n) {
    double v = n == 0 ? 1.0 : 0.0;
    for (size_t k = 0; k < filt.sections.size(); ++k) {
      const Biquad& s = filt.sections[k];
      const double y = s.b0 * v + st[k].z1;
      st[k].z1 = s.b1 * v - s.a1 * y + st[k].z2;
      st[k].z2 = s.b2 * v - s.a2 * y;
      v = y;
    }
    peak = std::max(peak, std::abs(v));
    if (std::abs(v) > 1e-9 * peak) last = n;
    if (n - last > 64 && n > 64) break;
  }
  return last + 1;
}

Waveform filter_zero_phase(const Waveform& wave, const BiquadCascade& filt) {
  if (!is_stable(filt)) throw DspError("filter_zero_phase: unstable biquad cascade");
  const auto& x = wave.samples();
  const int64_t n = static_cast<int64_t>(x.size());
  const int64_t pad = std::max<int64_t>(3 * (2 * filt.sections.size() + 1), settle_length(filt));
  // Odd extension about both end points; long pads reflect repeatedly.
  std::vector<double> ext(n + 2 * pad);
  for (int64_t i = 0; i < static_cast<int64_t>(ext.size()); ++i) {
    const int64_t j = i - pad;
    if (j >= 0 && j < n) {
      ext[i] = x[j];
    } else if (j < 0) {
      ext[i] = 2.0 * x[0] - x[reflect_index(-j, n)];
    } else {
      ext[i] = 2.0 * x[n - 1] - x[reflect_index(2 * (n - 1) - j, n)];
    }
  }
  run(filt, ext, scaled_initial(filt, ext.front()));
  std::reverse(ext.begin(), ext.end());
  run(filt, ext, scaled_initial(filt, ext.front()));
  std::reverse(ext.begin(), ext.end());
  std::vector<double> y(ext.begin() + pad, ext.begin() + pad + n);
  return Waveform(std::move(y), wave.rate());
}

}  // namespace ctft
