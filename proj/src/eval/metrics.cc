// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "ctft/eval/metrics.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <iomanip>

#include "ctft/dsp/fft.h"
#include "ctft/dsp/resample.h"
#include "ctft/dsp/stft.h"
#include "ctft/objectives/losses.h"

namespace ctft {

namespace {

void check_pair(const Waveform& a, const Waveform& b, const char* what) {
  if (a.rate() != b.rate())
    throw DomainError(std::string(what) + ": sample rates " + std::to_string(a.rate()) + " and " +
                      std::to_string(b.rate()) + " differ");
  if (a.size() != b.size())
    throw DimensionError(std::string(what) + ": lengths " + std::to_string(a.size()) + " and " +
                         std::to_string(b.size()) + " differ");
}

constexpr int kStoiRate = 10000;
constexpr int kStoiFrame = 256;
constexpr int kStoiHop = 128;
constexpr int kStoiFft = 512;
constexpr int kStoiBands = 15;
constexpr int kStoiSegment = 30;
constexpr double kStoiBetaDb = -15.0;
constexpr double kStoiDynRange = 40.0;
constexpr double kStoiEps = 1e-15;

// Symmetric hann of length n without its zero end points.
std::vector<double> stoi_window() {
  std::vector<double> w(kStoiFrame);
  for (int i = 0; i < kStoiFrame; ++i) w[i] = 0.5 - 0.5 * std::cos(2 * M_PI * (i + 1) / (kStoiFrame + 1));
  return w;
}

// Drops frames more than 40 dB below the loudest reference frame and
// overlap-adds the kept windowed frames of both signals.
void remove_silent_frames(std::vector<double>& x, std::vector<double>& y) {
  const auto w = stoi_window();
  std::vector<int64_t> starts;
  for (int64_t s = 0; s + kStoiFrame <= static_cast<int64_t>(x.size()); s += kStoiHop) starts.push_back(s);
  std::vector<double> energy(starts.size());
  double top = -INFINITY;
  for (size_t f = 0; f < starts.size(); ++f) {
    double e = 0;
    for (int i = 0; i < kStoiFrame; ++i) e += std::pow(w[i] * x[starts[f] + i], 2);
    energy[f] = 20 * std::log10(std::sqrt(e) + kStoiEps);
    top = std::max(top, energy[f]);
  }
  std::vector<int64_t> kept;
  for (size_t f = 0; f < starts.size(); ++f)
    if (energy[f] > top - kStoiDynRange) kept.push_back(starts[f]);
  const int64_t out_len = kept.empty() ? 0 : (kept.size() - 1) * kStoiHop + kStoiFrame;
  std::vector<double> xs(out_len, 0.0), ys(out_len, 0.0);
  for (size_t f = 0; f < kept.size(); ++f)
    for (int i = 0; i < kStoiFrame; ++i) {
      xs[f * kStoiHop + i] += w[i] * x[kept[f] + i];
      ys[f * kStoiHop + i] += w[i] * y[kept[f] + i];
    }
  x = std::move(xs);
  y = std::move(ys);
}

// Third-octave band envelopes [band][frame].
std::vector<std::vector<double>> band_envelopes(const std::vector<double>& x) {
  const auto w = stoi_window();
  const int bins = kStoiFft / 2 + 1;
  // Band edges snapped to the nearest FFT bin.
  std::vector<std::pair<int, int>> bands;
  auto nearest = [&](double f) {
    int best = 0;
    for (int k = 1; k < bins; ++k)
      if (std::abs(k * double(kStoiRate) / kStoiFft - f) <
          std::abs(best * double(kStoiRate) / kStoiFft - f))
        best = k;
    return best;
  };
  for (int j = 0; j < kStoiBands; ++j) {
    const double cf = 150.0 * std::pow(2.0, j / 3.0);
    bands.emplace_back(nearest(cf * std::pow(2.0, -1.0 / 6)), nearest(cf * std::pow(2.0, 1.0 / 6)));
  }
  std::vector<std::vector<double>> env(kStoiBands);
  std::vector<double> frame(kStoiFft);
  std::vector<std::complex<double>> spec(bins);
  for (int64_t s = 0; s + kStoiFrame < static_cast<int64_t>(x.size()); s += kStoiHop) {
    std::fill(frame.begin(), frame.end(), 0.0);
    for (int i = 0; i < kStoiFrame; ++i) frame[i] = w[i] * x[s + i];
    rfft<double>(frame, spec);
    for (int j = 0; j < kStoiBands; ++j) {
      double e = 0;
      for (int k = bands[j].first; k < bands[j].second; ++k) e += std::norm(spec[k]);
      env[j].push_back(std::sqrt(e));
    }
  }
  return env;
}

}  // namespace

double lsd(const Waveform& reference, const Waveform& estimate) {
  check_pair(reference, estimate, "lsd");
  const StftConfig cfg{2048, 512, 2048, WindowKind::kHann, true};
  const Spectrogram a = stft(reference, cfg), b = stft(estimate, cfg);
  const int64_t F = a.data.shape()[0], T = a.data.shape()[1];
  constexpr double eps = 1e-9;
  double total = 0;
  for (int64_t t = 0; t < T; ++t) {
    double acc = 0;
    for (int64_t k = 0; k < F; ++k) {
      const int64_t i = k * T + t;
      const double pa = a.data.real()[i] * a.data.real()[i] + a.data.imag()[i] * a.data.imag()[i];
      const double pb = b.data.real()[i] * b.data.real()[i] + b.data.imag()[i] * b.data.imag()[i];
      const double d = std::log10(pa + eps) - std::log10(pb + eps);
      acc += d * d;
    }
    total += std::sqrt(acc / F);
  }
  return total / T;
}

double si_sdr_metric(const Waveform& reference, const Waveform& estimate) {
  return -si_sdr_loss(reference, estimate);
}

double stoi(const Waveform& reference, const Waveform& estimate) {
  check_pair(reference, estimate, "stoi");
  std::vector<double> x = reference.rate() == kStoiRate ? reference.samples()
                                                        : resample(reference, kStoiRate).samples();
  std::vector<double> y = estimate.rate() == kStoiRate ? estimate.samples()
                                                       : resample(estimate, kStoiRate).samples();
  remove_silent_frames(x, y);
  const auto X = band_envelopes(x), Y = band_envelopes(y);
  const int64_t frames = X.empty() ? 0 : static_cast<int64_t>(X[0].size());
  if (frames < kStoiSegment)
    throw DomainError("stoi: " + std::to_string(frames) + " frames after silence removal, need " +
                      std::to_string(kStoiSegment));
  const double clip = 1.0 + std::pow(10.0, -kStoiBetaDb / 20.0);
  double total = 0;
  int64_t count = 0;
  for (int64_t m = kStoiSegment; m <= frames; ++m) {
    for (int j = 0; j < kStoiBands; ++j) {
      const double* xs = X[j].data() + m - kStoiSegment;
      const double* ys = Y[j].data() + m - kStoiSegment;
      double nx = 0, ny = 0;
      for (int n = 0; n < kStoiSegment; ++n) nx += xs[n] * xs[n], ny += ys[n] * ys[n];
      const double alpha = std::sqrt(nx) / (std::sqrt(ny) + kStoiEps);
      double yp[kStoiSegment];
      double mx = 0, my = 0;
      for (int n = 0; n < kStoiSegment; ++n) {
        yp[n] = std::min(alpha * ys[n], clip * xs[n]);
        mx += xs[n] / kStoiSegment;
        my += yp[n] / kStoiSegment;
      }
      double sxy = 0, sxx = 0, syy = 0;
      for (int n = 0; n < kStoiSegment; ++n) {
        const double a = xs[n] - mx, b = yp[n] - my;
        sxy += a * b;
        sxx += a * a;
        syy += b * b;
      }
      total += sxy / ((std::sqrt(sxx) + kStoiEps) * (std::sqrt(syy) + kStoiEps));
      ++count;
    }
  }
  return total / count;
}

void MetricReport::add(const std::string& clip_id, const Waveform& reference,
                       const Waveform& estimate) {
  clips.push_back({clip_id, lsd(reference, estimate), stoi(reference, estimate),
                   si_sdr_metric(reference, estimate)});
}

ClipMetrics MetricReport::aggregate() const {
  if (clips.empty()) throw DomainError("metric report has no clips");
  ClipMetrics m{"mean"};
  for (const auto& c : clips) {
    m.lsd += c.lsd;
    m.stoi += c.stoi;
    m.si_sdr += c.si_sdr;
  }
  const double n = static_cast<double>(clips.size());
  m.lsd /= n;
  m.stoi /= n;
  m.si_sdr /= n;
  return m;
}

void MetricReport::write_csv(std::ostream& os) const {
  os << "clip_id,lsd,stoi,si_sdr\n" << std::setprecision(10);
  auto row = [&](const ClipMetrics& c) {
    os << c.clip_id << ',' << c.lsd << ',' << c.stoi << ',' << c.si_sdr << '\n';
  };
  for (const auto& c : clips) row(c);
  if (!clips.empty()) row(aggregate());
}

}  // namespace ctft
