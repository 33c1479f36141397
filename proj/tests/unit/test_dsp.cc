// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <gtest/gtest.h>

#include <cmath>

#include "ctft/dsp/fft.h"
#include "ctft/dsp/filter.h"
#include "ctft/dsp/resample.h"
#include "ctft/dsp/stft.h"
#include "oracles.h"
#include "spectral.h"
#include "test_util.h"

namespace ctft {
namespace {

using testing::band_power;
using testing::db;
using testing::periodogram;
using testing::tone;
using testing::white_noise;

double rms(const std::vector<double>& x, size_t from = 0, size_t to = 0) {
  if (to == 0) to = x.size();
  double s = 0;
  for (size_t i = from; i < to; ++i) s += x[i] * x[i];
  return std::sqrt(s / double(to - from));
}

TEST(Waveform, RejectsNonFinite) {
  EXPECT_THROW(Waveform({1.0, NAN}, 16000), NumericError);
  EXPECT_THROW(Waveform({}, 16000), DomainError);
  EXPECT_THROW(Waveform({0.0}, 0), DomainError);
}

TEST(Butterworth, DcGainCutoffAndRolloff) {
  for (int rate : {16000, 48000}) {
    for (double fc : {990.0, 3960.0, 5940.0}) {
      auto f = design_butterworth_lowpass(6, fc, rate);
      EXPECT_EQ(f.sections.size(), 3u);
      EXPECT_TRUE(is_stable(f));
      EXPECT_NEAR(magnitude_response(f, 0.0), 1.0, 1e-9);
      EXPECT_NEAR(20 * std::log10(magnitude_response(f, fc)), -3.0103, 0.05);
      if (2 * fc < rate / 2.0) {
        EXPECT_LE(20 * std::log10(magnitude_response(f, 2 * fc)), -33.0);
      }
      double prev = 2.0;
      for (double q = 0; q < rate / 2.0; q += rate / 400.0) {
        const double m = magnitude_response(f, q);
        EXPECT_LE(m, prev + 1e-12);
        prev = m;
      }
    }
  }
  auto f2 = design_butterworth_lowpass(2, 1000, 8000);
  EXPECT_NEAR(magnitude_response(f2, 1000), std::sqrt(0.5), 1e-9);
}

TEST(Butterworth, DesignErrors) {
  EXPECT_THROW(design_butterworth_lowpass(6, 8000, 16000), DspError);
  EXPECT_THROW(design_butterworth_lowpass(6, 0, 16000), DspError);
  EXPECT_THROW(design_butterworth_lowpass(5, 1000, 16000), DspError);
  auto bad = design_butterworth_lowpass(2, 1000, 16000);
  bad.sections[0].a2 = 1.5;
  EXPECT_FALSE(is_stable(bad));
  EXPECT_THROW(filter_zero_phase(Waveform({0, 1, 0}, 16000), bad), DspError);
}

TEST(FilterZeroPhase, DcPassesUnchanged) {
  auto f = design_butterworth_lowpass(6, 990, 48000);
  auto y = filter_zero_phase(Waveform(std::vector<double>(5000, 0.37), 48000), f);
  ASSERT_EQ(y.size(), 5000u);
  for (double v : y.samples()) EXPECT_NEAR(v, 0.37, 1e-6);
}

TEST(FilterZeroPhase, StopbandToneSuppressed) {
  auto f = design_butterworth_lowpass(6, 990, 48000);
  const auto x = tone(2.5 * 990, 48000, 48000);
  auto y = filter_zero_phase(Waveform(x, 48000), f);
  const size_t edge = settle_length(f);
  EXPECT_LE(20 * std::log10(rms(y.samples(), edge, x.size() - edge) / rms(x)), -60.0);
  // The odd extension leaves a bounded transient at the boundaries.
  EXPECT_LE(20 * std::log10(rms(y.samples()) / rms(x)), -40.0);
}

TEST(FilterZeroPhase, ImpulseResponseIsSymmetric) {
  auto f = design_butterworth_lowpass(6, 2000, 16000);
  std::vector<double> x(4001, 0.0);
  x[2000] = 1.0;
  auto y = filter_zero_phase(Waveform(x, 16000), f).samples();
  double asym = 0.0;
  for (int k = 1; k < 2000; ++k) asym = std::max(asym, std::abs(y[2000 + k] - y[2000 - k]));
  EXPECT_LT(asym, 1e-8);
}

TEST(FilterZeroPhase, ShortInputIsPadded) {
  auto f = design_butterworth_lowpass(6, 990, 48000);
  auto y = filter_zero_phase(Waveform({0.1, 0.2, 0.3}, 48000), f);
  EXPECT_EQ(y.size(), 3u);
}

TEST(Downsample, Contracts) {
  Waveform w(white_noise(1000, 1), 48000);
  EXPECT_EQ(downsample(w, 1).samples(), w.samples());
  auto d = downsample(w, 24);
  EXPECT_EQ(d.rate(), 2000);
  EXPECT_EQ(d.size(), (1000u + 23) / 24);
  std::vector<double> ramp(24);
  for (int i = 0; i < 24; ++i) ramp[i] = i;
  EXPECT_EQ(downsample(Waveform(ramp, 48000), 4).samples(),
            (std::vector<double>{0, 4, 8, 12, 16, 20}));
  EXPECT_THROW(downsample(Waveform(ramp, 22050), 4), DomainError);
}

TEST(SincUpsample, ToneMatchesAnalyticSine) {
  Waveform w(tone(100, 2000, 2000), 2000);
  EXPECT_EQ(sinc_upsample(w, 1).samples(), w.samples());
  auto y = sinc_upsample(w, 8);
  ASSERT_EQ(y.rate(), 16000);
  ASSERT_EQ(y.size(), 16000u);
  const auto ref = tone(100, 16000, 16000);
  double err = 0;
  for (size_t i = 2000; i < 14000; ++i) err = std::max(err, std::abs(y[i] - ref[i]));
  EXPECT_LT(err, 1e-3);
}

TEST(SincUpsample, NoiseSuppressedAboveNyquist) {
  Waveform w(white_noise(2000 * 4, 2), 2000);
  auto y = sinc_upsample(w, 24);
  const auto p = periodogram(y.samples());
  const double pass = band_power(p, 48000, 0, 1000);
  const double stop = band_power(p, 48000, 1000, 24001);
  EXPECT_LE(db(stop / pass), -60.0);
}

TEST(Resample, RationalRatioPreservesTone) {
  Waveform w(tone(440, 16000, 16000), 16000);
  auto y = resample(w, 10000);
  ASSERT_EQ(y.rate(), 10000);
  ASSERT_EQ(y.size(), 10000u);
  const auto ref = tone(440, 10000, 10000);
  double err = 0;
  for (size_t i = 1000; i < 9000; ++i) err = std::max(err, std::abs(y[i] - ref[i]));
  EXPECT_LT(err, 1e-3);
}

std::vector<double> brickwall(const std::vector<double>& x, int rate, double hi) {
  const size_t n = x.size();
  std::vector<std::complex<double>> X(n / 2 + 1);
  rfft<double>(x, X);
  for (size_t k = 0; k < X.size(); ++k)
    if (double(k) * rate / n >= hi) X[k] = 0.0;
  std::vector<double> y(n);
  irfft<double>(X, y);
  for (double& v : y) v /= double(n);
  return y;
}

struct ChainResult {
  std::vector<double> band_error_db;
  double above_db;
};

ChainResult run_chain(const std::vector<double>& x, int rate, int k) {
  auto f = design_butterworth_lowpass(6, 0.99 * rate / (2.0 * k), rate);
  auto filtered = filter_zero_phase(Waveform(x, rate), f);
  auto back = sinc_upsample(downsample(filtered, k), k);
  std::vector<double> diff(filtered.size());
  for (size_t i = 0; i < diff.size(); ++i) diff[i] = back[i] - filtered[i];
  const double nyq = rate / (2.0 * k);
  const auto pf = periodogram(filtered.samples());
  const auto pd = periodogram(diff);
  const auto pb = periodogram(back.samples());
  ChainResult r;
  for (int band = 0; band < 9; ++band) {
    const double lo = band * 0.1 * nyq, hi = lo + 0.1 * nyq;
    r.band_error_db.push_back(db(band_power(pd, rate, lo, hi) / band_power(pf, rate, lo, hi)));
  }
  r.above_db = db(band_power(pb, rate, nyq, rate / 2.0 + 1) / band_power(pb, rate, 0, nyq));
  return r;
}

TEST(ChainProperty, BandLimitedContentPreserved) {
  const int rate = 48000;
  for (int k : {3, 6, 12, 24}) {
    const auto x = brickwall(white_noise(rate, 3 + k), rate, 0.9 * rate / (2.0 * k));
    const auto r = run_chain(x, rate, k);
    for (int band = 0; band < 9; ++band)
      EXPECT_LE(r.band_error_db[band], -40.0) << "k=" << k << " band " << band;
    EXPECT_LE(r.above_db, -60.0) << "k=" << k;
  }
}

TEST(ChainProperty, BroadbandInputAliasesOnlyNearNyquist) {
  const int rate = 48000;
  for (int k : {3, 6, 12, 24}) {
    const auto r = run_chain(white_noise(rate, 30 + k), rate, k);
    // Images of the 1.0-1.45 Nyquist transition band fold above 0.55 Nyquist.
    for (int band = 0; band < 5; ++band)
      EXPECT_LE(r.band_error_db[band], -40.0) << "k=" << k << " band " << band;
    EXPECT_LE(r.above_db, -60.0) << "k=" << k;
  }
}

TEST(Fft, MatchesDirectDftAndParseval) {
  const auto x = white_noise(64, 4);
  std::vector<std::complex<double>> X(33);
  rfft<double>(x, X);
  const auto ref = testing::direct_dft(x);
  double err = 0, energy_t = 0, energy_f = 0;
  for (int k = 0; k < 33; ++k) {
    err = std::max(err, std::abs(X[k] - ref[k]));
    energy_f += (k == 0 || k == 32 ? 1.0 : 2.0) * std::norm(X[k]);
  }
  for (double v : x) energy_t += v * v;
  EXPECT_LT(err, 1e-10);
  EXPECT_NEAR(energy_f / 64.0, energy_t, 1e-8 * energy_t);
  std::vector<double> back(64);
  irfft<double>(X, back);
  for (int i = 0; i < 64; ++i) EXPECT_NEAR(back[i] / 64.0, x[i], 1e-12);
}

TEST(Stft, ConfigInvariants) {
  StftConfig bad{256, 300, 256};
  EXPECT_THROW(bad.validate(), ConfigError);
  EXPECT_EQ((StftConfig{1024, 256, 1024}.frames(16000)), 63);
  EXPECT_TRUE(satisfies_cola({1024, 256, 1024}));
  EXPECT_TRUE(satisfies_cola({320, 80, 320}));
  EXPECT_TRUE(satisfies_cola({512, 256, 512, WindowKind::kSqrtHann}));
  EXPECT_FALSE(satisfies_cola({512, 256, 512}));
  EXPECT_THROW(istft(stft(Waveform(white_noise(4000, 5), 16000), {512, 256, 512}),
                     {512, 256, 512}, 4000),
               DspError);
}

TEST(Stft, ZeroSignalAndZeroSpectrum) {
  StftConfig cfg;
  auto s = stft(Waveform(std::vector<double>(5000, 0.0), 16000), cfg);
  ASSERT_EQ(s.data.shape(), (Shape{513, 1 + 5000 / 256}));
  for (int64_t k = 0; k < s.data.numel(); ++k) EXPECT_EQ(s.data.flat(k), std::complex<double>(0));
  auto y = istft(s, cfg, 5000);
  for (double v : y.samples()) EXPECT_EQ(v, 0.0);
}

TEST(Stft, ImpulseAtFrameCentre) {
  StftConfig cfg{512, 128, 512};
  std::vector<double> x(4096, 0.0);
  const int t = 10;
  x[t * cfg.hop] = 1.0;  // frame t is centred on sample t*hop
  auto s = stft(Waveform(x, 16000), cfg);
  const double wc = make_window(WindowKind::kHann, 512)[256];
  for (int k = 0; k < cfg.bins(); ++k) EXPECT_NEAR(std::abs(s.data.at({k, t})), wc, 1e-10);
}

TEST(Stft, MatchesDirectDftOfWindowedFrame) {
  StftConfig cfg{256, 64, 200};
  const auto x = white_noise(3000, 6);
  auto s = stft(Waveform(x, 16000), cfg);
  const int t = 7;
  const auto w = padded_window(cfg);
  std::vector<double> frame(256);
  for (int n = 0; n < 256; ++n) {
    const int64_t j = t * 64 + n - 128;
    frame[n] = x[j < 0 ? -j : j] * w[n];
  }
  const auto ref = testing::direct_dft(frame);
  for (int k = 0; k < cfg.bins(); ++k) EXPECT_LT(std::abs(s.data.at({k, t}) - ref[k]), 1e-10);
}

TEST(Stft, ToneLeakageBelowSidelobe) {
  StftConfig cfg{512, 128, 512};
  const int bin = 40;
  auto s = stft(Waveform(tone(bin * 16000.0 / 512, 16000, 8000), 16000), cfg);
  const int t = 20;
  const double peak = std::abs(s.data.at({bin, t}));
  for (int k = 0; k < cfg.bins(); ++k) {
    if (std::abs(k - bin) < 2) continue;
    EXPECT_LE(20 * std::log10(std::abs(s.data.at({k, t})) / peak + 1e-300), -31.0) << k;
  }
}

TEST(Stft, PerfectReconstruction) {
  StftConfig cfg{1024, 256, 1024};
  const auto x = white_noise(16000, 7);
  auto y = istft(stft(Waveform(x, 16000), cfg), cfg, 16000);
  double err = 0;
  for (size_t i = 0; i < x.size(); ++i) err = std::max(err, std::abs(y[i] - x[i]));
  EXPECT_LT(err, 1e-10);
  auto xf = ComplexTensor<float>::from_real({1, 16000}, std::vector<float>(x.begin(), x.end()));
  auto yf = istft(stft(xf, cfg), cfg, 16000);
  double errf = 0;
  for (size_t i = 0; i < x.size(); ++i) errf = std::max(errf, std::abs(double(yf.real()[i]) - x[i]));
  EXPECT_LT(errf, 1e-6);
}

TEST(Stft, NonCentredSynthesisNeedsEnvelope) {
  StftConfig cfg{320, 80, 320, WindowKind::kHann, false};
  const auto x = white_noise(3200, 8);
  auto spec = stft(Waveform(x, 16000), cfg);
  EXPECT_EQ(spec.data.shape()[1], 1 + (3200 - 320) / 80);
  // The periodic window is zero at sample 0, so the first output sample is
  // not recoverable.
  EXPECT_THROW(istft(spec, cfg, 3200), DspError);
}

TEST(Stft, GradientsMatchFiniteDifferences) {
  Rng rng(9);
  StftConfig cfg{16, 4, 12};
  auto x = testing::leaf({2, 40}, rng);
  {
    NoGradGuard g;
    x.node().im.assign(80, 0.0);
  }
  auto r = testing::T64::uniform({2, 9, 11}, rng);
  ParameterList<double> ps{{"x", x}};
  auto res = grad_check<double>([&] { return testing::project(stft(x, cfg), r); }, ps, {1e-3});
  EXPECT_LT(res.max_rel_error, 1e-6) << res.worst_index;

  auto spec = testing::leaf({2, 9, 11}, rng);
  auto ry = testing::T64::uniform_real({2, 41}, rng);
  ParameterList<double> ps2{{"spec", spec}};
  auto res2 =
      grad_check<double>([&] { return testing::project(istft(spec, cfg, 41), ry); }, ps2, {1e-3});
  EXPECT_LT(res2.max_rel_error, 1e-6) << res2.worst_index << (res2.worst_is_imag ? " im" : " re");
}

}  // namespace
}  // namespace ctft
