// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <gtest/gtest.h>

#include <cmath>

#include "ctft/dsp/stft.h"
#include "ctft/objectives/losses.h"
#include "test_util.h"

namespace ctft {
namespace {

using testing::T64;

std::vector<double> noise(size_t n, Rng& rng, double amp = 0.5) {
  std::vector<double> x(n);
  for (auto& v : x) v = rng.uniform(-amp, amp);
  return x;
}

// SC and MAG on one part of two spectra, written with plain loops.
struct PartTerms {
  double sc = 0, mag = 0;
};

PartTerms part_terms(const Spectrogram& a, const Spectrogram& b, bool imag) {
  const auto pa = imag ? a.data.imag() : a.data.real();
  const auto pb = imag ? b.data.imag() : b.data.real();
  double diff = 0, ref = 0, mag = 0;
  for (size_t k = 0; k < pa.size(); ++k) {
    diff += (pa[k] - pb[k]) * (pa[k] - pb[k]);
    ref += pa[k] * pa[k];
    mag += std::abs(std::log(std::abs(pa[k]) + 1e-7) - std::log(std::abs(pb[k]) + 1e-7));
  }
  return {std::sqrt(diff) / (std::sqrt(ref) + 1e-7), mag / pa.size()};
}

double spectral_oracle(const Waveform& s, const Waveform& e, const ResolutionSet& res, bool imag) {
  double total = 0;
  for (const auto& cfg : res.configs) {
    const Spectrogram a = stft(s, cfg), b = stft(e, cfg);
    const auto re = part_terms(a, b, false);
    total += re.sc + re.mag;
    if (imag) {
      const auto im = part_terms(a, b, true);
      total += im.sc + im.mag;
    }
  }
  return total / res.configs.size();
}

double si_sdr_oracle(const std::vector<double>& s, const std::vector<double>& e) {
  const double n = s.size();
  double ms = 0, me = 0;
  for (size_t i = 0; i < s.size(); ++i) ms += s[i] / n, me += e[i] / n;
  double ss = 0, dot = 0;
  for (size_t i = 0; i < s.size(); ++i) ss += (s[i] - ms) * (s[i] - ms), dot += (s[i] - ms) * (e[i] - me);
  const double beta = dot / ss;
  double num = 0, den = 0;
  for (size_t i = 0; i < s.size(); ++i) {
    const double p = beta * (s[i] - ms), r = (e[i] - me) - p;
    num += p * p;
    den += r * r;
  }
  return std::clamp(10 * std::log10(num / (den + 1e-8)), -100.0, 100.0);
}

TEST(SpectralConvergence, HandValues) {
  const T64 x = T64::from_real({1, 2, 2}, {3, 0, 0, 4});
  EXPECT_EQ(spectral_convergence(x, x).item().real(), 0.0);
  EXPECT_NEAR(spectral_convergence(x, T64::zeros({1, 2, 2})).item().real(), 5.0 / (5.0 + 1e-7), 1e-15);
  const T64 half = T64::from_real({1, 2, 2}, {1.5, 0, 0, 2});
  EXPECT_NEAR(spectral_convergence(x, half).item().real(), 2.5 / (5.0 + 1e-7), 1e-15);
  EXPECT_THROW(spectral_convergence(x, T64::zeros({1, 4})), DimensionError);
}

TEST(SpectralConvergence, BatchAveragesExamples) {
  const T64 x = T64::from_real({2, 2}, {3, 4, 1, 0});
  const T64 y = T64::from_real({2, 2}, {0, 0, 1, 1});
  EXPECT_NEAR(spectral_convergence(x, y).item().real(), 0.5 * (5 / (5 + 1e-7) + 1 / (1 + 1e-7)), 1e-15);
}

TEST(LogMagnitude, HandValues) {
  const double e = std::exp(1.0);
  EXPECT_NEAR(log_magnitude(T64::from_real({1, 1}, {1.0}), T64::from_real({1, 1}, {e * e})).item().real(),
              2.0, 1e-6);
  Rng rng(1);
  std::vector<double> a(50), b(50);
  for (int i = 0; i < 50; ++i) {
    a[i] = rng.uniform(0.5, 2.0) * (i % 2 ? 1 : -1);
    b[i] = -e * a[i];
  }
  const T64 x = T64::from_real({1, 50}, a), y = T64::from_real({1, 50}, b);
  EXPECT_NEAR(log_magnitude(x, y).item().real(), 1.0, 1e-6);
  EXPECT_EQ(log_magnitude(x, x).item().real(), 0.0);
}

TEST(MrStft, IdentityAndNullEstimate) {
  Rng rng(2);
  const Waveform s(noise(8000, rng), 16000);
  const Waveform zero(std::vector<double>(8000, 0.0), 16000);
  EXPECT_EQ(mr_stft_loss_real(s, s), 0.0);
  EXPECT_EQ(mr_stft_loss_complex(s, s), 0.0);
  EXPECT_EQ(sr_stft_loss(s, s), 0.0);
  const double null = mr_stft_loss_real(s, zero);
  EXPECT_TRUE(std::isfinite(null));
  EXPECT_GT(null, 1.0);
  EXPECT_NEAR(null, spectral_oracle(s, zero, ResolutionSet::standard(), false), 1e-10);
}

TEST(MrStft, MatchesLoopOracle) {
  Rng rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const auto a = noise(4000 + 37 * trial, rng);
    auto b = a;
    for (auto& v : b) v += rng.uniform(-0.3, 0.3);
    const Waveform s(a, 16000), e(b, 16000);
    const auto res = ResolutionSet::standard();
    EXPECT_NEAR(mr_stft_loss_real(s, e, res), spectral_oracle(s, e, res, false), 1e-10);
    EXPECT_NEAR(mr_stft_loss_complex(s, e, res), spectral_oracle(s, e, res, true), 1e-10);
    EXPECT_NEAR(sr_stft_loss(s, e), spectral_oracle(s, e, ResolutionSet::single(320, 80, 320), false),
                1e-10);
  }
}

TEST(MrStft, SingleResolutionIsSrStft) {
  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const Waveform s(noise(3000, rng), 16000), e(noise(3000, rng), 16000);
    EXPECT_NEAR(mr_stft_loss_real(s, e, ResolutionSet::single(320, 80, 320)), sr_stft_loss(s, e), 1e-12);
  }
}

TEST(MrStft, StrictlyPositiveOnDistinctPairs) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = noise(2000, rng);
    auto b = a;
    b[rng.next_u64() % 2000] += rng.uniform(0.01, 0.1);
    EXPECT_GT(sr_stft_loss(Waveform(a, 16000), Waveform(b, 16000)), 0.0);
  }
}

TEST(MrStft, ComplexDominatesReal) {
  Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const Waveform s(noise(1500, rng), 16000), e(noise(1500, rng, rng.uniform(0.01, 1.0)), 16000);
    EXPECT_GE(mr_stft_loss_complex(s, e), mr_stft_loss_real(s, e));
  }
}

TEST(MrStft, QuarterPeriodShiftVisibleToComplexLoss) {
  const int rate = 16000, n = 4096;
  const double f = 32.0 * rate / 512.0;
  std::vector<double> c(n), q(n);
  for (int i = 0; i < n; ++i) {
    c[i] = std::cos(2 * M_PI * f * i / rate);
    q[i] = std::sin(2 * M_PI * f * i / rate);
  }
  const Waveform s(c, rate), e(q, rate);
  const StftConfig cfg{512, 256, 512, WindowKind::kHann, true};
  const Spectrogram a = stft(s, cfg), b = stft(e, cfg);
  const int64_t T = a.data.shape()[1];
  for (int64_t t = 2; t < T - 2; ++t) {
    const int64_t k = 32 * T + t;
    EXPECT_NEAR(std::hypot(a.data.real()[k], a.data.imag()[k]),
                std::hypot(b.data.real()[k], b.data.imag()[k]), 1e-9);
  }
  EXPECT_GT(mr_stft_loss_complex(s, e, ResolutionSet::single(512, 256, 512)), 0.5);
}

TEST(SiSdr, HandConstruction) {
  // Zero-mean target; estimate adds an orthogonal zero-mean part of equal power.
  const Waveform s({1, -1, 0, 0}, 8000), e({1, -1, 1, -1}, 8000);
  EXPECT_NEAR(si_sdr_loss(s, e), 0.0, 1e-7);
  EXPECT_NEAR(si_sdr_loss(s, e), -10 * std::log10(2 / (2 + 1e-8)), 1e-15);
}

TEST(SiSdr, CapAndEnergyDependence) {
  Rng rng(7);
  const auto a = noise(48000, rng);
  EXPECT_EQ(si_sdr_loss(Waveform(a, 48000), Waveform(a, 48000)), -100.0);
  // Below ||s||^2 = 100 the epsilon bounds the identity value under the cap.
  std::vector<double> quiet = a;
  for (auto& v : quiet) v *= 1e-3;
  double energy = 0, m = 0;
  for (double v : quiet) m += v / quiet.size();
  for (double v : quiet) energy += (v - m) * (v - m);
  EXPECT_NEAR(si_sdr_loss(Waveform(quiet, 48000), Waveform(quiet, 48000)),
              -10 * std::log10(energy / 1e-8), 1e-9);
  EXPECT_EQ(si_sdr_loss(Waveform(a, 48000), Waveform(std::vector<double>(48000, 0.25), 48000)), 100.0);
}

TEST(SiSdr, ScaleInvariance) {
  Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const auto a = noise(48000, rng, 1.0);
    auto b = a;
    for (auto& v : b) v += rng.uniform(-1.0, 1.0);
    const double base = si_sdr_loss(Waveform(a, 48000), Waveform(b, 48000));
    EXPECT_NEAR(base, -si_sdr_oracle(a, b), 1e-10);
    for (double alpha : {0.1, 1.0, 10.0, -3.0}) {
      auto scaled = b;
      for (auto& v : scaled) v *= alpha;
      EXPECT_NEAR(si_sdr_loss(Waveform(a, 48000), Waveform(scaled, 48000)), base, 1e-9);
    }
  }
}

TEST(SiSdr, EpsilonBreaksInvarianceOnlyAtLowResidualEnergy) {
  // Scaling the estimate by alpha scales the residual energy by alpha^2 but
  // not the epsilon beside it.
  Rng rng(12);
  const auto a = noise(2000, rng, 0.01);
  auto b = a;
  for (auto& v : b) v += rng.uniform(-0.01, 0.01);
  for (double alpha : {0.1, 10.0}) {
    auto scaled = b;
    for (auto& v : scaled) v *= alpha;
    const double got = si_sdr_loss(Waveform(a, 16000), Waveform(scaled, 16000));
    EXPECT_NEAR(got, -si_sdr_oracle(a, scaled), 1e-10);
  }
  auto small = b;
  for (auto& v : small) v *= 0.1;
  EXPECT_GT(std::abs(si_sdr_loss(Waveform(a, 16000), Waveform(small, 16000)) -
                     si_sdr_loss(Waveform(a, 16000), Waveform(b, 16000))),
            1e-7);
}

TEST(SiSdr, Errors) {
  EXPECT_THROW(si_sdr_loss(Waveform(std::vector<double>(10, 0.0), 16000),
                           Waveform(std::vector<double>(10, 1.0), 16000)),
               DomainError);
  EXPECT_THROW(si_sdr_loss(Waveform(std::vector<double>(10, 0.3), 16000),
                           Waveform(std::vector<double>(10, 1.0), 16000)),
               DomainError);
  EXPECT_THROW(si_sdr_loss(Waveform({1, 2, 3}, 16000), Waveform({1, 2}, 16000)), DimensionError);
  EXPECT_THROW(si_sdr_loss(Waveform({1, 2, 3}, 16000), Waveform({1, 2, 3}, 8000)), DomainError);
}

TEST(SiSdr, BatchAveragesExamples) {
  Rng rng(9);
  const auto a = noise(700, rng), b = noise(700, rng), c = noise(700, rng), d = noise(700, rng);
  std::vector<double> ab(a), cd(c);
  ab.insert(ab.end(), b.begin(), b.end());
  cd.insert(cd.end(), d.begin(), d.end());
  const double batched = si_sdr_loss(T64::from_real({2, 700}, ab), T64::from_real({2, 700}, cd)).item().real();
  EXPECT_NEAR(batched, -0.5 * (si_sdr_oracle(a, c) + si_sdr_oracle(b, d)), 1e-10);
}

TEST(TotalLoss, Composition) {
  Rng rng(10);
  const auto a = noise(48000, rng);
  const Waveform s(a, 48000);
  LossConfig cfg;
  EXPECT_EQ(total_loss(s, s, cfg).total, -100.0);
  cfg.use_si_sdr = false;
  EXPECT_EQ(total_loss(s, s, cfg).total, 0.0);

  auto b = a;
  for (auto& v : b) v += rng.uniform(-0.2, 0.2);
  const Waveform e(b, 48000);
  for (auto kind : {SpectralLoss::kMrStftReal, SpectralLoss::kMrStftComplex, SpectralLoss::kSrStft}) {
    for (bool si : {true, false}) {
      LossConfig c;
      c.spectral = kind;
      c.use_si_sdr = si;
      const LossReport r = total_loss(s, e, c);
      const auto& m = r.components;
      const size_t S = kind == SpectralLoss::kSrStft ? 1 : 3;
      double spectral = 0;
      for (size_t k = 0; k < S; ++k) {
        const std::string tag = "/" + std::to_string(k);
        spectral += m.at("sc_re" + tag) + m.at("mag_re" + tag);
        if (kind == SpectralLoss::kMrStftComplex) spectral += m.at("sc_im" + tag) + m.at("mag_im" + tag);
      }
      spectral /= S;
      EXPECT_NEAR(m.at("spectral"), spectral, 1e-9);
      EXPECT_NEAR(r.total, spectral + (si ? m.at("si_sdr") : 0.0), 1e-9);
      EXPECT_EQ(m.count("si_sdr"), si ? 1u : 0u);
      EXPECT_EQ(m.count("sc_im/0"), kind == SpectralLoss::kMrStftComplex ? 1u : 0u);
    }
  }
  LossConfig sr;
  sr.spectral = SpectralLoss::kSrStft;
  sr.use_si_sdr = false;
  EXPECT_NEAR(total_loss(s, e, sr).total, sr_stft_loss(s, e), 1e-12);
}

TEST(TotalLoss, RecordFormat) {
  LossReport r;
  r.total = 1.5;
  r.components = {{"si_sdr", -2.0}, {"spectral", 3.5}};
  EXPECT_EQ(r.to_record(), "total=1.5 si_sdr=-2 spectral=3.5");
}

// Each loss through a small learnable spectral filter.
class LossGradients : public ::testing::TestWithParam<int> {};

TEST_P(LossGradients, ThroughSpectralFilter) {
  Rng rng(11 + GetParam());
  const StftConfig cfg{64, 16, 64, WindowKind::kHann, true};
  const int64_t B = 2, L = 1200;
  const T64 x = T64::uniform_real({B, L}, rng, -0.5, 0.5);
  const T64 target = T64::uniform_real({B, L}, rng, -0.5, 0.5);
  T64 gain = T64::uniform({1, 33, 1}, rng, 0.5, 1.5);
  gain.set_requires_grad(true);
  auto estimate = [&] { return real_part(istft(mul(stft(x, cfg), gain), cfg, L)); };
  // Centre padding makes the first frame symmetric, so its imaginary parts
  // are zero up to round-off that log(|.| + eps) amplifies beyond what a
  // finite difference can resolve.
  ResolutionSet uncentred = ResolutionSet::standard();
  for (auto& c : uncentred.configs) c.center = false;
  std::function<T64()> loss;
  switch (GetParam()) {
    case 0: loss = [&] { return spectral_convergence(stft(target, cfg), stft(estimate(), cfg)); }; break;
    case 1: loss = [&] { return log_magnitude(real_part(stft(target, cfg)), real_part(stft(estimate(), cfg))); }; break;
    case 2: loss = [&] { return mr_stft_loss_real(target, estimate(), ResolutionSet::standard()); }; break;
    case 3: loss = [&] { return mr_stft_loss_complex(target, estimate(), uncentred); }; break;
    case 4: loss = [&] { return sr_stft_loss(target, estimate()); }; break;
    case 5: loss = [&] { return si_sdr_loss(target, estimate()); }; break;
    default: loss = [&] { return total_loss(target, estimate(), LossConfig{}).total; }; break;
  }
  // Near-zero spectral entries put large curvature into the log terms.
  const double step = GetParam() == 0 || GetParam() == 4 || GetParam() == 5 ? 1e-6 : 1e-7;
  const auto r = grad_check<double>(loss, {{"gain", gain}}, {step, 0, 1});
  EXPECT_LT(r.max_rel_error, 1e-5) << r.worst_param << "[" << r.worst_index << "] "
                                   << r.worst_analytic << " vs " << r.worst_numeric;
  EXPECT_EQ(r.checked, 66);
}

INSTANTIATE_TEST_SUITE_P(AllLosses, LossGradients, ::testing::Range(0, 7));

}  // namespace
}  // namespace ctft
