// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <gtest/gtest.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "ctft/core/random.h"
#include "ctft/data/dataset.h"
#include "ctft/data/manifest.h"
#include "ctft/data/pairs.h"
#include "ctft/data/wav.h"
#include "scratch.h"
#include "spectral.h"

namespace ctft {
namespace {

using testing::band_power;
using testing::db;
using testing::periodogram;
using testing::ScratchDir;
using testing::tone;
using testing::white_noise;

// Hand-assembled RIFF file: fmt fields, optional extra chunk before data.
std::string riff(uint16_t format, uint16_t channels, uint32_t rate, uint16_t bits, const std::string& data,
                 const std::string& extra_chunk = "") {
  std::string s;
  auto u32 = [&](uint32_t v) { for (int i = 0; i < 4; ++i) s.push_back(char(v >> (8 * i))); };
  auto u16 = [&](uint16_t v) { for (int i = 0; i < 2; ++i) s.push_back(char(v >> (8 * i))); };
  s += "RIFF";
  u32(0);
  s += "WAVE";
  s += extra_chunk;
  s += "fmt ";
  u32(16);
  u16(format);
  u16(channels);
  u32(rate);
  u32(rate * channels * bits / 8);
  u16(channels * bits / 8);
  u16(bits);
  s += "data";
  u32(static_cast<uint32_t>(data.size()));
  s += data;
  const uint32_t riff_size = static_cast<uint32_t>(s.size() - 8);
  std::memcpy(&s[4], &riff_size, 4);
  return s;
}

std::string int16_bytes(const std::vector<int16_t>& v) {
  std::string s;
  for (int16_t x : v) {
    s.push_back(char(uint16_t(x) & 0xff));
    s.push_back(char(uint16_t(x) >> 8));
  }
  return s;
}

void dump(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream(p, std::ios::binary).write(bytes.data(), bytes.size());
}

TEST(Wav, Float32RoundTripIsBitExact) {
  ScratchDir dir("wav");
  Rng rng(1);
  std::vector<double> x(4801);
  for (auto& v : x) v = static_cast<float>(rng.uniform(-1.5, 1.5));
  x[0] = std::numeric_limits<float>::denorm_min();
  x[1] = -0.0;
  write_wav(dir / "a.wav", Waveform(x, 22050), WavEncoding::kFloat32);
  const auto r = read_wav_full(dir / "a.wav");
  EXPECT_EQ(r.wave.rate(), 22050);
  EXPECT_TRUE(r.info.is_float);
  ASSERT_EQ(r.wave.size(), x.size());
  for (size_t i = 0; i < x.size(); ++i)
    ASSERT_EQ(std::bit_cast<uint64_t>(r.wave[i]), std::bit_cast<uint64_t>(x[i])) << i;
}

TEST(Wav, Pcm16Normalization) {
  ScratchDir dir("wav");
  dump(dir / "p.wav", riff(1, 1, 16000, 16, int16_bytes({-32768, 32767, 0, 1, -1, 16384})));
  const Waveform w = read_wav(dir / "p.wav");
  ASSERT_EQ(w.size(), 6u);
  EXPECT_EQ(w[0], -1.0);
  EXPECT_EQ(w[1], 32767.0 / 32768.0);
  EXPECT_EQ(w[2], 0.0);
  EXPECT_EQ(w[3], 1.0 / 32768.0);
  EXPECT_EQ(w[4], -1.0 / 32768.0);
  EXPECT_EQ(w[5], 0.5);
}

TEST(Wav, Pcm16WriteRoundsAndClips) {
  ScratchDir dir("wav");
  write_wav(dir / "q.wav", Waveform({-1.0, 1.0, 2.0, -3.0, 0.25, 1.4 / 32768.0}, 8000), WavEncoding::kPcm16);
  const auto r = read_wav_full(dir / "q.wav");
  EXPECT_EQ(r.info.bits, 16);
  EXPECT_FALSE(r.info.is_float);
  const std::vector<double> want{-1.0, 32767.0 / 32768, 32767.0 / 32768, -1.0, 0.25, 1.0 / 32768};
  EXPECT_EQ(r.wave.samples(), want);
}

TEST(Wav, HeaderContract) {
  ScratchDir dir("wav");
  write_wav(dir / "s.wav", Waveform(std::vector<double>(48000, 0.1), 48000));
  const WavInfo info = read_wav_info(dir / "s.wav");
  EXPECT_EQ(info.frames, 48000);
  EXPECT_EQ(info.rate, 48000);
  EXPECT_EQ(info.channels, 1);
  const Waveform w = read_wav(dir / "s.wav");
  EXPECT_EQ(w.size(), 48000u);
  EXPECT_EQ(w.rate(), 48000);
}

TEST(Wav, MultichannelKeepsChannelZeroWithWarning) {
  ScratchDir dir("wav");
  dump(dir / "st.wav", riff(1, 2, 8000, 16, int16_bytes({100, -5, 200, -6, 300, -7})));
  const auto r = read_wav_full(dir / "st.wav");
  EXPECT_EQ(r.info.channels, 2);
  EXPECT_FALSE(r.warning.empty());
  EXPECT_EQ(r.wave.samples(), (std::vector<double>{100 / 32768.0, 200 / 32768.0, 300 / 32768.0}));
  write_wav(dir / "mono.wav", r.wave);
  EXPECT_TRUE(read_wav_full(dir / "mono.wav").warning.empty());
}

TEST(Wav, SkipsUnknownOddSizedChunks) {
  ScratchDir dir("wav");
  std::string list = "LIST";
  list += std::string("\x03\x00\x00\x00", 4);
  list += "abc";
  list.push_back('\0');
  dump(dir / "l.wav", riff(1, 1, 8000, 16, int16_bytes({16384, -16384}), list));
  EXPECT_EQ(read_wav(dir / "l.wav").samples(), (std::vector<double>{0.5, -0.5}));
}

TEST(Wav, Pcm24) {
  ScratchDir dir("wav");
  // -2^23, 2^22 as little-endian 24-bit.
  dump(dir / "t.wav", riff(1, 1, 8000, 24, std::string("\x00\x00\x80\x00\x00\x40", 6)));
  EXPECT_EQ(read_wav(dir / "t.wav").samples(), (std::vector<double>{-1.0, 0.5}));
}

TEST(Wav, Errors) {
  ScratchDir dir("wav");
  EXPECT_THROW(read_wav(dir / "missing.wav"), IoError);
  dump(dir / "short.wav", "RIFF");
  EXPECT_THROW(read_wav(dir / "short.wav"), IoError);
  dump(dir / "notwave.wav", "RIFF\x04\x00\x00\x00WAVX");
  EXPECT_THROW(read_wav(dir / "notwave.wav"), IoError);
  dump(dir / "u8.wav", riff(1, 1, 8000, 8, "\x80\x80"));
  EXPECT_THROW(read_wav(dir / "u8.wav"), IoError);
  dump(dir / "f64.wav", riff(3, 1, 8000, 64, std::string(16, '\0')));
  EXPECT_THROW(read_wav(dir / "f64.wav"), IoError);
  auto truncated = riff(1, 1, 8000, 16, int16_bytes({1, 2, 3, 4}));
  truncated.resize(truncated.size() - 3);
  dump(dir / "trunc.wav", truncated);
  EXPECT_THROW(read_wav(dir / "trunc.wav"), IoError);
  dump(dir / "empty.wav", riff(1, 1, 8000, 16, ""));
  EXPECT_THROW(read_wav(dir / "empty.wav"), IoError);
}

TEST(StandardizeLength, PadTrimIdentity) {
  Rng rng(2);
  std::vector<double> two(96000), seven(7 * 48000), four(192000);
  for (auto* v : {&two, &seven, &four})
    for (auto& s : *v) s = rng.uniform(-1, 1);
  const Waveform p = standardize_length(Waveform(two, 48000));
  ASSERT_EQ(p.size(), 192000u);
  for (size_t i = 0; i < 96000; ++i) ASSERT_EQ(p[i], two[i]);
  for (size_t i = 96000; i < 192000; ++i) ASSERT_EQ(p[i], 0.0);
  const Waveform t = standardize_length(Waveform(seven, 48000));
  EXPECT_EQ(t.samples(), std::vector<double>(seven.begin(), seven.begin() + 192000));
  EXPECT_EQ(standardize_length(Waveform(four, 48000)).samples(), four);
  EXPECT_EQ(standardize_length(Waveform(two, 16000), 1.5).size(), 24000u);
  for (const auto& v : {two, seven}) {
    const Waveform once = standardize_length(Waveform(v, 48000));
    EXPECT_EQ(standardize_length(once).samples(), once.samples());
  }
}

double rms(const std::vector<double>& x, size_t lo, size_t hi) {
  double s = 0;
  for (size_t i = lo; i < hi; ++i) s += x[i] * x[i];
  return std::sqrt(s / double(hi - lo));
}

// Zeroes every DFT bin at or above `hi` Hz.
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

TEST(Pairs, SameRateKeepsBandIntact) {
  // Content up to 0.9 Nyquist; the 0.99 Nyquist cutoff only touches the band edge.
  const auto x = brickwall(white_noise(48000, 3, 0.3), 48000, 21600);
  const auto ex = make_lr_hr_pair(Waveform(x, 48000), 48000);
  EXPECT_EQ(ex.source_lr_rate, 48000);
  std::vector<double> d(x.size());
  for (size_t i = 0; i < x.size(); ++i) d[i] = ex.lr_upsampled[i] - x[i];
  EXPECT_LT(rms(d, 0, d.size()), 0.01);
}

// Least-squares amplitude of a known-frequency sinusoid over [lo, hi).
double tone_amplitude(const std::vector<double>& y, double f, int rate, size_t lo, size_t hi) {
  double ss = 0, cc = 0, sc = 0, ys = 0, yc = 0;
  for (size_t i = lo; i < hi; ++i) {
    const double s = std::sin(2 * M_PI * f * i / rate), c = std::cos(2 * M_PI * f * i / rate);
    ss += s * s, cc += c * c, sc += s * c, ys += y[i] * s, yc += y[i] * c;
  }
  const double det = ss * cc - sc * sc;
  const double a = (ys * cc - yc * sc) / det, b = (yc * ss - ys * sc) / det;
  return std::hypot(a, b);
}

TEST(Pairs, ChainPreservesPassbandToneAndSuppressesAboveNyquist) {
  const int rate = 48000;
  for (int lr : {2000, 4000, 8000, 12000, 16000}) {
    const double f = lr / 4.0;
    const auto t = make_lr_hr_pair(Waveform(tone(f, rate, 4 * rate, 0.5), rate), lr);
    const double gain_db = 20 * std::log10(tone_amplitude(t.lr_upsampled.samples(), f, rate, rate, 3 * rate) / 0.5);
    EXPECT_LT(std::abs(gain_db), 0.5) << lr;
    const auto n = make_lr_hr_pair(Waveform(white_noise(4 * rate, lr, 0.3), rate), lr);
    const auto p = periodogram(n.lr_upsampled.samples());
    const auto ph = periodogram(n.hr.samples());
    EXPECT_LE(db(band_power(p, rate, lr / 2.0, rate) / band_power(ph, rate, lr / 2.0, rate)), -60.0) << lr;
    EXPECT_LE(db(band_power(p, rate, lr / 2.0, rate) / band_power(p, rate, 0, lr / 2.0)), -60.0) << lr;
    EXPECT_TRUE(satisfies_band_limit(n)) << lr;
  }
  const auto t = make_lr_hr_pair(Waveform(tone(500, rate, 2 * rate, 0.5), rate), 2000);
  EXPECT_LT(std::abs(20 * std::log10(tone_amplitude(t.lr_upsampled.samples(), 500, rate, 24000, 72000) / 0.5)), 0.5);
}

TEST(Pairs, AboveBandMeasureMatchesOracle) {
  const int rate = 16000;
  const auto x = white_noise(16001, 9, 0.3);
  const auto p = periodogram(x);
  EXPECT_NEAR(above_band_db(Waveform(x, rate), 3000.0),
              db(band_power(p, rate, 3000.0, rate) / band_power(p, rate, 0, 3000.0)), 1e-9);
}

TEST(Pairs, LengthsMatchForIndivisibleInput) {
  const auto ex = make_lr_hr_pair(Waveform(white_noise(1001, 4), 48000), 16000);
  EXPECT_EQ(ex.hr.size(), 1001u);
  EXPECT_EQ(ex.lr_upsampled.size(), 1001u);
  EXPECT_EQ(ex.lr_upsampled.rate(), 48000);
}

TEST(Pairs, NonIntegerFactorRejected) {
  const Waveform w(white_noise(4800, 5), 48000);
  EXPECT_THROW(make_lr_hr_pair(w, 5000), DomainError);
  EXPECT_THROW(make_lr_hr_pair(w, 7000), DomainError);
  EXPECT_THROW(make_lr_hr_pair(w, 96000), DomainError);
  EXPECT_THROW(make_lr_hr_pair(w, 0), DomainError);
}

TEST(Pairs, PipelineDigestCoversEveryField) {
  const PipelineParams base;
  std::set<std::string> seen{to_hex(base.digest())};
  auto vary = [&](auto mutate) {
    PipelineParams p;
    mutate(p);
    EXPECT_TRUE(seen.insert(to_hex(p.digest())).second) << p.canonical();
  };
  vary([](PipelineParams& p) { p.hr_rate = 16000; });
  vary([](PipelineParams& p) { p.clip_seconds = 1.0; });
  vary([](PipelineParams& p) { p.filter_order = 8; });
  vary([](PipelineParams& p) { p.cutoff_ratio = 0.98; });
  vary([](PipelineParams& p) { p.sinc.beta = 8.0; });
  vary([](PipelineParams& p) { p.sinc.zero_crossings = 32; });
  vary([](PipelineParams& p) { p.sinc.cutoff = 0.9; });
  EXPECT_EQ(to_hex(base.digest()), to_hex(PipelineParams{}.digest()));
  EXPECT_EQ(to_hex(sha256("abc")), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Pairs, PrepareTargetResamplesAndStandardizes) {
  PipelineParams p;
  p.hr_rate = 16000;
  p.clip_seconds = 1.0;
  const Waveform t = prepare_target(Waveform(tone(440, 48000, 30000, 0.5), 48000), p);
  EXPECT_EQ(t.rate(), 16000);
  EXPECT_EQ(t.size(), 16000u);
  EXPECT_LT(std::abs(20 * std::log10(tone_amplitude(t.samples(), 440, 16000, 1000, 9000) / 0.5)), 0.1);
  for (size_t i = 10000; i < 16000; ++i) ASSERT_EQ(t[i], 0.0);
}

// speaker-per-directory tree of short float WAVs.
void make_corpus(const std::filesystem::path& root, const std::vector<std::string>& speakers, int clips,
                 bool with_mic2 = true, int rate = 48000) {
  Rng rng(11);
  for (const auto& s : speakers) {
    std::filesystem::create_directories(root / s);
    for (int c = 1; c <= clips; ++c) {
      std::vector<double> x(rate / 10 + 100 * c);
      for (auto& v : x) v = rng.uniform(-0.5, 0.5);
      char stem[64];
      std::snprintf(stem, sizeof stem, "%s_%03d", s.c_str(), c);
      write_wav(root / s / (std::string(stem) + "_mic1.wav"), Waveform(x, rate));
      if (with_mic2) write_wav(root / s / (std::string(stem) + "_mic2.wav"), Waveform(x, rate));
    }
  }
}

std::string jsonl(const Manifest& m) {
  std::ostringstream os;
  m.write_jsonl(os);
  return os.str();
}

TEST(Manifest, ExclusionsAndMicFilter) {
  ScratchDir dir("corpus");
  make_corpus(dir.path(), {"p225", "p226", "p227", "p280", "p315", "p228"}, 2);
  ManifestRules rules;
  rules.test_speakers = 1;
  rules.val_speakers = 1;
  const Manifest m = build_manifest(dir.path(), rules);
  ASSERT_EQ(m.records.size(), 8u);
  std::set<std::string> ids;
  for (const auto& r : m.records) {
    EXPECT_NE(r.speaker, "p280");
    EXPECT_NE(r.speaker, "p315");
    EXPECT_EQ(r.path.filename().string().find("mic2"), std::string::npos);
    EXPECT_EQ(r.id.find("mic"), std::string::npos);
    EXPECT_EQ(r.rate, 48000);
    ids.insert(r.id);
  }
  EXPECT_TRUE(ids.count("p225_001"));
  EXPECT_NEAR(m.records[0].duration, (4800 + 100) / 48000.0, 1e-12);
  EXPECT_EQ(m.speakers(Split::kTest).size(), 1u);
  EXPECT_EQ(m.speakers(Split::kVal).size(), 1u);
  EXPECT_EQ(m.speakers(Split::kTrain).size(), 2u);
}

TEST(Manifest, UntaggedFilesAreKept) {
  ScratchDir dir("corpus");
  make_corpus(dir.path(), {"a", "b"}, 1, false);
  write_wav(dir / "a/a_extra.wav", Waveform(std::vector<double>(100, 0.0), 48000));
  ManifestRules rules;
  rules.test_speakers = 1;
  rules.val_speakers = 0;
  EXPECT_EQ(build_manifest(dir.path(), rules).records.size(), 3u);
}

TEST(Manifest, DeterministicAndSeeded) {
  ScratchDir dir("corpus");
  std::vector<std::string> spk;
  for (int i = 0; i < 20; ++i) spk.push_back("p" + std::to_string(400 + i));
  make_corpus(dir.path(), spk, 2, false, 16000);
  ManifestRules rules;
  rules.test_speakers = 4;
  rules.val_speakers = 2;
  rules.seed = 7;
  const Manifest a = build_manifest(dir.path(), rules);
  a.save(dir / "a.jsonl");
  build_manifest(dir.path(), rules).save(dir / "b.jsonl");
  std::ifstream fa(dir / "a.jsonl"), fb(dir / "b.jsonl");
  const std::string sa((std::istreambuf_iterator<char>(fa)), {}), sb((std::istreambuf_iterator<char>(fb)), {});
  EXPECT_FALSE(sa.empty());
  EXPECT_EQ(sa, sb);
  std::set<std::set<std::string>> test_sets;
  for (uint64_t seed = 0; seed < 6; ++seed) {
    rules.seed = seed;
    test_sets.insert(build_manifest(dir.path(), rules).speakers(Split::kTest));
  }
  EXPECT_GT(test_sets.size(), 1u);
  // Splits partition speakers.
  std::set<std::string> all;
  for (Split s : {Split::kTrain, Split::kVal, Split::kTest})
    for (const auto& x : a.speakers(s)) EXPECT_TRUE(all.insert(x).second);
  EXPECT_EQ(all.size(), 20u);
  const Manifest back = Manifest::load(dir / "a.jsonl");
  EXPECT_EQ(jsonl(back), sa);
}

TEST(Manifest, EightTwoSplit) {
  ScratchDir dir("corpus");
  std::vector<std::string> spk;
  for (int i = 0; i < 10; ++i) spk.push_back("s" + std::to_string(i));
  make_corpus(dir.path(), spk, 1, false, 8000);
  ManifestRules rules;
  rules.test_speakers = 2;
  rules.val_speakers = 0;
  const Manifest m = build_manifest(dir.path(), rules);
  EXPECT_EQ(m.speakers(Split::kTrain).size(), 8u);
  EXPECT_EQ(m.speakers(Split::kTest).size(), 2u);
  EXPECT_EQ(m.split(Split::kVal).size(), 0u);
}

TEST(Manifest, Errors) {
  ScratchDir dir("corpus");
  EXPECT_THROW(build_manifest(dir / "nope"), IoError);
  EXPECT_THROW(build_manifest(dir.path()), IoError);
  std::filesystem::create_directories(dir / "p280");
  make_corpus(dir.path(), {"p280"}, 1);
  EXPECT_THROW(build_manifest(dir.path()), IoError);
  make_corpus(dir.path(), {"x", "y", "z"}, 1);
  std::filesystem::copy_file(dir / "x/x_001_mic1.wav", dir / "y/x_001_mic1.wav");
  ManifestRules rules;
  rules.test_speakers = 1;
  rules.val_speakers = 0;
  EXPECT_THROW(build_manifest(dir.path(), rules), DomainError);
  std::filesystem::remove(dir / "y/x_001_mic1.wav");
  EXPECT_NO_THROW(build_manifest(dir.path(), rules));
  rules.test_speakers = 2;
  rules.val_speakers = 1;
  EXPECT_THROW(build_manifest(dir.path(), rules), DomainError);
  std::istringstream dup(
      "{\"id\":\"a\",\"path\":\"p\",\"speaker\":\"s\",\"split\":\"train\",\"duration\":1.0,\"rate\":48000}\n"
      "{\"id\":\"a\",\"path\":\"q\",\"speaker\":\"s\",\"split\":\"test\",\"duration\":1.0,\"rate\":48000}\n");
  EXPECT_THROW(Manifest::read_jsonl(dup), DomainError);
  std::istringstream bad("{\"id\":\"a\"}\n");
  EXPECT_THROW(Manifest::read_jsonl(bad), IoError);
  std::istringstream split("{\"id\":\"a\",\"path\":\"p\",\"speaker\":\"s\",\"split\":\"dev\",\"duration\":1,\"rate\":1}\n");
  EXPECT_THROW(Manifest::read_jsonl(split), ConfigError);
}

struct Fixture {
  ScratchDir dir{"batches"};
  Manifest manifest;
  PipelineParams pipeline;

  explicit Fixture(int clips) {
    std::vector<std::string> spk;
    for (int i = 0; i < clips; ++i) spk.push_back("q" + std::to_string(10 + i));
    make_corpus(dir / "corpus", spk, 1, false, 16000);
    ManifestRules rules;
    rules.test_speakers = 0;
    rules.val_speakers = 0;
    manifest = build_manifest(dir / "corpus", rules);
    pipeline.hr_rate = 16000;
    pipeline.clip_seconds = 0.25;
  }

  BatchOptions options(IterMode mode, bool cached) const {
    BatchOptions o;
    o.lr_rate = 4000;
    o.batch_size = 8;
    o.seed = 3;
    o.mode = mode;
    o.pipeline = pipeline;
    if (cached) o.cache_dir = dir / "cache";
    return o;
  }
};

TEST(BatchIterator, DropLastInTrainKeepInEval) {
  Fixture fx(17);
  const BatchIterator train(fx.manifest.records, fx.options(IterMode::kTrain, false));
  const BatchIterator eval(fx.manifest.records, fx.options(IterMode::kEval, false));
  EXPECT_EQ(train.batches_per_epoch(), 2);
  EXPECT_EQ(eval.batches_per_epoch(), 3);
  EXPECT_EQ(eval.batch_ids(0, 2).size(), 1u);
  EXPECT_THROW(train.batch_ids(0, 2), DomainError);
  std::vector<std::string> in_order;
  for (int64_t b = 0; b < 3; ++b)
    for (const auto& id : eval.batch_ids(5, b)) in_order.push_back(id);
  ASSERT_EQ(in_order.size(), 17u);
  for (size_t i = 0; i < 17; ++i) EXPECT_EQ(in_order[i], fx.manifest.records[i].id);
  const Batch b = train.batch(0, 1);
  ASSERT_EQ(b.examples.size(), 8u);
  for (const auto& ex : b.examples) {
    EXPECT_EQ(ex.hr.size(), 4000u);
    EXPECT_EQ(ex.lr_upsampled.size(), 4000u);
    EXPECT_EQ(ex.source_lr_rate, 4000);
  }
  auto bad = fx.options(IterMode::kTrain, false);
  bad.batch_size = 0;
  EXPECT_THROW(BatchIterator(fx.manifest.records, bad), ConfigError);
}

TEST(BatchIterator, SeededShufflePerEpoch) {
  Fixture fx(17);
  const BatchIterator a(fx.manifest.records, fx.options(IterMode::kTrain, false));
  const BatchIterator b(fx.manifest.records, fx.options(IterMode::kTrain, false));
  std::set<std::vector<size_t>> orders;
  for (int64_t e = 0; e < 4; ++e) {
    const auto o = a.order(e);
    EXPECT_EQ(o, b.order(e));
    auto sorted = o;
    std::sort(sorted.begin(), sorted.end());
    for (size_t i = 0; i < sorted.size(); ++i) ASSERT_EQ(sorted[i], i);
    orders.insert(o);
  }
  EXPECT_EQ(orders.size(), 4u);
  auto other = fx.options(IterMode::kTrain, false);
  other.seed = 4;
  EXPECT_NE(BatchIterator(fx.manifest.records, other).order(0), a.order(0));
}

TEST(BatchIterator, CacheMatchesOnTheFly) {
  Fixture fx(9);
  const BatchIterator fly(fx.manifest.records, fx.options(IterMode::kEval, false));
  const BatchIterator cached(fx.manifest.records, fx.options(IterMode::kEval, true));
  const Batch ref = fly.batch(0, 0);
  const Batch first = cached.batch(0, 0);
  const PairCache cache(fx.dir / "cache", fx.pipeline);
  for (const auto& id : ref.ids) EXPECT_TRUE(std::filesystem::exists(cache.entry_path(id, 4000))) << id;
  // Served from disk now, even with the sources gone.
  std::filesystem::remove_all(fx.dir / "corpus");
  EXPECT_THROW(fly.batch(0, 0), IoError);
  const Batch hit = cached.batch(0, 0);
  ASSERT_EQ(hit.ids, ref.ids);
  for (size_t i = 0; i < ref.examples.size(); ++i) {
    for (const Batch* b : {&first, &hit}) {
      const auto& e = b->examples[i];
      EXPECT_EQ(e.source_lr_rate, 4000);
      EXPECT_EQ(e.hr.rate(), 16000);
      ASSERT_EQ(e.hr.size(), ref.examples[i].hr.size());
      for (size_t n = 0; n < e.hr.size(); ++n) {
        ASSERT_NEAR(e.hr[n], ref.examples[i].hr[n], 1e-7);
        ASSERT_NEAR(e.lr_upsampled[n], ref.examples[i].lr_upsampled[n], 1e-7);
      }
    }
  }
}

TEST(BatchIterator, StaleCacheIsReported) {
  Fixture fx(9);
  const BatchIterator cached(fx.manifest.records, fx.options(IterMode::kEval, true));
  cached.batch(0, 0);
  auto changed = fx.options(IterMode::kEval, true);
  changed.pipeline.cutoff_ratio = 0.9;
  const BatchIterator stale(fx.manifest.records, changed);
  try {
    stale.batch(0, 0);
    FAIL() << "expected StaleCacheError";
  } catch (const StaleCacheError& e) {
    EXPECT_NE(std::string(e.what()).find("rebuild"), std::string::npos);
  }
  const PairCache cache(fx.dir / "cache", fx.pipeline);
  const auto id = fx.manifest.records[0].id;
  dump(cache.entry_path(id, 4000), "garbage that is long enough to read");
  EXPECT_THROW(cache.load(id, 4000), IoError);
  EXPECT_FALSE(cache.load(id, 8000).has_value());
}

TEST(BatchIterator, SpotCheckPasses) {
  Fixture fx(9);
  const BatchIterator it(fx.manifest.records, fx.options(IterMode::kTrain, false));
  EXPECT_TRUE(it.spot_check(0, 3).empty());
}

}  // namespace
}  // namespace ctft
