// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "ctft/model/ctftnet.h"

#include <algorithm>
#include <string>

#include "ctft/core/ops.h"
#include "ctft/core/recompute.h"

namespace ctft {

template <typename Real>
CtftNet<Real>::CtftNet(const ModelConfig& cfg) : cfg_(cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const auto& ch = cfg.channels;
  for (int l = 1; l <= kLevels; ++l) {
    const std::string n = std::to_string(l);
    const int64_t in = l == 1 ? 1 : ch[l - 2];
    encoders[l - 1] = &this->add_module(
        "enc" + n, std::make_unique<EncoderBlock<Real>>(in, ch[l - 1], cfg.kernel,
                                                        cfg.strides[l - 1], cfg.padding, cfg.bn,
                                                        rng, cfg.flipped_sign));
    if (!cfg.has_attention(l)) continue;
    const Pair s = cfg.level_shape(l);
    if (cfg.attention == AttentionVariant::kFtbOnly) {
      ftbs[l] = &this->add_module("ftb" + n, std::make_unique<Ftb<Real>>(
                                                 ch[l - 1], s[0], s[1], cfg.attention_kernel,
                                                 cfg.bn, rng));
    } else {
      const auto arr = cfg.attention == AttentionVariant::kCgabSeries ? CgabArrangement::kSeries
                                                                       : CgabArrangement::kParallel;
      cgabs[l] = &this->add_module("cgab" + n, std::make_unique<Cgab<Real>>(
                                                   ch[l - 1], s[0], s[1], arr,
                                                   cfg.attention_kernel, cfg.bn, rng));
    }
  }
  if (cfg.bottleneck != BottleneckKind::kIdentity) {
    const bool conv = cfg.bottleneck == BottleneckKind::kConformer;
    bottleneck = &this->add_module(
        conv ? "conformer" : "transformer",
        std::make_unique<Conformer<Real>>(ch[kLevels - 1], cfg.level_shape(kLevels)[0],
                                          cfg.conformer, conv, rng));
  }
  for (int l = 1; l <= kLevels; ++l)
    skips[l - 1] = &this->add_module(
        "skip" + std::to_string(l),
        std::make_unique<SkipBlock<Real>>(ch[l - 1], cfg.bn, rng, cfg.flipped_sign));
  for (int l = kLevels; l >= 1; --l) {
    const int64_t out = l == 1 ? 1 : ch[l - 2];
    decoders[l - 1] = &this->add_module(
        "dec" + std::to_string(l),
        std::make_unique<DecoderBlock<Real>>(ch[l - 1], ch[l - 1], out, cfg.kernel,
                                             cfg.strides[l - 1], cfg.padding, l == 1, cfg.bn, rng,
                                             cfg.flipped_sign));
  }
}

template <typename Real>
ComplexTensor<Real> CtftNet<Real>::forward(const Tensor& spec, const Context& ctx) {
  const auto& s = spec.shape();
  if (s.size() != 4 || s[1] != 1 || s[2] != cfg_.bins())
    throw DimensionError("network expects [B, 1, " + std::to_string(cfg_.bins()) +
                         ", T], got " + to_string(s));
  const bool bound = !cgabs.empty() || !ftbs.empty();
  if (bound ? s[3] != cfg_.bound_frames() : s[3] % cfg_.time_reduction() != 0)
    throw DimensionError("network frame count " + std::to_string(s[3]) + " must be " +
                         (bound ? "exactly " + std::to_string(cfg_.bound_frames())
                                : "a multiple of " + std::to_string(cfg_.time_reduction())));
  std::array<Tensor, kLevels> e;
  Tensor h = spec;
  for (int l = 1; l <= kLevels; ++l) {
    EncoderBlock<Real>* enc = encoders[l - 1];
    h = recompute_encoders
            ? recompute<Real>([enc, ctx](const Tensor& x) { return enc->forward(x, ctx); }, h,
                              enc->buffers())
            : enc->forward(h, ctx);
    if (auto it = cgabs.find(l); it != cgabs.end()) h = it->second->forward(h, ctx);
    if (auto it = ftbs.find(l); it != ftbs.end()) h = it->second->forward(h, ctx);
    e[l - 1] = h;
  }
  if (bottleneck) h = bottleneck->forward(h, ctx);
  for (int l = kLevels; l >= 1; --l)
    h = decoders[l - 1]->forward(h, skips[l - 1]->forward(e[l - 1], ctx), ctx);
  return h;
}

template <typename Real>
Spectrogram enhance_spectrum(CtftNet<Real>& net, const Spectrogram& input,
                             const EnhanceOptions& opts) {
  const ModelConfig& cfg = net.config();
  if (!(input.config == cfg.stft)) throw ConfigError("spectrogram STFT config differs from the model");
  const int64_t F = cfg.bins(), T = input.data.shape()[1], bound = cfg.bound_frames();
  if (input.data.shape()[0] != F + 1)
    throw DimensionError("expected " + std::to_string(F + 1) + " bins, got " +
                         std::to_string(input.data.shape()[0]));
  if (T > bound)
    throw DimensionError(std::to_string(T) + " frames exceed the model bound " +
                         std::to_string(bound));
  NoGradGuard guard;
  ComplexTensor<Real> x(Shape{1, 1, F, T});
  for (int64_t k = 0; k < F * T; ++k) {
    x.mutable_real()[k] = static_cast<Real>(input.data.real()[k]);
    x.mutable_imag()[k] = static_cast<Real>(input.data.imag()[k]);
  }
  if (T < bound) x = T >= 2 ? pad_reflect(x, 3, 0, bound - T) : pad_zero(x, 3, 0, bound - T);
  ComplexTensor<Real> y = net.forward(x, {Mode::kEval});

  Spectrogram out{ComplexTensor<double>(Shape{F + 1, T}), cfg.stft, input.origin_rate};
  for (int64_t k = 0; k < F; ++k)
    for (int64_t t = 0; t < T; ++t) {
      out.data.mutable_real()[k * T + t] = y.real()[k * bound + t];
      out.data.mutable_imag()[k * T + t] = y.imag()[k * bound + t];
    }
  if (opts.post_process) {
    if (opts.lr_rate <= 0 || opts.lr_rate > cfg.sample_rate)
      throw ConfigError("post-processing needs 0 < lr_rate <= sample_rate");
    const double cut = opts.lr_rate / 2.0;
    for (int64_t k = 0; k <= F && k * double(cfg.sample_rate) / cfg.stft.n_fft < cut; ++k)
      for (int64_t t = 0; t < T; ++t) {
        out.data.mutable_real()[k * T + t] = input.data.real()[k * T + t];
        out.data.mutable_imag()[k * T + t] = input.data.imag()[k * T + t];
      }
  }
  return out;
}

template <typename Real>
Waveform enhance(CtftNet<Real>& net, const Waveform& wave, const EnhanceOptions& opts) {
  const ModelConfig& cfg = net.config();
  if (wave.rate() != cfg.sample_rate)
    throw ConfigError("input rate " + std::to_string(wave.rate()) + " Hz differs from the model rate " +
                      std::to_string(cfg.sample_rate) + " Hz");
  auto run = [&](const std::vector<double>& chunk) {
    Waveform w(chunk, wave.rate());
    const Spectrogram y = enhance_spectrum(net, stft(w, cfg.stft), opts);
    return istft(y, cfg.stft, static_cast<int64_t>(chunk.size())).samples();
  };
  const auto& x = wave.samples();
  const int64_t L = static_cast<int64_t>(x.size()), seg = cfg.clip_samples();
  if (L <= seg) return Waveform(run(x), wave.rate());

  const int64_t fade = std::clamp<int64_t>(
      static_cast<int64_t>(std::llround(opts.crossfade_seconds * wave.rate())), 1, seg / 2);
  std::vector<int64_t> starts;
  for (int64_t s = 0; s + seg < L; s += seg - fade) starts.push_back(s);
  starts.push_back(L - seg);
  std::vector<double> acc(L, 0.0), weight(L, 0.0);
  for (size_t i = 0; i < starts.size(); ++i) {
    const int64_t s0 = starts[i];
    const auto y = run(std::vector<double>(x.begin() + s0, x.begin() + s0 + seg));
    for (int64_t n = 0; n < seg; ++n) {
      double w = 1.0;
      if (i > 0 && n < fade) w = (n + 0.5) / fade;
      if (i + 1 < starts.size() && n >= seg - fade) w = std::min(w, (seg - n - 0.5) / fade);
      acc[s0 + n] += w * y[n];
      weight[s0 + n] += w;
    }
  }
  for (int64_t n = 0; n < L; ++n) acc[n] /= weight[n];
  return Waveform(std::move(acc), wave.rate());
}

template class CtftNet<float>;
template class CtftNet<double>;
template Spectrogram enhance_spectrum(CtftNet<float>&, const Spectrogram&, const EnhanceOptions&);
template Spectrogram enhance_spectrum(CtftNet<double>&, const Spectrogram&, const EnhanceOptions&);
template Waveform enhance(CtftNet<float>&, const Waveform&, const EnhanceOptions&);
template Waveform enhance(CtftNet<double>&, const Waveform&, const EnhanceOptions&);

}  // namespace ctft
