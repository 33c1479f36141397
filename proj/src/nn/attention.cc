// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "ctft/nn/attention.h"

#include <cmath>
#include <string>

#include "ctft/core/ops.h"
#include "ctft/nn/init.h"

namespace ctft {

namespace {

template <typename Real>
CT<Real> maybe_dropout(const CT<Real>& x, double p, const Context& ctx) {
  if (!ctx.training() || !ctx.rng || p <= 0.0) return x;
  return dropout(x, p, *ctx.rng);
}

}  // namespace

template <typename Real>
ComplexLayerNorm<Real>::ComplexLayerNorm(int64_t dim, double eps) : eps_(eps) {
  scale = this->add_parameter("scale", ComplexTensor<Real>::full({dim}, {1, 0}));
  shift = this->add_parameter("shift", ComplexTensor<Real>::zeros({dim}));
}

template <typename Real>
ComplexTensor<Real> ComplexLayerNorm<Real>::forward(const Tensor& x) const {
  const int axis = x.rank() - 1;
  const Tensor xc = sub(x, mean(x, axis, true));
  const Tensor rms = sqrt(add_scalar(mean(abs2(xc), axis, true), {static_cast<Real>(eps_), 0}));
  return add(mul(div(xc, rms), scale), shift);
}

template <typename Real>
ComplexMhsa<Real>::ComplexMhsa(int64_t dim, int64_t heads, Rng& rng, ScoreKind score)
    : dim_(dim), heads_(heads), score_(score) {
  if (heads <= 0 || dim % heads != 0)
    throw ConfigError("attention dim " + std::to_string(dim) + " is not divisible by " +
                      std::to_string(heads) + " heads");
  q = &this->add_module("q", std::make_unique<ComplexLinear<Real>>(dim, dim, rng));
  // Under real-part scoring a key bias shifts each softmax row uniformly.
  k = &this->add_module("k", std::make_unique<ComplexLinear<Real>>(dim, dim, rng,
                                                                    score == ScoreKind::kMagnitude));
  v = &this->add_module("v", std::make_unique<ComplexLinear<Real>>(dim, dim, rng));
  o = &this->add_module("o", std::make_unique<ComplexLinear<Real>>(dim, dim, rng));
}

template <typename Real>
ComplexTensor<Real> ComplexMhsa<Real>::split_heads(const Tensor& x) const {
  const int64_t B = x.shape()[0], S = x.shape()[1];
  return permute(reshape(x, {B, S, heads_, dim_ / heads_}), {0, 2, 1, 3});
}

template <typename Real>
ComplexTensor<Real> ComplexMhsa<Real>::attend(const Tensor& x, Tensor* weights_out) const {
  if (x.rank() != 3 || x.shape()[2] != dim_)
    throw DimensionError("attention expects [B, S, " + std::to_string(dim_) + "], got " +
                         to_string(x.shape()));
  const int64_t B = x.shape()[0], S = x.shape()[1];
  const Tensor qh = split_heads(q->forward(x));
  const Tensor kh = split_heads(k->forward(x));
  const Tensor raw = matmul(qh, conj(transpose(kh, 2, 3)));
  const Tensor logits = score_ == ScoreKind::kReal ? real_part(raw) : abs(raw);
  const Real inv = static_cast<Real>(1.0 / std::sqrt(static_cast<double>(dim_ / heads_)));
  const Tensor p = softmax(scale(logits, {inv, 0}));
  if (weights_out) {
    *weights_out = p;
    return {};
  }
  const Tensor vh = split_heads(v->forward(x));
  const Tensor merged = reshape(permute(matmul(p, vh), {0, 2, 1, 3}), {B, S, dim_});
  return o->forward(merged);
}

template <typename Real>
ComplexTensor<Real> ComplexMhsa<Real>::forward(const Tensor& x) const {
  return attend(x, nullptr);
}

template <typename Real>
ComplexTensor<Real> ComplexMhsa<Real>::weights(const Tensor& x) const {
  Tensor p;
  attend(x, &p);
  return p;
}

template <typename Real>
ComplexFeedForward<Real>::ComplexFeedForward(int64_t dim, int64_t expansion, double dropout,
                                             Rng& rng)
    : dropout_(dropout) {
  in = &this->add_module("in", std::make_unique<ComplexLinear<Real>>(dim, dim * expansion, rng));
  out = &this->add_module("out", std::make_unique<ComplexLinear<Real>>(dim * expansion, dim, rng));
}

template <typename Real>
ComplexTensor<Real> ComplexFeedForward<Real>::forward(const Tensor& x, const Context& ctx) const {
  const Tensor h = maybe_dropout(crelu(in->forward(x)), dropout_, ctx);
  return maybe_dropout(out->forward(h), dropout_, ctx);
}

template <typename Real>
ComplexConvModule<Real>::ComplexConvModule(int64_t dim, int64_t kernel, double dropout, Rng& rng)
    : kernel_(kernel), dropout_(dropout) {
  if (kernel % 2 == 0) throw ConfigError("conformer kernel must be odd");
  pointwise_in = &this->add_module("pointwise_in",
                                   std::make_unique<ComplexLinear<Real>>(dim, dim, rng));
  depthwise_weight = this->add_parameter(
      "depthwise.weight", complex_glorot<Real>({dim, kernel}, kernel, kernel, rng));
  depthwise_bias = this->add_parameter("depthwise.bias", ComplexTensor<Real>::zeros({dim}));
  pointwise_out = &this->add_module("pointwise_out",
                                    std::make_unique<ComplexLinear<Real>>(dim, dim, rng));
}

template <typename Real>
ComplexTensor<Real> ComplexConvModule<Real>::forward(const Tensor& x, const Context& ctx) const {
  const Tensor h = transpose(pointwise_in->forward(x), 1, 2);  // [B, d, S]
  const Tensor d = crelu(depthwise_conv1d(h, depthwise_weight, depthwise_bias, kernel_ / 2));
  return maybe_dropout(pointwise_out->forward(transpose(d, 1, 2)), dropout_, ctx);
}

template <typename Real>
ConformerLayer<Real>::ConformerLayer(int64_t dim, const ConformerConfig& cfg, bool with_conv,
                                     Rng& rng)
    : dropout_(cfg.dropout) {
  norm_ff1 = &this->add_module("ff1_norm", std::make_unique<ComplexLayerNorm<Real>>(dim));
  ff1 = &this->add_module(
      "ff1", std::make_unique<ComplexFeedForward<Real>>(dim, cfg.ff_expansion, cfg.dropout, rng));
  norm_mhsa = &this->add_module("mhsa_norm", std::make_unique<ComplexLayerNorm<Real>>(dim));
  mhsa = &this->add_module("mhsa",
                           std::make_unique<ComplexMhsa<Real>>(dim, cfg.heads, rng, cfg.score));
  if (with_conv) {
    norm_conv = &this->add_module("conv_norm", std::make_unique<ComplexLayerNorm<Real>>(dim));
    conv = &this->add_module(
        "conv", std::make_unique<ComplexConvModule<Real>>(dim, cfg.kernel, cfg.dropout, rng));
  }
  norm_ff2 = &this->add_module("ff2_norm", std::make_unique<ComplexLayerNorm<Real>>(dim));
  ff2 = &this->add_module(
      "ff2", std::make_unique<ComplexFeedForward<Real>>(dim, cfg.ff_expansion, cfg.dropout, rng));
}

template <typename Real>
ComplexTensor<Real> ConformerLayer<Real>::forward(const Tensor& x, const Context& ctx) const {
  const std::complex<Real> half(0.5, 0);
  Tensor h = add(x, scale(ff1->forward(norm_ff1->forward(x), ctx), half));
  h = add(h, maybe_dropout(mhsa->forward(norm_mhsa->forward(h)), dropout_, ctx));
  if (conv) h = add(h, conv->forward(norm_conv->forward(h), ctx));
  return add(h, scale(ff2->forward(norm_ff2->forward(h), ctx), half));
}

template <typename Real>
Conformer<Real>::Conformer(int64_t channels, int64_t freq, const ConformerConfig& cfg,
                           bool with_conv, Rng& rng)
    : channels_(channels), freq_(freq) {
  for (int l = 0; l < cfg.layers; ++l)
    layers.push_back(&this->add_module(
        "layer" + std::to_string(l),
        std::make_unique<ConformerLayer<Real>>(channels * freq, cfg, with_conv, rng)));
}

template <typename Real>
ComplexTensor<Real> Conformer<Real>::forward(const Tensor& x, const Context& ctx) const {
  if (x.rank() != 4 || x.shape()[1] != channels_ || x.shape()[2] != freq_)
    throw DimensionError("conformer expects [B, " + std::to_string(channels_) + ", " +
                         std::to_string(freq_) + ", T], got " + to_string(x.shape()));
  const int64_t B = x.shape()[0], T = x.shape()[3];
  Tensor h = reshape(permute(x, {0, 3, 1, 2}), {B, T, channels_ * freq_});
  for (auto* layer : layers) h = layer->forward(h, ctx);
  return permute(reshape(h, {B, T, channels_, freq_}), {0, 2, 3, 1});
}

template <typename Real>
AttentionPath<Real>::AttentionPath(Axis axis, int64_t channels, int64_t freq, int64_t frames,
                                   int64_t kernel, BatchNormKind bn_kind, Rng& rng)
    : axis_(axis), channels_(channels), freq_(freq), frames_(frames) {
  if (kernel % 2 == 0) throw ConfigError("attention stage-2 kernel must be odd");
  stage1 = &this->add_module(
      "stage1", std::make_unique<ComplexConv2d<Real>>(channels, channels, Pair{3, 3}, Pair{1, 1},
                                                      Pair{1, 1}, rng, false));
  bn = &this->add_module("bn", std::make_unique<ComplexBatchNorm<Real>>(channels, bn_kind));
  // The attended axis becomes the channel axis of a 1-D conv over the other.
  const int64_t att = axis == Axis::kFrequency ? freq : frames;
  stage2 = &this->add_module(
      "stage2", std::make_unique<ComplexConv2d<Real>>(channels * att, att, Pair{1, kernel},
                                                      Pair{1, 1}, Pair{0, kernel / 2}, rng));
  fc = &this->add_module("fc", std::make_unique<ComplexLinear<Real>>(att, att, rng, false));
}

template <typename Real>
ComplexTensor<Real> AttentionPath<Real>::forward(const Tensor& e, const Context& ctx) {
  if (e.rank() != 4 || e.shape()[1] != channels_ || e.shape()[2] != freq_ ||
      e.shape()[3] != frames_)
    throw DimensionError("attention block bound to [B, " + std::to_string(channels_) + ", " +
                         std::to_string(freq_) + ", " + std::to_string(frames_) + "], got " +
                         to_string(e.shape()));
  const int64_t B = e.shape()[0], C = channels_, F = freq_, T = frames_;
  const Tensor a = crelu(bn->forward(stage1->forward(e), ctx));
  if (axis_ == Axis::kFrequency) {
    const Tensor map = reshape(stage2->forward(reshape(a, {B, C * F, 1, T})), {B, 1, F, T});
    const Tensor weighted = permute(mul(map, e), {0, 1, 3, 2});  // [B, C, T, F]
    return permute(fc->forward(weighted), {0, 1, 3, 2});
  }
  const Tensor at = permute(a, {0, 1, 3, 2});  // [B, C, T, F]
  const Tensor map = reshape(stage2->forward(reshape(at, {B, C * T, 1, F})), {B, 1, T, F});
  const Tensor weighted = permute(mul(map, permute(e, {0, 1, 3, 2})), {0, 1, 3, 2});  // [B,C,F,T]
  return fc->forward(weighted);
}

template <typename Real>
Cgab<Real>::Cgab(int64_t channels, int64_t freq, int64_t frames, CgabArrangement arrangement,
                 int64_t kernel, BatchNormKind bn_kind, Rng& rng)
    : arrangement_(arrangement) {
  using Axis = typename AttentionPath<Real>::Axis;
  freq_path = &this->add_module("freq", std::make_unique<AttentionPath<Real>>(
                                            Axis::kFrequency, channels, freq, frames, kernel,
                                            bn_kind, rng));
  time_path = &this->add_module("time", std::make_unique<AttentionPath<Real>>(
                                            Axis::kTime, channels, freq, frames, kernel, bn_kind,
                                            rng));
  fuse = &this->add_module("fuse", std::make_unique<ComplexConv2d<Real>>(
                                       2 * channels, channels, Pair{1, 1}, Pair{1, 1}, Pair{0, 0},
                                       rng, false));
  fuse_bn = &this->add_module("fuse_bn", std::make_unique<ComplexBatchNorm<Real>>(channels, bn_kind));
}

template <typename Real>
ComplexTensor<Real> Cgab<Real>::forward(const Tensor& e, const Context& ctx) {
  const Tensor f = freq_path->forward(e, ctx);
  const Tensor t = time_path->forward(arrangement_ == CgabArrangement::kSeries ? f : e, ctx);
  return crelu(fuse_bn->forward(fuse->forward(concat<Real>({f, t}, 1)), ctx));
}

template <typename Real>
Ftb<Real>::Ftb(int64_t channels, int64_t freq, int64_t frames, int64_t kernel,
               BatchNormKind bn_kind, Rng& rng) {
  using Axis = typename AttentionPath<Real>::Axis;
  freq_path = &this->add_module("freq", std::make_unique<AttentionPath<Real>>(
                                            Axis::kFrequency, channels, freq, frames, kernel,
                                            bn_kind, rng));
  out = &this->add_module("out", std::make_unique<ComplexConv2d<Real>>(
                                     channels, channels, Pair{1, 1}, Pair{1, 1}, Pair{0, 0}, rng,
                                     false));
  out_bn = &this->add_module("out_bn", std::make_unique<ComplexBatchNorm<Real>>(channels, bn_kind));
}

template <typename Real>
ComplexTensor<Real> Ftb<Real>::forward(const Tensor& e, const Context& ctx) {
  return crelu(out_bn->forward(out->forward(freq_path->forward(e, ctx)), ctx));
}

#define CTFT_INSTANTIATE_ATTENTION(R) \
  template class ComplexLayerNorm<R>; \
  template class ComplexMhsa<R>;      \
  template class ComplexFeedForward<R>; \
  template class ComplexConvModule<R>;  \
  template class ConformerLayer<R>;     \
  template class Conformer<R>;          \
  template class AttentionPath<R>;      \
  template class Cgab<R>;               \
  template class Ftb<R>;

CTFT_INSTANTIATE_ATTENTION(float)
CTFT_INSTANTIATE_ATTENTION(double)

}  // namespace ctft
