// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// Complex global attention blocks over the frequency and time axes of a
// [B, C, F, T] spectrogram, and the conformer bottleneck.

#pragma once

#include "ctft/nn/layers.h"

namespace ctft {

// Attention logits: Re(q k^H) or |q k^H|, scaled by 1/sqrt(head_dim).
enum class ScoreKind { kReal, kMagnitude };

enum class CgabArrangement { kParallel, kSeries };

// Per-token normalisation of the complex feature vector: centred by the
// complex mean and scaled by the RMS modulus, then a complex scale/shift.
template <typename Real>
class ComplexLayerNorm : public Module<Real> {
 public:
  using Tensor = ComplexTensor<Real>;
  explicit ComplexLayerNorm(int64_t dim, double eps = 1e-5);
  Tensor forward(const Tensor& x) const;

  Tensor scale, shift;

 private:
  double eps_;
};

template <typename Real>
class ComplexMhsa : public Module<Real> {
 public:
  using Tensor = ComplexTensor<Real>;
  ComplexMhsa(int64_t dim, int64_t heads, Rng& rng, ScoreKind score = ScoreKind::kReal);
  // x [B, S, d] -> [B, S, d].
  Tensor forward(const Tensor& x) const;
  // Row-softmax attention weights [B, h, S, S] (real).
  Tensor weights(const Tensor& x) const;

  ComplexLinear<Real> *q, *k, *v, *o;
  int64_t heads() const { return heads_; }

 private:
  Tensor split_heads(const Tensor& x) const;
  Tensor attend(const Tensor& x, Tensor* weights_out) const;

  int64_t dim_, heads_;
  ScoreKind score_;
};

template <typename Real>
class ComplexFeedForward : public Module<Real> {
 public:
  using Tensor = ComplexTensor<Real>;
  ComplexFeedForward(int64_t dim, int64_t expansion, double dropout, Rng& rng);
  Tensor forward(const Tensor& x, const Context& ctx) const;

  ComplexLinear<Real> *in, *out;

 private:
  double dropout_;
};

// Pointwise -> depthwise (kernel k over the sequence) -> CReLU -> pointwise.
template <typename Real>
class ComplexConvModule : public Module<Real> {
 public:
  using Tensor = ComplexTensor<Real>;
  ComplexConvModule(int64_t dim, int64_t kernel, double dropout, Rng& rng);
  Tensor forward(const Tensor& x, const Context& ctx) const;

  ComplexLinear<Real> *pointwise_in, *pointwise_out;
  Tensor depthwise_weight, depthwise_bias;

 private:
  int64_t kernel_;
  double dropout_;
};

struct ConformerConfig {
  int layers = 2;
  int heads = 4;
  int ff_expansion = 4;
  int kernel = 15;
  double dropout = 0.1;
  ScoreKind score = ScoreKind::kReal;
};

// x + FF/2 -> x + MHSA -> x + Conv -> x + FF/2, each branch pre-normalised.
// Without the conv module this is a plain transformer layer.
template <typename Real>
class ConformerLayer : public Module<Real> {
 public:
  using Tensor = ComplexTensor<Real>;
  ConformerLayer(int64_t dim, const ConformerConfig& cfg, bool with_conv, Rng& rng);
  Tensor forward(const Tensor& x, const Context& ctx) const;

  ComplexFeedForward<Real>* ff1;
  ComplexMhsa<Real>* mhsa;
  ComplexConvModule<Real>* conv = nullptr;
  ComplexFeedForward<Real>* ff2;

 private:
  ComplexLayerNorm<Real> *norm_ff1, *norm_mhsa, *norm_conv = nullptr, *norm_ff2;
  double dropout_;
};

// Sequence model over frames: [B, C, F, T] is folded to T tokens of
// dimension C*F and unfolded afterwards.
template <typename Real>
class Conformer : public Module<Real> {
 public:
  using Tensor = ComplexTensor<Real>;
  Conformer(int64_t channels, int64_t freq, const ConformerConfig& cfg, bool with_conv, Rng& rng);
  Tensor forward(const Tensor& x, const Context& ctx) const;

  std::vector<ConformerLayer<Real>*> layers;

 private:
  int64_t channels_, freq_;
};

// One CGAB path. The frequency path builds an [F, T] attention map from a
// (C*F) x T view, multiplies it into e and mixes the F axis with an F->F
// linear map; the time path is the same with F and T exchanged.
template <typename Real>
class AttentionPath : public Module<Real> {
 public:
  using Tensor = ComplexTensor<Real>;
  enum class Axis { kFrequency, kTime };
  AttentionPath(Axis axis, int64_t channels, int64_t freq, int64_t frames, int64_t kernel,
                BatchNormKind bn, Rng& rng);
  Tensor forward(const Tensor& e, const Context& ctx);

  ComplexConv2d<Real>* stage1;
  ComplexBatchNorm<Real>* bn;
  ComplexConv2d<Real>* stage2;
  ComplexLinear<Real>* fc;

 private:
  Axis axis_;
  int64_t channels_, freq_, frames_;
};

template <typename Real>
class Cgab : public Module<Real> {
 public:
  using Tensor = ComplexTensor<Real>;
  Cgab(int64_t channels, int64_t freq, int64_t frames, CgabArrangement arrangement,
       int64_t kernel, BatchNormKind bn, Rng& rng);
  Tensor forward(const Tensor& e, const Context& ctx);

  AttentionPath<Real>* freq_path;
  AttentionPath<Real>* time_path;
  ComplexConv2d<Real>* fuse;
  ComplexBatchNorm<Real>* fuse_bn;

 private:
  CgabArrangement arrangement_;
};

// Frequency path only, followed by a C->C conv/BN/CReLU.
template <typename Real>
class Ftb : public Module<Real> {
 public:
  using Tensor = ComplexTensor<Real>;
  Ftb(int64_t channels, int64_t freq, int64_t frames, int64_t kernel, BatchNormKind bn, Rng& rng);
  Tensor forward(const Tensor& e, const Context& ctx);

  AttentionPath<Real>* freq_path;
  ComplexConv2d<Real>* out;
  ComplexBatchNorm<Real>* out_bn;
};

}  // namespace ctft
