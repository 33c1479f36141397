// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// Complex convolution, linear and batch-norm layers, and the encoder,
// decoder and skip blocks built from them.

#pragma once

#include <array>

#include "ctft/core/linalg.h"
#include "ctft/nn/module.h"

namespace ctft {

using Pair = std::array<int64_t, 2>;

enum class BatchNormKind { kWhitened, kNaive };

template <typename Real>
class ComplexConv2d : public Module<Real> {
 public:
  using Tensor = ComplexTensor<Real>;
  ComplexConv2d(int64_t in, int64_t out, Pair kernel, Pair stride, Pair padding, Rng& rng,
                bool with_bias = true, bool flipped_sign = false);
  Tensor forward(const Tensor& x) const;

  Tensor weight;  // [out, in, kH, kW]
  Tensor bias;    // [out] or undefined
  Conv2dSpec spec;
};

template <typename Real>
class ComplexConvTranspose2d : public Module<Real> {
 public:
  using Tensor = ComplexTensor<Real>;
  ComplexConvTranspose2d(int64_t in, int64_t out, Pair kernel, Pair stride, Pair padding,
                         Pair output_padding, Rng& rng, bool with_bias = true,
                         bool flipped_sign = false);
  Tensor forward(const Tensor& x) const;

  Tensor weight;  // [in, out, kH, kW]
  Tensor bias;    // [out] or undefined
  Conv2dSpec spec;
};

template <typename Real>
class ComplexLinear : public Module<Real> {
 public:
  using Tensor = ComplexTensor<Real>;
  ComplexLinear(int64_t in, int64_t out, Rng& rng, bool with_bias = true);
  Tensor forward(const Tensor& x) const;

  Tensor weight;  // [out, in]
  Tensor bias;    // [out] or undefined
};

// Batch norm over every axis but 1. The whitened variant decorrelates
// (re, im) with the inverse square root of their 2x2 covariance and applies
// a symmetric 2x2 scale Gamma; the naive variant normalizes each part alone.
template <typename Real>
class ComplexBatchNorm : public Module<Real> {
 public:
  using Tensor = ComplexTensor<Real>;
  ComplexBatchNorm(int64_t channels, BatchNormKind kind = BatchNormKind::kWhitened,
                   double momentum = 0.1, double eps = 1e-5);
  Tensor forward(const Tensor& x, const Context& ctx);

  int64_t channels() const { return channels_; }
  BatchNormKind kind() const { return kind_; }
  double eps() const { return eps_; }

  Tensor gamma_rr, gamma_ii, gamma_ri;  // real [C]; gamma_ri absent for kNaive
  Tensor beta;                          // complex [C]
  Tensor running_mean;                  // complex [C]
  Tensor running_rr, running_ii, running_ri;

 private:
  Tensor train_forward(const Tensor& x);
  Tensor eval_forward(const Tensor& x) const;

  int64_t channels_;
  BatchNormKind kind_;
  double momentum_, eps_;
};

// Convolutions feeding a batch norm carry no bias: the norm removes it.
template <typename Real>
class EncoderBlock : public Module<Real> {
 public:
  using Tensor = ComplexTensor<Real>;
  EncoderBlock(int64_t in, int64_t out, Pair kernel, Pair stride, Pair padding,
               BatchNormKind bn, Rng& rng, bool flipped_sign = false);
  // CReLU(BN(Conv(x))).
  Tensor forward(const Tensor& x, const Context& ctx);

  ComplexConv2d<Real>* conv;
  ComplexBatchNorm<Real>* bn;
};

// Concatenates [x, skip] on channels, then transposed conv. Hidden levels
// add BN and CReLU; the output level is linear.
template <typename Real>
class DecoderBlock : public Module<Real> {
 public:
  using Tensor = ComplexTensor<Real>;
  DecoderBlock(int64_t in, int64_t skip, int64_t out, Pair kernel, Pair stride, Pair padding,
               bool output_level, BatchNormKind bn, Rng& rng, bool flipped_sign = false);
  Tensor forward(const Tensor& x, const Tensor& skip, const Context& ctx);

  ComplexConvTranspose2d<Real>* conv;
  ComplexBatchNorm<Real>* bn = nullptr;

 private:
  int64_t skip_channels_;
};

template <typename Real>
class SkipBlock : public Module<Real> {
 public:
  using Tensor = ComplexTensor<Real>;
  SkipBlock(int64_t channels, BatchNormKind bn, Rng& rng, bool flipped_sign = false);
  // CReLU(BN(1x1 Conv(e))).
  Tensor forward(const Tensor& e, const Context& ctx);

  ComplexConv2d<Real>* conv;
  ComplexBatchNorm<Real>* bn;
};

}  // namespace ctft
