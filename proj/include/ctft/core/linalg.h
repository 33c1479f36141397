// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// Complex matrix products and convolutions. Convolutions are
// cross-correlations (no kernel flip) over [B, C, H, W] tensors, computed
// as four real GEMMs on planar data.

#pragma once

#include <array>

#include "ctft/core/tensor.h"

namespace ctft {

struct Conv2dSpec {
  std::array<int64_t, 2> stride{1, 1};
  std::array<int64_t, 2> padding{0, 0};
  // Transposed convolution only.
  std::array<int64_t, 2> output_padding{0, 0};
  // Imaginary part as Wr*Si - Wi*Sr instead of Wr*Si + Wi*Sr.
  bool flipped_sign = false;
};

// a[..., M, K] x b[..., K, N]; leading dimensions broadcast.
template <typename Real>
ComplexTensor<Real> matmul(const ComplexTensor<Real>& a, const ComplexTensor<Real>& b);

// x[..., in] * weight[out, in]^T + bias[out]. bias may be undefined.
template <typename Real>
ComplexTensor<Real> linear(const ComplexTensor<Real>& x, const ComplexTensor<Real>& weight,
                           const ComplexTensor<Real>& bias);

// input [B, C_in, H, W] or [C_in, H, W]; weight [C_out, C_in, kH, kW];
// bias [C_out] or undefined.
template <typename Real>
ComplexTensor<Real> conv2d(const ComplexTensor<Real>& input, const ComplexTensor<Real>& weight,
                           const ComplexTensor<Real>& bias, const Conv2dSpec& spec = {});

// input [B, C_in, H, W]; weight [C_in, C_out, kH, kW]. Output extent is
// (H - 1) * stride - 2 * padding + k + output_padding per axis.
template <typename Real>
ComplexTensor<Real> conv_transpose2d(const ComplexTensor<Real>& input,
                                     const ComplexTensor<Real>& weight,
                                     const ComplexTensor<Real>& bias,
                                     const Conv2dSpec& spec = {});

// Per-channel 1-D convolution: input [B, C, L], weight [C, k], bias [C];
// zero padding of `padding` samples on both sides.
template <typename Real>
ComplexTensor<Real> depthwise_conv1d(const ComplexTensor<Real>& input,
                                     const ComplexTensor<Real>& weight,
                                     const ComplexTensor<Real>& bias, int64_t padding);

int64_t conv_output_size(int64_t in, int64_t kernel, int64_t stride, int64_t padding);

}  // namespace ctft
