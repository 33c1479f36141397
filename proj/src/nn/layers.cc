// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "ctft/nn/layers.h"

#include <array>
#include <cmath>
#include <memory>
#include <string>

#include "ctft/core/ops.h"
#include "ctft/nn/init.h"

namespace ctft {

namespace {

template <typename Real>
CT<Real> constant(const Shape& shape, const std::vector<double>& values) {
  std::vector<Real> re(values.begin(), values.end());
  return CT<Real>::from_real(shape, std::move(re));
}

}  // namespace

template <typename Real>
ComplexConv2d<Real>::ComplexConv2d(int64_t in, int64_t out, Pair kernel, Pair stride,
                                   Pair padding, Rng& rng, bool with_bias,
                                   bool flipped_sign) {
  const int64_t area = kernel[0] * kernel[1];
  weight = this->add_parameter(
      "weight", complex_glorot<Real>({out, in, kernel[0], kernel[1]}, in * area, out * area, rng));
  if (with_bias) bias = this->add_parameter("bias", ComplexTensor<Real>::zeros({out}));
  spec.stride = stride;
  spec.padding = padding;
  spec.flipped_sign = flipped_sign;
}

template <typename Real>
ComplexTensor<Real> ComplexConv2d<Real>::forward(const Tensor& x) const {
  return conv2d(x, weight, bias, spec);
}

template <typename Real>
ComplexConvTranspose2d<Real>::ComplexConvTranspose2d(int64_t in, int64_t out, Pair kernel,
                                                     Pair stride, Pair padding,
                                                     Pair output_padding, Rng& rng,
                                                     bool with_bias, bool flipped_sign) {
  const int64_t area = kernel[0] * kernel[1];
  weight = this->add_parameter(
      "weight", complex_glorot<Real>({in, out, kernel[0], kernel[1]}, in * area, out * area, rng));
  if (with_bias) bias = this->add_parameter("bias", ComplexTensor<Real>::zeros({out}));
  spec.stride = stride;
  spec.padding = padding;
  spec.output_padding = output_padding;
  spec.flipped_sign = flipped_sign;
}

template <typename Real>
ComplexTensor<Real> ComplexConvTranspose2d<Real>::forward(const Tensor& x) const {
  return conv_transpose2d(x, weight, bias, spec);
}

template <typename Real>
ComplexLinear<Real>::ComplexLinear(int64_t in, int64_t out, Rng& rng, bool with_bias) {
  weight = this->add_parameter("weight", complex_glorot<Real>({out, in}, in, out, rng));
  if (with_bias) bias = this->add_parameter("bias", ComplexTensor<Real>::zeros({out}));
}

template <typename Real>
ComplexTensor<Real> ComplexLinear<Real>::forward(const Tensor& x) const {
  return linear(x, weight, bias);
}

template <typename Real>
ComplexBatchNorm<Real>::ComplexBatchNorm(int64_t channels, BatchNormKind kind, double momentum,
                                         double eps)
    : channels_(channels), kind_(kind), momentum_(momentum), eps_(eps) {
  const Shape c{channels};
  const double g = kind == BatchNormKind::kWhitened ? 1.0 / std::sqrt(2.0) : 1.0;
  gamma_rr = this->add_parameter("gamma_rr", constant<Real>(c, std::vector<double>(channels, g)));
  gamma_ii = this->add_parameter("gamma_ii", constant<Real>(c, std::vector<double>(channels, g)));
  if (kind == BatchNormKind::kWhitened)
    gamma_ri = this->add_parameter("gamma_ri", constant<Real>(c, std::vector<double>(channels)));
  beta = this->add_parameter("beta", ComplexTensor<Real>::zeros(c));
  running_mean = this->add_buffer("running_mean", ComplexTensor<Real>::zeros(c));
  running_rr = this->add_buffer("running_rr", constant<Real>(c, std::vector<double>(channels, 1)));
  running_ii = this->add_buffer("running_ii", constant<Real>(c, std::vector<double>(channels, 1)));
  running_ri = this->add_buffer("running_ri", constant<Real>(c, std::vector<double>(channels)));
}

template <typename Real>
ComplexTensor<Real> ComplexBatchNorm<Real>::forward(const Tensor& x, const Context& ctx) {
  if (x.rank() < 2 || x.shape()[1] != channels_)
    throw DimensionError("batch norm over " + std::to_string(channels_) + " channels got " +
                         to_string(x.shape()));
  return ctx.training() ? train_forward(x) : eval_forward(x);
}

namespace {

using detail::grad_im;
using detail::grad_re;
using detail::needs_grad;
using detail::record;

// Symmetric 2x2 [[a, b], [b, d]] = Q diag(l1, l2) Q^T with Q a rotation.
struct Sym2 {
  double c = 1, s = 0;  // first column of Q
  double l1 = 1, l2 = 1;

  static Sym2 of(double a, double b, double d) {
    Sym2 e;
    const double mid = 0.5 * (a + d), half = 0.5 * (a - d);
    const double r = std::hypot(half, b);
    e.l1 = mid + r;
    e.l2 = mid - r;
    if (r > 1e-300) {
      const double theta = 0.5 * std::atan2(2.0 * b, a - d);
      e.c = std::cos(theta);
      e.s = std::sin(theta);
    }
    return e;
  }
  // Q diag(f1, f2) Q^T as (m00, m01, m11).
  std::array<double, 3> compose(double f1, double f2) const {
    return {c * c * f1 + s * s * f2, c * s * (f1 - f2), s * s * f1 + c * c * f2};
  }
};

struct ChannelStats {
  double mr = 0, mi = 0;
  // Whitening W and its inverse S, symmetric (00, 01, 11).
  std::array<double, 3> w{1, 0, 1}, sq{1, 0, 1};
  Sym2 eig;
};

// Normalisation of x [B, C, ...] per channel, then y = Gamma zhat + beta.
// Whitened: zhat = V^-1/2 (z - mu) with V the 2x2 covariance + eps I.
// Naive: each part divided by its own standard deviation.
template <typename Real>
CT<Real> batch_norm_op(const CT<Real>& x, const CT<Real>& grr, const CT<Real>& gii,
                       const CT<Real>& gri, const CT<Real>& beta,
                       std::shared_ptr<std::vector<ChannelStats>> stats, bool whitened,
                       bool batch_stats) {
  const int64_t B = x.shape()[0], C = x.shape()[1], inner = x.numel() / (B * C);
  const int64_t N = B * inner;
  const Real* xr = x.real().data();
  const Real* xi = x.imag().data();
  auto zhat = std::make_shared<std::vector<Real>>(2 * x.numel());
  CT<Real> out(x.shape());
  Real* yr = out.mutable_real().data();
  Real* yi = out.mutable_imag().data();
  for (int64_t c = 0; c < C; ++c) {
    const ChannelStats& st = (*stats)[c];
    const double g00 = grr.real()[c], g11 = gii.real()[c];
    const double g01 = gri.defined() ? gri.real()[c] : 0.0;
    const double br = beta.real()[c], bi = beta.imag()[c];
    for (int64_t b = 0; b < B; ++b) {
      const int64_t base = (b * C + c) * inner;
      for (int64_t k = base; k < base + inner; ++k) {
        const double ar = xr[k] - st.mr, ai = xi[k] - st.mi;
        const double zr = st.w[0] * ar + st.w[1] * ai;
        const double zi = st.w[1] * ar + st.w[2] * ai;
        (*zhat)[2 * k] = static_cast<Real>(zr);
        (*zhat)[2 * k + 1] = static_cast<Real>(zi);
        yr[k] = static_cast<Real>(g00 * zr + g01 * zi + br);
        yi[k] = static_cast<Real>(g01 * zr + g11 * zi + bi);
      }
    }
  }
  if (!needs_grad(x, grr, gii, gri, beta)) return out;
  record(out, [=](detail::TensorNode<Real>& o) {
    const Real* gyr = o.grad_re.data();
    const Real* gyi = o.grad_im.data();
    const bool tx = x.requires_grad();
    Real* gxr = tx ? grad_re(x) : nullptr;
    Real* gxi = tx ? grad_im(x) : nullptr;
    for (int64_t c = 0; c < C; ++c) {
      const ChannelStats& st = (*stats)[c];
      const double g00 = grr.real()[c], g11 = gii.real()[c];
      const double g01 = gri.defined() ? gri.real()[c] : 0.0;
      double sb_r = 0, sb_i = 0, s00 = 0, s11 = 0, s01 = 0;
      // Sums of dzhat, dzhat * x^T (whitened) or dzhat * zhat (naive).
      double m_r = 0, m_i = 0, gw00 = 0, gw01 = 0, gw10 = 0, gw11 = 0;
      for (int64_t b = 0; b < B; ++b) {
        const int64_t base = (b * C + c) * inner;
        for (int64_t k = base; k < base + inner; ++k) {
          const double ur = gyr[k], ui = gyi[k];
          const double zr = (*zhat)[2 * k], zi = (*zhat)[2 * k + 1];
          sb_r += ur;
          sb_i += ui;
          s00 += ur * zr;
          s11 += ui * zi;
          s01 += ur * zi + ui * zr;
          const double dr = g00 * ur + g01 * ui, di = g01 * ur + g11 * ui;
          m_r += dr;
          m_i += di;
          if (whitened) {
            const double ar = st.sq[0] * zr + st.sq[1] * zi;
            const double ai = st.sq[1] * zr + st.sq[2] * zi;
            gw00 += dr * ar;
            gw01 += dr * ai;
            gw10 += di * ar;
            gw11 += di * ai;
          } else {
            gw00 += dr * zr;
            gw11 += di * zi;
          }
        }
      }
      if (grr.requires_grad()) grad_re(grr)[c] += static_cast<Real>(s00);
      if (gii.requires_grad()) grad_re(gii)[c] += static_cast<Real>(s11);
      if (gri.defined() && gri.requires_grad()) grad_re(gri)[c] += static_cast<Real>(s01);
      if (beta.requires_grad()) {
        grad_re(beta)[c] += static_cast<Real>(sb_r);
        grad_im(beta)[c] += static_cast<Real>(sb_i);
      }
      if (!tx) continue;
      const auto& w = st.w;
      if (!batch_stats) {
        for (int64_t b = 0; b < B; ++b) {
          const int64_t base = (b * C + c) * inner;
          for (int64_t k = base; k < base + inner; ++k) {
            const double ur = gyr[k], ui = gyi[k];
            const double dr = g00 * ur + g01 * ui, di = g01 * ur + g11 * ui;
            gxr[k] += static_cast<Real>(w[0] * dr + w[1] * di);
            gxi[k] += static_cast<Real>(w[1] * dr + w[2] * di);
          }
        }
        continue;
      }
      const double n = static_cast<double>(N);
      m_r /= n;
      m_i /= n;
      if (!whitened) {
        const double cr = gw00 / n, ci = gw11 / n;
        for (int64_t b = 0; b < B; ++b) {
          const int64_t base = (b * C + c) * inner;
          for (int64_t k = base; k < base + inner; ++k) {
            const double ur = gyr[k], ui = gyi[k];
            const double dr = g00 * ur, di = g11 * ui;
            const double zr = (*zhat)[2 * k], zi = (*zhat)[2 * k + 1];
            gxr[k] += static_cast<Real>(w[0] * (dr - m_r - zr * cr));
            gxi[k] += static_cast<Real>(w[2] * (di - m_i - zi * ci));
          }
        }
        continue;
      }
      // gS = -W gW W; gV solves S gV + gV S = gS, diagonal in the eigenbasis.
      const double a00 = w[0] * gw00 + w[1] * gw10, a01 = w[0] * gw01 + w[1] * gw11;
      const double a10 = w[1] * gw00 + w[2] * gw10, a11 = w[1] * gw01 + w[2] * gw11;
      const double gs00 = -(a00 * w[0] + a01 * w[1]), gs01 = -(a00 * w[1] + a01 * w[2]);
      const double gs10 = -(a10 * w[0] + a11 * w[1]), gs11 = -(a10 * w[1] + a11 * w[2]);
      const double qc = st.eig.c, qs = st.eig.s;
      // Q = [[qc, -qs], [qs, qc]]; P = Q^T gS Q.
      const double t00 = qc * gs00 + qs * gs10, t01 = qc * gs01 + qs * gs11;
      const double t10 = -qs * gs00 + qc * gs10, t11 = -qs * gs01 + qc * gs11;
      const double p00 = t00 * qc + t01 * qs, p01 = -t00 * qs + t01 * qc;
      const double p10 = t10 * qc + t11 * qs, p11 = -t10 * qs + t11 * qc;
      const double r1 = std::sqrt(st.eig.l1), r2 = std::sqrt(st.eig.l2);
      const double v00 = p00 / (2 * r1), v01 = p01 / (r1 + r2), v10 = p10 / (r1 + r2),
                   v11 = p11 / (2 * r2);
      // gV = Q v Q^T, then M = (gV + gV^T) / N.
      const double u00 = qc * v00 - qs * v10, u01 = qc * v01 - qs * v11;
      const double u10 = qs * v00 + qc * v10, u11 = qs * v01 + qc * v11;
      const double e00 = u00 * qc - u01 * qs, e01 = u00 * qs + u01 * qc;
      const double e10 = u10 * qc - u11 * qs, e11 = u10 * qs + u11 * qc;
      const double M00 = 2 * e00 / n, M01 = (e01 + e10) / n, M11 = 2 * e11 / n;
      for (int64_t b = 0; b < B; ++b) {
        const int64_t base = (b * C + c) * inner;
        for (int64_t k = base; k < base + inner; ++k) {
          const double ur = gyr[k], ui = gyi[k];
          const double dr = g00 * ur + g01 * ui - m_r, di = g01 * ur + g11 * ui - m_i;
          const double zr = (*zhat)[2 * k], zi = (*zhat)[2 * k + 1];
          const double ar = st.sq[0] * zr + st.sq[1] * zi;
          const double ai = st.sq[1] * zr + st.sq[2] * zi;
          gxr[k] += static_cast<Real>(w[0] * dr + w[1] * di + M00 * ar + M01 * ai);
          gxi[k] += static_cast<Real>(w[1] * dr + w[2] * di + M01 * ar + M11 * ai);
        }
      }
    }
  });
  return out;
}

ChannelStats whitening(double mr, double mi, double vrr, double vri, double vii, double eps,
                       bool whitened, int64_t channel) {
  ChannelStats st;
  st.mr = mr;
  st.mi = mi;
  const double a = vrr + eps, d = vii + eps;
  if (!std::isfinite(a) || !std::isfinite(d) || !std::isfinite(vri) || !std::isfinite(mr) ||
      !std::isfinite(mi))
    throw NumericError("batch norm statistics are not finite in channel " +
                       std::to_string(channel));
  if (!whitened) {
    if (!(a > 0) || !(d > 0))
      throw NumericError("batch norm variance is not positive in channel " +
                         std::to_string(channel));
    st.w = {1.0 / std::sqrt(a), 0.0, 1.0 / std::sqrt(d)};
    st.sq = {std::sqrt(a), 0.0, std::sqrt(d)};
    return st;
  }
  st.eig = Sym2::of(a, vri, d);
  if (!(st.eig.l2 > 0) || !(a * d - vri * vri > 0))
    throw NumericError("batch norm covariance is singular in channel " + std::to_string(channel));
  const double r1 = std::sqrt(st.eig.l1), r2 = std::sqrt(st.eig.l2);
  st.w = st.eig.compose(1.0 / r1, 1.0 / r2);
  st.sq = st.eig.compose(r1, r2);
  return st;
}

}  // namespace

template <typename Real>
ComplexTensor<Real> ComplexBatchNorm<Real>::train_forward(const Tensor& x) {
  const int64_t B = x.shape()[0], C = channels_, inner = x.numel() / (B * C);
  const int64_t count = B * inner;
  if (count < 2) throw DimensionError("batch norm needs at least 2 values per channel in training");
  const bool whitened = kind_ == BatchNormKind::kWhitened;
  auto stats = std::make_shared<std::vector<ChannelStats>>(C);
  const Real* xr = x.real().data();
  const Real* xi = x.imag().data();
  const double m = momentum_;
  const double unbias = static_cast<double>(count) / static_cast<double>(count - 1);
  for (int64_t c = 0; c < C; ++c) {
    double sr = 0, si = 0;
    for (int64_t b = 0; b < B; ++b)
      for (int64_t k = (b * C + c) * inner, e = k + inner; k < e; ++k) sr += xr[k], si += xi[k];
    const double mr = sr / count, mi = si / count;
    double vrr = 0, vii = 0, vri = 0;
    for (int64_t b = 0; b < B; ++b)
      for (int64_t k = (b * C + c) * inner, e = k + inner; k < e; ++k) {
        const double ar = xr[k] - mr, ai = xi[k] - mi;
        vrr += ar * ar;
        vii += ai * ai;
        vri += ar * ai;
      }
    vrr /= count;
    vii /= count;
    vri = whitened ? vri / count : 0.0;
    (*stats)[c] = whitening(mr, mi, vrr, vri, vii, eps_, whitened, c);
    auto upd = [&](Tensor& buf, double v) {
      auto r = buf.mutable_real();
      r[c] = static_cast<Real>((1 - m) * r[c] + m * v);
    };
    upd(running_rr, vrr * unbias);
    upd(running_ii, vii * unbias);
    upd(running_ri, vri * unbias);
    auto rm = running_mean.mutable_real();
    auto im = running_mean.mutable_imag();
    rm[c] = static_cast<Real>((1 - m) * rm[c] + m * mr);
    im[c] = static_cast<Real>((1 - m) * im[c] + m * mi);
  }
  return batch_norm_op(x, gamma_rr, gamma_ii, gamma_ri, beta, stats, whitened, true);
}

template <typename Real>
ComplexTensor<Real> ComplexBatchNorm<Real>::eval_forward(const Tensor& x) const {
  const bool whitened = kind_ == BatchNormKind::kWhitened;
  auto stats = std::make_shared<std::vector<ChannelStats>>(channels_);
  for (int64_t c = 0; c < channels_; ++c)
    (*stats)[c] = whitening(running_mean.real()[c], running_mean.imag()[c], running_rr.real()[c],
                            whitened ? double(running_ri.real()[c]) : 0.0, running_ii.real()[c],
                            eps_, whitened, c);
  return batch_norm_op(x, gamma_rr, gamma_ii, gamma_ri, beta, stats, whitened, false);
}

template <typename Real>
EncoderBlock<Real>::EncoderBlock(int64_t in, int64_t out, Pair kernel, Pair stride, Pair padding,
                                 BatchNormKind bn_kind, Rng& rng, bool flipped_sign) {
  for (int a = 0; a < 2; ++a) {
    if (kernel[a] % 2 == 0) throw ConfigError("encoder kernel must be odd");
    if (stride[a] != 1 && stride[a] != 2) throw ConfigError("encoder stride must be 1 or 2");
  }
  conv = &this->add_module("conv", std::make_unique<ComplexConv2d<Real>>(
                                       in, out, kernel, stride, padding, rng, false, flipped_sign));
  bn = &this->add_module("bn", std::make_unique<ComplexBatchNorm<Real>>(out, bn_kind));
}

template <typename Real>
ComplexTensor<Real> EncoderBlock<Real>::forward(const Tensor& x, const Context& ctx) {
  if (x.rank() != 4) throw DimensionError("encoder expects [B, C, F, T], got " + to_string(x.shape()));
  for (int a = 0; a < 2; ++a)
    if (x.shape()[2 + a] % conv->spec.stride[a] != 0)
      throw DimensionError("encoder input " + to_string(x.shape()) +
                           " is not divisible by the stride");
  return crelu(bn->forward(conv->forward(x), ctx));
}

template <typename Real>
DecoderBlock<Real>::DecoderBlock(int64_t in, int64_t skip, int64_t out, Pair kernel, Pair stride,
                                 Pair padding, bool output_level, BatchNormKind bn_kind, Rng& rng,
                                 bool flipped_sign)
    : skip_channels_(skip) {
  const Pair output_padding{stride[0] - 1, stride[1] - 1};
  conv = &this->add_module("conv", std::make_unique<ComplexConvTranspose2d<Real>>(
                                       in + skip, out, kernel, stride, padding, output_padding,
                                       rng, output_level, flipped_sign));
  if (!output_level)
    bn = &this->add_module("bn", std::make_unique<ComplexBatchNorm<Real>>(out, bn_kind));
}

template <typename Real>
ComplexTensor<Real> DecoderBlock<Real>::forward(const Tensor& x, const Tensor& skip,
                                                const Context& ctx) {
  const auto& a = x.shape();
  const auto& b = skip.shape();
  if (a.size() != 4 || b.size() != 4 || a[0] != b[0] || a[2] != b[2] || a[3] != b[3] ||
      b[1] != skip_channels_)
    throw DimensionError("decoder input " + to_string(a) + " does not match skip " + to_string(b));
  const Tensor y = conv->forward(concat<Real>({x, skip}, 1));
  if (!bn) return y;
  return crelu(bn->forward(y, ctx));
}

template <typename Real>
SkipBlock<Real>::SkipBlock(int64_t channels, BatchNormKind bn_kind, Rng& rng,
                           bool flipped_sign) {
  conv = &this->add_module("conv", std::make_unique<ComplexConv2d<Real>>(
                                       channels, channels, Pair{1, 1}, Pair{1, 1}, Pair{0, 0}, rng,
                                       false, flipped_sign));
  bn = &this->add_module("bn", std::make_unique<ComplexBatchNorm<Real>>(channels, bn_kind));
}

template <typename Real>
ComplexTensor<Real> SkipBlock<Real>::forward(const Tensor& e, const Context& ctx) {
  if (e.rank() != 4 || e.shape()[1] != bn->channels())
    throw DimensionError("skip block expects " + std::to_string(bn->channels()) +
                         " channels, got " + to_string(e.shape()));
  return crelu(bn->forward(conv->forward(e), ctx));
}

#define CTFT_INSTANTIATE_LAYERS(R)           \
  template class ComplexConv2d<R>;           \
  template class ComplexConvTranspose2d<R>;  \
  template class ComplexLinear<R>;           \
  template class ComplexBatchNorm<R>;        \
  template class EncoderBlock<R>;            \
  template class DecoderBlock<R>;            \
  template class SkipBlock<R>;

CTFT_INSTANTIATE_LAYERS(float)
CTFT_INSTANTIATE_LAYERS(double)

}  // namespace ctft
