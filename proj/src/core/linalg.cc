// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "ctft/core/linalg.h"

#include <memory>

#include "ctft/core/ops.h"
#include "gemm.h"

namespace ctft {

namespace {

using detail::cgemm;
using detail::Coef;
using detail::grad_im;
using detail::grad_re;
using detail::MatRef;
using detail::needs_grad;
using detail::record;

template <typename Real>
const Real* imag_or_null(const ComplexTensor<Real>& t) {
  return t.is_real() ? nullptr : t.imag().data();
}

struct ConvGeometry {
  int64_t channels, height, width;  // image
  int64_t kh, kw, sh, sw, ph, pw;
  int64_t out_h, out_w;             // column grid
  int64_t rows() const { return channels * kh * kw; }
  int64_t cols() const { return out_h * out_w; }
  bool pointwise() const {
    return kh == 1 && kw == 1 && sh == 1 && sw == 1 && ph == 0 && pw == 0 &&
           out_h == height && out_w == width;
  }
};

template <typename Real>
void im2col(const Real* img, const ConvGeometry& g, Real* col) {
  const int64_t P = g.cols();
  for (int64_t c = 0; c < g.channels; ++c)
    for (int64_t i = 0; i < g.kh; ++i)
      for (int64_t j = 0; j < g.kw; ++j) {
        Real* row = col + ((c * g.kh + i) * g.kw + j) * P;
        for (int64_t ho = 0; ho < g.out_h; ++ho) {
          const int64_t h = ho * g.sh - g.ph + i;
          Real* dst = row + ho * g.out_w;
          if (h < 0 || h >= g.height) {
            std::fill_n(dst, g.out_w, Real(0));
            continue;
          }
          const Real* src = img + (c * g.height + h) * g.width;
          for (int64_t wo = 0; wo < g.out_w; ++wo) {
            const int64_t w = wo * g.sw - g.pw + j;
            dst[wo] = (w >= 0 && w < g.width) ? src[w] : Real(0);
          }
        }
      }
}

template <typename Real>
void col2im(const Real* col, const ConvGeometry& g, Real* img) {
  const int64_t P = g.cols();
  for (int64_t c = 0; c < g.channels; ++c)
    for (int64_t i = 0; i < g.kh; ++i)
      for (int64_t j = 0; j < g.kw; ++j) {
        const Real* row = col + ((c * g.kh + i) * g.kw + j) * P;
        for (int64_t ho = 0; ho < g.out_h; ++ho) {
          const int64_t h = ho * g.sh - g.ph + i;
          if (h < 0 || h >= g.height) continue;
          const Real* src = row + ho * g.out_w;
          Real* dst = img + (c * g.height + h) * g.width;
          for (int64_t wo = 0; wo < g.out_w; ++wo) {
            const int64_t w = wo * g.sw - g.pw + j;
            if (w >= 0 && w < g.width) dst[w] += src[wo];
          }
        }
      }
}

// Planar im2col buffer of one image, or a view of the image itself for
// pointwise geometry.
template <typename Real>
struct Columns {
  Columns(const Real* re, const Real* im, const ConvGeometry& g) {
    if (g.pointwise()) {
      view_re = re;
      view_im = im;
      return;
    }
    buf_re.resize(g.rows() * g.cols());
    im2col(re, g, buf_re.data());
    view_re = buf_re.data();
    if (im) {
      buf_im.resize(g.rows() * g.cols());
      im2col(im, g, buf_im.data());
      view_im = buf_im.data();
    }
  }
  std::vector<Real> buf_re, buf_im;
  const Real* view_re = nullptr;
  const Real* view_im = nullptr;
};

template <typename Real>
void check_bias(const ComplexTensor<Real>& bias, int64_t channels, const char* op) {
  if (bias.defined() && (bias.rank() != 1 || bias.shape()[0] != channels))
    throw DimensionError(std::string(op) + ": bias shape " + to_string(bias.shape()) +
                         " does not match " + std::to_string(channels) + " channels");
}

template <typename Real>
void add_bias(ComplexTensor<Real>& out, const ComplexTensor<Real>& bias, int64_t batch,
              int64_t channels, int64_t inner) {
  if (!bias.defined()) return;
  Real* orr = out.mutable_real().data();
  Real* oi = out.mutable_imag().data();
  for (int64_t b = 0; b < batch; ++b)
    for (int64_t c = 0; c < channels; ++c) {
      const Real br = bias.real()[c], bi = bias.imag()[c];
      const int64_t base = (b * channels + c) * inner;
      for (int64_t k = 0; k < inner; ++k) {
        orr[base + k] += br;
        oi[base + k] += bi;
      }
    }
}

template <typename Real>
void bias_grad(const ComplexTensor<Real>& bias, const detail::TensorNode<Real>& o,
               int64_t batch, int64_t channels, int64_t inner) {
  if (!bias.defined() || !bias.requires_grad()) return;
  Real* gr = grad_re(bias);
  Real* gi = grad_im(bias);
  for (int64_t b = 0; b < batch; ++b)
    for (int64_t c = 0; c < channels; ++c) {
      const int64_t base = (b * channels + c) * inner;
      Real sr = 0, si = 0;
      for (int64_t k = 0; k < inner; ++k) {
        sr += o.grad_re[base + k];
        si += o.grad_im[base + k];
      }
      gr[c] += sr;
      gi[c] += si;
    }
}

}  // namespace

int64_t conv_output_size(int64_t in, int64_t kernel, int64_t stride, int64_t padding) {
  if (stride < 1) throw DimensionError("convolution stride must be >= 1");
  const int64_t span = in + 2 * padding - kernel;
  if (span < 0) return 0;
  return span / stride + 1;
}

template <typename Real>
ComplexTensor<Real> matmul(const ComplexTensor<Real>& a, const ComplexTensor<Real>& b) {
  if (a.rank() < 2 || b.rank() < 2) throw DimensionError("matmul needs rank >= 2 operands");
  const int64_t M = a.shape()[a.rank() - 2], K = a.shape()[a.rank() - 1];
  const int64_t K2 = b.shape()[b.rank() - 2], N = b.shape()[b.rank() - 1];
  if (K != K2)
    throw DimensionError("matmul inner dimension mismatch: " + to_string(a.shape()) + " x " +
                         to_string(b.shape()));
  const Shape batch_a(a.shape().begin(), a.shape().end() - 2);
  const Shape batch_b(b.shape().begin(), b.shape().end() - 2);
  const Shape batch = broadcast_shapes(batch_a, batch_b);
  auto ia = std::make_shared<BroadcastIndexer>(batch, batch_a);
  auto ib = std::make_shared<BroadcastIndexer>(batch, batch_b);
  const int64_t nb = numel(batch);
  Shape shape = batch;
  shape.push_back(M);
  shape.push_back(N);
  ComplexTensor<Real> out(shape, a.is_real() && b.is_real());
  auto at = [](const BroadcastIndexer& ix, int64_t i) {
    return ix.identity() ? i : ix.offsets()[i];
  };
  const Real* a_im = imag_or_null(a);
  const Real* b_im = imag_or_null(b);
  for (int64_t i = 0; i < nb; ++i) {
    const int64_t pa = at(*ia, i) * M * K, pb = at(*ib, i) * K * N;
    cgemm<Real>({a.real().data() + pa, a_im ? a_im + pa : nullptr, M, K},
                {b.real().data() + pb, b_im ? b_im + pb : nullptr, K, N},
                out.mutable_real().data() + i * M * N, out.mutable_imag().data() + i * M * N,
                {1, -1, 1, 1}, false);
  }
  if (needs_grad(a, b)) {
    record(out, [a, b, ia, ib, nb, M, K, N, at](detail::TensorNode<Real>& o) {
      for (int64_t i = 0; i < nb; ++i) {
        const int64_t pa = at(*ia, i) * M * K, pb = at(*ib, i) * K * N;
        const MatRef<Real> g{o.grad_re.data() + i * M * N, o.grad_im.data() + i * M * N, M, N};
        if (a.requires_grad())
          cgemm<Real>(g, {b.real().data() + pb, b.imag().data() + pb, N, K, true},
                      grad_re(a) + pa, grad_im(a) + pa, {1, 1, -1, 1}, true);
        if (b.requires_grad())
          cgemm<Real>({a.real().data() + pa, a.imag().data() + pa, K, M, true}, g,
                      grad_re(b) + pb, grad_im(b) + pb, {1, 1, 1, -1}, true);
      }
    });
  }
  return out;
}

template <typename Real>
ComplexTensor<Real> linear(const ComplexTensor<Real>& x, const ComplexTensor<Real>& weight,
                           const ComplexTensor<Real>& bias) {
  if (weight.rank() != 2) throw DimensionError("linear: weight must be [out, in]");
  const int64_t out_f = weight.shape()[0], in_f = weight.shape()[1];
  if (x.rank() < 1 || x.shape().back() != in_f)
    throw DimensionError("linear: input " + to_string(x.shape()) + " does not end in " +
                         std::to_string(in_f));
  check_bias(bias, out_f, "linear");
  const int64_t rows = x.numel() / in_f;
  Shape shape = x.shape();
  shape.back() = out_f;
  ComplexTensor<Real> out(shape);
  cgemm<Real>({x.real().data(), imag_or_null(x), rows, in_f},
              {weight.real().data(), weight.imag().data(), in_f, out_f, true},
              out.mutable_real().data(), out.mutable_imag().data(), {1, -1, 1, 1}, false);
  add_bias(out, bias, rows, out_f, 1);
  if (needs_grad(x, weight, bias)) {
    record(out, [x, weight, bias, rows, in_f, out_f](detail::TensorNode<Real>& o) {
      const MatRef<Real> g{o.grad_re.data(), o.grad_im.data(), rows, out_f};
      if (x.requires_grad())
        cgemm<Real>(g, {weight.real().data(), weight.imag().data(), out_f, in_f},
                    grad_re(x), grad_im(x), {1, 1, -1, 1}, true);
      if (weight.requires_grad())
        cgemm<Real>({o.grad_re.data(), o.grad_im.data(), out_f, rows, true},
                    {x.real().data(), x.imag().data(), rows, in_f}, grad_re(weight),
                    grad_im(weight), {1, 1, -1, 1}, true);
      bias_grad(bias, o, rows, out_f, 1);
    });
  }
  return out;
}

template <typename Real>
ComplexTensor<Real> conv2d(const ComplexTensor<Real>& input, const ComplexTensor<Real>& weight,
                           const ComplexTensor<Real>& bias, const Conv2dSpec& spec) {
  if (input.rank() == 3) {
    Shape s = input.shape();
    s.insert(s.begin(), 1);
    auto y = conv2d(reshape(input, s), weight, bias, spec);
    Shape os(y.shape().begin() + 1, y.shape().end());
    return reshape(y, os);
  }
  if (input.rank() != 4 || weight.rank() != 4)
    throw DimensionError("conv2d expects input [B,C,H,W] and weight [Co,Ci,kH,kW]");
  const int64_t B = input.shape()[0], Ci = input.shape()[1];
  const int64_t H = input.shape()[2], W = input.shape()[3];
  const int64_t Co = weight.shape()[0];
  if (weight.shape()[1] != Ci)
    throw DimensionError("conv2d: input has " + std::to_string(Ci) +
                         " channels, weight expects " + std::to_string(weight.shape()[1]));
  check_bias(bias, Co, "conv2d");
  ConvGeometry g{Ci, H, W, weight.shape()[2], weight.shape()[3], spec.stride[0],
                 spec.stride[1], spec.padding[0], spec.padding[1], 0, 0};
  g.out_h = conv_output_size(H, g.kh, g.sh, g.ph);
  g.out_w = conv_output_size(W, g.kw, g.sw, g.pw);
  if (g.out_h <= 0 || g.out_w <= 0)
    throw DimensionError("conv2d: kernel does not fit padded input " + to_string(input.shape()));
  const Real s = spec.flipped_sign ? Real(-1) : Real(1);
  const int64_t K = g.rows(), P = g.cols(), in_sz = Ci * H * W;
  ComplexTensor<Real> out(Shape{B, Co, g.out_h, g.out_w});
  const Real* x_im = imag_or_null(input);
  for (int64_t b = 0; b < B; ++b) {
    Columns<Real> col(input.real().data() + b * in_sz, x_im ? x_im + b * in_sz : nullptr, g);
    cgemm<Real>({weight.real().data(), weight.imag().data(), Co, K},
                {col.view_re, col.view_im, K, P}, out.mutable_real().data() + b * Co * P,
                out.mutable_imag().data() + b * Co * P, {1, -1, 1, s}, false);
  }
  add_bias(out, bias, B, Co, P);
  if (needs_grad(input, weight, bias)) {
    record(out, [input, weight, bias, g, B, Co, K, P, in_sz, s](detail::TensorNode<Real>& o) {
      std::vector<Real> gcol_r, gcol_i;
      if (!g.pointwise()) {
        gcol_r.resize(K * P);
        gcol_i.resize(K * P);
      }
      for (int64_t b = 0; b < B; ++b) {
        const MatRef<Real> gy{o.grad_re.data() + b * Co * P, o.grad_im.data() + b * Co * P, Co,
                              P};
        if (weight.requires_grad()) {
          Columns<Real> col(input.real().data() + b * in_sz, input.imag().data() + b * in_sz, g);
          cgemm<Real>(gy, {col.view_re, col.view_im, P, K, true}, grad_re(weight),
                      grad_im(weight), {1, 1, -1, s}, true);
        }
        if (input.requires_grad()) {
          const MatRef<Real> wt{weight.real().data(), weight.imag().data(), K, Co, true};
          Real* gx_r = grad_re(input) + b * in_sz;
          Real* gx_i = grad_im(input) + b * in_sz;
          if (g.pointwise()) {
            cgemm<Real>(wt, gy, gx_r, gx_i, {1, s, 1, -1}, true);
          } else {
            cgemm<Real>(wt, gy, gcol_r.data(), gcol_i.data(), {1, s, 1, -1}, false);
            col2im(gcol_r.data(), g, gx_r);
            col2im(gcol_i.data(), g, gx_i);
          }
        }
      }
      bias_grad(bias, o, B, Co, P);
    });
  }
  return out;
}

template <typename Real>
ComplexTensor<Real> conv_transpose2d(const ComplexTensor<Real>& input,
                                     const ComplexTensor<Real>& weight,
                                     const ComplexTensor<Real>& bias, const Conv2dSpec& spec) {
  if (input.rank() != 4 || weight.rank() != 4)
    throw DimensionError(
        "conv_transpose2d expects input [B,C,H,W] and weight [Ci,Co,kH,kW]");
  const int64_t B = input.shape()[0], Ci = input.shape()[1];
  const int64_t H = input.shape()[2], W = input.shape()[3];
  const int64_t Co = weight.shape()[1];
  if (weight.shape()[0] != Ci)
    throw DimensionError("conv_transpose2d: input has " + std::to_string(Ci) +
                         " channels, weight expects " + std::to_string(weight.shape()[0]));
  check_bias(bias, Co, "conv_transpose2d");
  const int64_t kh = weight.shape()[2], kw = weight.shape()[3];
  for (int a = 0; a < 2; ++a) {
    if (spec.stride[a] < 1) throw DimensionError("conv_transpose2d: stride must be >= 1");
    if (spec.output_padding[a] < 0 || spec.output_padding[a] >= spec.stride[a])
      throw DimensionError("conv_transpose2d: output_padding must be in [0, stride)");
  }
  const int64_t Ho = (H - 1) * spec.stride[0] - 2 * spec.padding[0] + kh + spec.output_padding[0];
  const int64_t Wo = (W - 1) * spec.stride[1] - 2 * spec.padding[1] + kw + spec.output_padding[1];
  if (Ho <= 0 || Wo <= 0)
    throw DimensionError("conv_transpose2d: empty output for input " + to_string(input.shape()));
  // Column grid is the input extent; the image is the output.
  const ConvGeometry g{Co, Ho, Wo, kh, kw, spec.stride[0], spec.stride[1],
                       spec.padding[0], spec.padding[1], H, W};
  const Real s = spec.flipped_sign ? Real(-1) : Real(1);
  const int64_t K = g.rows(), P = g.cols(), out_sz = Co * Ho * Wo;
  ComplexTensor<Real> out(Shape{B, Co, Ho, Wo});
  const Real* x_im = imag_or_null(input);
  std::vector<Real> col_r, col_i;
  if (!g.pointwise()) {
    col_r.resize(K * P);
    col_i.resize(K * P);
  }
  for (int64_t b = 0; b < B; ++b) {
    const MatRef<Real> wt{weight.real().data(), weight.imag().data(), K, Ci, true};
    const MatRef<Real> xb{input.real().data() + b * Ci * P,
                          x_im ? x_im + b * Ci * P : nullptr, Ci, P};
    Real* y_r = out.mutable_real().data() + b * out_sz;
    Real* y_i = out.mutable_imag().data() + b * out_sz;
    if (g.pointwise()) {
      cgemm<Real>(wt, xb, y_r, y_i, {1, -1, 1, s}, false);
    } else {
      cgemm<Real>(wt, xb, col_r.data(), col_i.data(), {1, -1, 1, s}, false);
      col2im(col_r.data(), g, y_r);
      col2im(col_i.data(), g, y_i);
    }
  }
  add_bias(out, bias, B, Co, Ho * Wo);
  if (needs_grad(input, weight, bias)) {
    record(out, [input, weight, bias, g, B, Ci, Co, K, P, out_sz, s](detail::TensorNode<Real>& o) {
      for (int64_t b = 0; b < B; ++b) {
        Columns<Real> gcol(o.grad_re.data() + b * out_sz, o.grad_im.data() + b * out_sz, g);
        const MatRef<Real> gc{gcol.view_re, gcol.view_im, K, P};
        if (input.requires_grad())
          cgemm<Real>({weight.real().data(), weight.imag().data(), Ci, K}, gc,
                      grad_re(input) + b * Ci * P, grad_im(input) + b * Ci * P,
                      {1, s, 1, -1}, true);
        if (weight.requires_grad())
          cgemm<Real>({input.real().data() + b * Ci * P, input.imag().data() + b * Ci * P, Ci, P},
                      {gcol.view_re, gcol.view_im, P, K, true}, grad_re(weight),
                      grad_im(weight), {1, 1, s, -1}, true);
      }
      bias_grad(bias, o, B, Co, g.height * g.width);
    });
  }
  return out;
}

template <typename Real>
ComplexTensor<Real> depthwise_conv1d(const ComplexTensor<Real>& input,
                                     const ComplexTensor<Real>& weight,
                                     const ComplexTensor<Real>& bias, int64_t padding) {
  if (input.rank() != 3 || weight.rank() != 2)
    throw DimensionError("depthwise_conv1d expects input [B,C,L] and weight [C,k]");
  const int64_t B = input.shape()[0], C = input.shape()[1], L = input.shape()[2];
  const int64_t k = weight.shape()[1];
  if (weight.shape()[0] != C) throw DimensionError("depthwise_conv1d: channel mismatch");
  check_bias(bias, C, "depthwise_conv1d");
  const int64_t Lo = L + 2 * padding - k + 1;
  if (Lo <= 0) throw DimensionError("depthwise_conv1d: kernel longer than padded input");
  ComplexTensor<Real> out(Shape{B, C, Lo});
  const Real *xr = input.real().data(), *xi = input.imag().data();
  const Real *wr = weight.real().data(), *wi = weight.imag().data();
  Real *yr = out.mutable_real().data(), *yi = out.mutable_imag().data();
  for (int64_t b = 0; b < B; ++b)
    for (int64_t c = 0; c < C; ++c) {
      const int64_t xb = (b * C + c) * L, yb = (b * C + c) * Lo;
      for (int64_t l = 0; l < Lo; ++l) {
        Real sr = 0, si = 0;
        for (int64_t j = 0; j < k; ++j) {
          const int64_t t = l - padding + j;
          if (t < 0 || t >= L) continue;
          sr += wr[c * k + j] * xr[xb + t] - wi[c * k + j] * xi[xb + t];
          si += wr[c * k + j] * xi[xb + t] + wi[c * k + j] * xr[xb + t];
        }
        yr[yb + l] = sr;
        yi[yb + l] = si;
      }
    }
  add_bias(out, bias, B, C, Lo);
  if (needs_grad(input, weight, bias)) {
    record(out, [input, weight, bias, B, C, L, Lo, k, padding](detail::TensorNode<Real>& o) {
      const bool tx = input.requires_grad(), tw = weight.requires_grad();
      Real* gxr = tx ? grad_re(input) : nullptr;
      Real* gxi = tx ? grad_im(input) : nullptr;
      Real* gwr = tw ? grad_re(weight) : nullptr;
      Real* gwi = tw ? grad_im(weight) : nullptr;
      const Real *xr = input.real().data(), *xi = input.imag().data();
      const Real *wr = weight.real().data(), *wi = weight.imag().data();
      for (int64_t b = 0; b < B; ++b)
        for (int64_t c = 0; c < C; ++c) {
          const int64_t xb = (b * C + c) * L, yb = (b * C + c) * Lo;
          for (int64_t l = 0; l < Lo; ++l) {
            const Real gr = o.grad_re[yb + l], gi = o.grad_im[yb + l];
            for (int64_t j = 0; j < k; ++j) {
              const int64_t t = l - padding + j;
              if (t < 0 || t >= L) continue;
              // G * conj(w), G * conj(x)
              if (tx) {
                gxr[xb + t] += gr * wr[c * k + j] + gi * wi[c * k + j];
                gxi[xb + t] += gi * wr[c * k + j] - gr * wi[c * k + j];
              }
              if (tw) {
                gwr[c * k + j] += gr * xr[xb + t] + gi * xi[xb + t];
                gwi[c * k + j] += gi * xr[xb + t] - gr * xi[xb + t];
              }
            }
          }
        }
      bias_grad(bias, o, B, C, Lo);
    });
  }
  return out;
}

#define CTFT_INSTANTIATE_LINALG(R)                                                          \
  template ComplexTensor<R> matmul(const ComplexTensor<R>&, const ComplexTensor<R>&);       \
  template ComplexTensor<R> linear(const ComplexTensor<R>&, const ComplexTensor<R>&,        \
                                   const ComplexTensor<R>&);                                \
  template ComplexTensor<R> conv2d(const ComplexTensor<R>&, const ComplexTensor<R>&,        \
                                   const ComplexTensor<R>&, const Conv2dSpec&);             \
  template ComplexTensor<R> conv_transpose2d(const ComplexTensor<R>&,                       \
                                             const ComplexTensor<R>&,                       \
                                             const ComplexTensor<R>&, const Conv2dSpec&);   \
  template ComplexTensor<R> depthwise_conv1d(const ComplexTensor<R>&,                       \
                                             const ComplexTensor<R>&,                       \
                                             const ComplexTensor<R>&, int64_t);

CTFT_INSTANTIATE_LINALG(float)
CTFT_INSTANTIATE_LINALG(double)

}  // namespace ctft
