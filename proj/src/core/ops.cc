// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "ctft/core/ops.h"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ctft {

namespace {

using detail::grad_im;
using detail::grad_re;
using detail::needs_grad;
using detail::record;

template <typename Real>
CT<Real> make_output(const Shape& shape, bool is_real) {
  return CT<Real>(shape, is_real);
}

// Element offsets of a broadcast operand, or identity.
struct Operand {
  Operand(const Shape& out, const Shape& in) : indexer(out, in) {}
  int64_t operator[](int64_t k) const {
    return indexer.identity() ? k : indexer.offsets()[k];
  }
  BroadcastIndexer indexer;
};

enum class BinaryKind { kAdd, kSub, kMul, kDiv };

template <typename Real>
CT<Real> binary(const CT<Real>& a, const CT<Real>& b, BinaryKind kind) {
  const Shape shape = broadcast_shapes(a.shape(), b.shape());
  auto ia = std::make_shared<Operand>(shape, a.shape());
  auto ib = std::make_shared<Operand>(shape, b.shape());
  CT<Real> out = make_output<Real>(shape, a.is_real() && b.is_real());
  const int64_t n = out.numel();
  const Real* ar = a.real().data();
  const Real* ai = a.imag().data();
  const Real* br = b.real().data();
  const Real* bi = b.imag().data();
  Real* orr = out.mutable_real().data();
  Real* oi = out.mutable_imag().data();
  for (int64_t k = 0; k < n; ++k) {
    const int64_t pa = (*ia)[k];
    const int64_t pb = (*ib)[k];
    switch (kind) {
      case BinaryKind::kAdd:
        orr[k] = ar[pa] + br[pb];
        oi[k] = ai[pa] + bi[pb];
        break;
      case BinaryKind::kSub:
        orr[k] = ar[pa] - br[pb];
        oi[k] = ai[pa] - bi[pb];
        break;
      case BinaryKind::kMul:
        orr[k] = ar[pa] * br[pb] - ai[pa] * bi[pb];
        oi[k] = ar[pa] * bi[pb] + ai[pa] * br[pb];
        break;
      case BinaryKind::kDiv: {
        const std::complex<Real> q =
            std::complex<Real>(ar[pa], ai[pa]) / std::complex<Real>(br[pb], bi[pb]);
        orr[k] = q.real();
        oi[k] = q.imag();
        break;
      }
    }
  }
  if (needs_grad(a, b)) {
    record(out, [a, b, ia, ib, kind](detail::TensorNode<Real>& o) {
      const int64_t n = static_cast<int64_t>(o.re.size());
      const Real* gr = o.grad_re.data();
      const Real* gi = o.grad_im.data();
      const bool ta = a.requires_grad();
      const bool tb = b.requires_grad();
      Real* gar = ta ? grad_re(a) : nullptr;
      Real* gai = ta ? grad_im(a) : nullptr;
      Real* gbr = tb ? grad_re(b) : nullptr;
      Real* gbi = tb ? grad_im(b) : nullptr;
      const Real* ar = a.real().data();
      const Real* ai = a.imag().data();
      const Real* br = b.real().data();
      const Real* bi = b.imag().data();
      for (int64_t k = 0; k < n; ++k) {
        const int64_t pa = (*ia)[k];
        const int64_t pb = (*ib)[k];
        switch (kind) {
          case BinaryKind::kAdd:
            if (ta) { gar[pa] += gr[k]; gai[pa] += gi[k]; }
            if (tb) { gbr[pb] += gr[k]; gbi[pb] += gi[k]; }
            break;
          case BinaryKind::kSub:
            if (ta) { gar[pa] += gr[k]; gai[pa] += gi[k]; }
            if (tb) { gbr[pb] -= gr[k]; gbi[pb] -= gi[k]; }
            break;
          case BinaryKind::kMul:
            // G * conj(b), G * conj(a)
            if (ta) {
              gar[pa] += gr[k] * br[pb] + gi[k] * bi[pb];
              gai[pa] += gi[k] * br[pb] - gr[k] * bi[pb];
            }
            if (tb) {
              gbr[pb] += gr[k] * ar[pa] + gi[k] * ai[pa];
              gbi[pb] += gi[k] * ar[pa] - gr[k] * ai[pa];
            }
            break;
          case BinaryKind::kDiv: {
            const std::complex<Real> g(gr[k], gi[k]);
            const std::complex<Real> inv =
                Real(1) / std::complex<Real>(br[pb], bi[pb]);
            if (ta) {
              const auto d = g * std::conj(inv);
              gar[pa] += d.real();
              gai[pa] += d.imag();
            }
            if (tb) {
              const std::complex<Real> w = std::complex<Real>(ar[pa], ai[pa]) * inv;
              const auto d = -g * std::conj(w * inv);
              gbr[pb] += d.real();
              gbi[pb] += d.imag();
            }
            break;
          }
        }
      }
    });
  }
  return out;
}

// Unary map with per-element forward f(re, im) -> (re, im) and backward
// producing input gradient pairs from the output gradient pair.
template <typename Real, typename Fwd, typename Bwd>
CT<Real> unary(const CT<Real>& a, bool out_real, Fwd fwd, Bwd bwd) {
  CT<Real> out = make_output<Real>(a.shape(), out_real);
  const int64_t n = a.numel();
  const Real* ar = a.real().data();
  const Real* ai = a.imag().data();
  Real* orr = out.mutable_real().data();
  Real* oi = out.mutable_imag().data();
  for (int64_t k = 0; k < n; ++k) fwd(ar[k], ai[k], orr[k], oi[k]);
  if (needs_grad(a)) {
    record(out, [a, bwd](detail::TensorNode<Real>& o) {
      const int64_t n = static_cast<int64_t>(o.re.size());
      Real* gar = grad_re(a);
      Real* gai = grad_im(a);
      const Real* ar = a.real().data();
      const Real* ai = a.imag().data();
      for (int64_t k = 0; k < n; ++k)
        bwd(ar[k], ai[k], o.re[k], o.im[k], o.grad_re[k], o.grad_im[k],
            gar[k], gai[k]);
    });
  }
  return out;
}

// Output position k reads input offset map[k] along one gathered axis
// (map value -1 means zero fill). Covers narrow and both paddings.
template <typename Real>
CT<Real> gather_axis(const CT<Real>& a, int axis,
                     std::shared_ptr<std::vector<int64_t>> map) {
  const int ax = normalize_axis(axis, a.rank());
  const Shape& in_shape = a.shape();
  int64_t outer = 1, inner = 1;
  for (int d = 0; d < ax; ++d) outer *= in_shape[d];
  for (int d = ax + 1; d < a.rank(); ++d) inner *= in_shape[d];
  const int64_t n_in = in_shape[ax];
  const int64_t n_out = static_cast<int64_t>(map->size());
  Shape shape = in_shape;
  shape[ax] = n_out;
  CT<Real> out = make_output<Real>(shape, a.is_real());
  const Real* ar = a.real().data();
  const Real* ai = a.imag().data();
  Real* orr = out.mutable_real().data();
  Real* oi = out.mutable_imag().data();
  for (int64_t o = 0; o < outer; ++o) {
    for (int64_t j = 0; j < n_out; ++j) {
      const int64_t src = (*map)[j];
      if (src < 0) continue;
      const int64_t ib = (o * n_in + src) * inner;
      const int64_t ob = (o * n_out + j) * inner;
      std::copy(ar + ib, ar + ib + inner, orr + ob);
      std::copy(ai + ib, ai + ib + inner, oi + ob);
    }
  }
  if (needs_grad(a)) {
    record(out, [a, map, outer, inner, n_in, n_out](detail::TensorNode<Real>& g) {
      Real* gar = grad_re(a);
      Real* gai = grad_im(a);
      for (int64_t o = 0; o < outer; ++o) {
        for (int64_t j = 0; j < n_out; ++j) {
          const int64_t src = (*map)[j];
          if (src < 0) continue;
          const int64_t ib = (o * n_in + src) * inner;
          const int64_t ob = (o * n_out + j) * inner;
          for (int64_t i = 0; i < inner; ++i) {
            gar[ib + i] += g.grad_re[ob + i];
            gai[ib + i] += g.grad_im[ob + i];
          }
        }
      }
    });
  }
  return out;
}

}  // namespace

int64_t reflect_index(int64_t i, int64_t n) {
  if (n == 1) return 0;
  const int64_t period = 2 * (n - 1);
  int64_t m = i % period;
  if (m < 0) m += period;
  return m < n ? m : period - m;
}

template <typename Real>
CT<Real> add(const CT<Real>& a, const CT<Real>& b) {
  return binary(a, b, BinaryKind::kAdd);
}
template <typename Real>
CT<Real> sub(const CT<Real>& a, const CT<Real>& b) {
  return binary(a, b, BinaryKind::kSub);
}
template <typename Real>
CT<Real> mul(const CT<Real>& a, const CT<Real>& b) {
  return binary(a, b, BinaryKind::kMul);
}
template <typename Real>
CT<Real> div(const CT<Real>& a, const CT<Real>& b) {
  return binary(a, b, BinaryKind::kDiv);
}

template <typename Real>
CT<Real> scale(const CT<Real>& a, std::complex<Real> alpha) {
  const Real sr = alpha.real(), si = alpha.imag();
  return unary(
      a, a.is_real() && si == Real(0),
      [=](Real r, Real i, Real& o_r, Real& o_i) {
        o_r = sr * r - si * i;
        o_i = sr * i + si * r;
      },
      [=](Real, Real, Real, Real, Real gr, Real gi, Real& ga_r, Real& ga_i) {
        ga_r += gr * sr + gi * si;
        ga_i += gi * sr - gr * si;
      });
}

template <typename Real>
CT<Real> add_scalar(const CT<Real>& a, std::complex<Real> c) {
  const Real cr = c.real(), ci = c.imag();
  return unary(
      a, a.is_real() && ci == Real(0),
      [=](Real r, Real i, Real& o_r, Real& o_i) {
        o_r = r + cr;
        o_i = i + ci;
      },
      [](Real, Real, Real, Real, Real gr, Real gi, Real& ga_r, Real& ga_i) {
        ga_r += gr;
        ga_i += gi;
      });
}

template <typename Real>
CT<Real> neg(const CT<Real>& a) {
  return scale(a, std::complex<Real>(-1, 0));
}

template <typename Real>
CT<Real> conj(const CT<Real>& a) {
  return unary(
      a, a.is_real(),
      [](Real r, Real i, Real& o_r, Real& o_i) {
        o_r = r;
        o_i = -i;
      },
      [](Real, Real, Real, Real, Real gr, Real gi, Real& ga_r, Real& ga_i) {
        ga_r += gr;
        ga_i -= gi;
      });
}

template <typename Real>
CT<Real> abs(const CT<Real>& a) {
  return unary(
      a, true,
      [](Real r, Real i, Real& o_r, Real& o_i) {
        o_r = std::hypot(r, i);
        o_i = 0;
      },
      [](Real r, Real i, Real m, Real, Real gr, Real, Real& ga_r, Real& ga_i) {
        if (m > Real(0)) {
          ga_r += gr * r / m;
          ga_i += gr * i / m;
        }
      });
}

template <typename Real>
CT<Real> abs2(const CT<Real>& a) {
  return unary(
      a, true,
      [](Real r, Real i, Real& o_r, Real& o_i) {
        o_r = r * r + i * i;
        o_i = 0;
      },
      [](Real r, Real i, Real, Real, Real gr, Real, Real& ga_r, Real& ga_i) {
        ga_r += 2 * gr * r;
        ga_i += 2 * gr * i;
      });
}

template <typename Real>
CT<Real> real_part(const CT<Real>& a) {
  return unary(
      a, true,
      [](Real r, Real, Real& o_r, Real& o_i) {
        o_r = r;
        o_i = 0;
      },
      [](Real, Real, Real, Real, Real gr, Real, Real& ga_r, Real&) { ga_r += gr; });
}

template <typename Real>
CT<Real> imag_part(const CT<Real>& a) {
  return unary(
      a, true,
      [](Real, Real i, Real& o_r, Real& o_i) {
        o_r = i;
        o_i = 0;
      },
      [](Real, Real, Real, Real, Real gr, Real, Real&, Real& ga_i) { ga_i += gr; });
}

template <typename Real>
CT<Real> make_complex(const CT<Real>& re, const CT<Real>& im) {
  if (re.shape() != im.shape())
    throw DimensionError("make_complex: shape mismatch " + to_string(re.shape()) +
                         " vs " + to_string(im.shape()));
  CT<Real> out = make_output<Real>(re.shape(), false);
  std::copy(re.real().begin(), re.real().end(), out.mutable_real().begin());
  std::copy(im.real().begin(), im.real().end(), out.mutable_imag().begin());
  if (needs_grad(re, im)) {
    record(out, [re, im](detail::TensorNode<Real>& o) {
      const size_t n = o.re.size();
      if (re.requires_grad()) {
        Real* g = grad_re(re);
        for (size_t k = 0; k < n; ++k) g[k] += o.grad_re[k];
      }
      if (im.requires_grad()) {
        Real* g = grad_re(im);
        for (size_t k = 0; k < n; ++k) g[k] += o.grad_im[k];
      }
    });
  }
  return out;
}

template <typename Real>
CT<Real> log(const CT<Real>& a) {
  return unary(
      a, true,
      [](Real r, Real, Real& o_r, Real& o_i) {
        o_r = std::log(r);
        o_i = 0;
      },
      [](Real r, Real, Real, Real, Real gr, Real, Real& ga_r, Real&) { ga_r += gr / r; });
}

template <typename Real>
CT<Real> exp(const CT<Real>& a) {
  return unary(
      a, true,
      [](Real r, Real, Real& o_r, Real& o_i) {
        o_r = std::exp(r);
        o_i = 0;
      },
      [](Real, Real, Real e, Real, Real gr, Real, Real& ga_r, Real&) { ga_r += gr * e; });
}

template <typename Real>
CT<Real> sqrt(const CT<Real>& a) {
  return unary(
      a, true,
      [](Real r, Real, Real& o_r, Real& o_i) {
        o_r = std::sqrt(r);
        o_i = 0;
      },
      [](Real, Real, Real s, Real, Real gr, Real, Real& ga_r, Real&) {
        if (s > Real(0)) ga_r += gr / (2 * s);
      });
}

template <typename Real>
CT<Real> clamp(const CT<Real>& a, Real lo, Real hi) {
  return unary(
      a, true,
      [=](Real r, Real, Real& o_r, Real& o_i) {
        o_r = std::min(std::max(r, lo), hi);
        o_i = 0;
      },
      [=](Real r, Real, Real, Real, Real gr, Real, Real& ga_r, Real&) {
        if (r >= lo && r <= hi) ga_r += gr;
      });
}

template <typename Real>
CT<Real> crelu(const CT<Real>& a) {
  return unary(
      a, a.is_real(),
      [](Real r, Real i, Real& o_r, Real& o_i) {
        o_r = r > Real(0) ? r : Real(0);
        o_i = i > Real(0) ? i : Real(0);
      },
      [](Real r, Real i, Real, Real, Real gr, Real gi, Real& ga_r, Real& ga_i) {
        if (r > Real(0)) ga_r += gr;
        if (i > Real(0)) ga_i += gi;
      });
}

template <typename Real>
CT<Real> softmax(const CT<Real>& a) {
  if (a.rank() == 0) throw DimensionError("softmax on a scalar");
  const int64_t len = a.shape().back();
  const int64_t rows = a.numel() / std::max<int64_t>(len, 1);
  CT<Real> out = make_output<Real>(a.shape(), true);
  const Real* x = a.real().data();
  Real* y = out.mutable_real().data();
  for (int64_t r = 0; r < rows; ++r) {
    const Real* xr = x + r * len;
    Real* yr = y + r * len;
    const Real m = *std::max_element(xr, xr + len);
    Real s = 0;
    for (int64_t j = 0; j < len; ++j) s += (yr[j] = std::exp(xr[j] - m));
    for (int64_t j = 0; j < len; ++j) yr[j] /= s;
  }
  if (needs_grad(a)) {
    record(out, [a, rows, len](detail::TensorNode<Real>& o) {
      Real* ga = grad_re(a);
      for (int64_t r = 0; r < rows; ++r) {
        const Real* yr = o.re.data() + r * len;
        const Real* gr = o.grad_re.data() + r * len;
        Real dot = 0;
        for (int64_t j = 0; j < len; ++j) dot += gr[j] * yr[j];
        for (int64_t j = 0; j < len; ++j) ga[r * len + j] += yr[j] * (gr[j] - dot);
      }
    });
  }
  return out;
}

template <typename Real>
CT<Real> dropout(const CT<Real>& a, double p, Rng& rng) {
  if (p <= 0.0) return a;
  if (p >= 1.0) throw ConfigError("dropout probability must be < 1");
  auto mask = std::make_shared<std::vector<Real>>(a.numel());
  const Real keep_scale = static_cast<Real>(1.0 / (1.0 - p));
  for (auto& m : *mask) m = rng.uniform() >= p ? keep_scale : Real(0);
  CT<Real> out = make_output<Real>(a.shape(), a.is_real());
  for (int64_t k = 0; k < a.numel(); ++k) {
    out.mutable_real()[k] = a.real()[k] * (*mask)[k];
    out.mutable_imag()[k] = a.imag()[k] * (*mask)[k];
  }
  if (needs_grad(a)) {
    record(out, [a, mask](detail::TensorNode<Real>& o) {
      Real* gr = grad_re(a);
      Real* gi = grad_im(a);
      for (size_t k = 0; k < mask->size(); ++k) {
        gr[k] += o.grad_re[k] * (*mask)[k];
        gi[k] += o.grad_im[k] * (*mask)[k];
      }
    });
  }
  return out;
}

template <typename Real>
CT<Real> reshape(const CT<Real>& a, const Shape& shape) {
  Shape target = shape;
  int64_t known = 1;
  int infer = -1;
  for (size_t d = 0; d < target.size(); ++d) {
    if (target[d] == -1) {
      if (infer >= 0) throw DimensionError("reshape: more than one -1");
      infer = static_cast<int>(d);
    } else {
      known *= target[d];
    }
  }
  if (infer >= 0) target[infer] = known ? a.numel() / known : 0;
  if (numel(target) != a.numel())
    throw DimensionError("reshape: cannot view " + to_string(a.shape()) + " as " +
                         to_string(shape));
  CT<Real> out(target, std::vector<Real>(a.real().begin(), a.real().end()),
               std::vector<Real>(a.imag().begin(), a.imag().end()));
  out.node().is_real = a.is_real();
  if (needs_grad(a)) {
    record(out, [a](detail::TensorNode<Real>& o) {
      Real* gr = grad_re(a);
      Real* gi = grad_im(a);
      for (size_t k = 0; k < o.re.size(); ++k) {
        gr[k] += o.grad_re[k];
        gi[k] += o.grad_im[k];
      }
    });
  }
  return out;
}

template <typename Real>
CT<Real> permute(const CT<Real>& a, const std::vector<int>& perm) {
  const int rank = a.rank();
  if (static_cast<int>(perm.size()) != rank)
    throw DimensionError("permute: permutation rank mismatch");
  std::vector<int> p(rank);
  std::vector<bool> seen(rank, false);
  for (int d = 0; d < rank; ++d) {
    p[d] = normalize_axis(perm[d], rank);
    if (seen[p[d]]) throw DimensionError("permute: repeated axis");
    seen[p[d]] = true;
  }
  const Shape& in = a.shape();
  Shape shape(rank);
  for (int d = 0; d < rank; ++d) shape[d] = in[p[d]];
  const auto in_strides = contiguous_strides(in);
  // Offsets into the input, in output order.
  auto src = std::make_shared<std::vector<int64_t>>(a.numel());
  {
    std::vector<int64_t> idx(rank, 0);
    int64_t off = 0;
    for (int64_t k = 0; k < a.numel(); ++k) {
      (*src)[k] = off;
      for (int d = rank - 1; d >= 0; --d) {
        ++idx[d];
        off += in_strides[p[d]];
        if (idx[d] < shape[d]) break;
        off -= in_strides[p[d]] * idx[d];
        idx[d] = 0;
      }
    }
  }
  CT<Real> out = make_output<Real>(shape, a.is_real());
  for (int64_t k = 0; k < a.numel(); ++k) {
    out.mutable_real()[k] = a.real()[(*src)[k]];
    out.mutable_imag()[k] = a.imag()[(*src)[k]];
  }
  if (needs_grad(a)) {
    record(out, [a, src](detail::TensorNode<Real>& o) {
      Real* gr = grad_re(a);
      Real* gi = grad_im(a);
      for (size_t k = 0; k < src->size(); ++k) {
        gr[(*src)[k]] += o.grad_re[k];
        gi[(*src)[k]] += o.grad_im[k];
      }
    });
  }
  return out;
}

template <typename Real>
CT<Real> transpose(const CT<Real>& a, int d0, int d1) {
  std::vector<int> perm(a.rank());
  std::iota(perm.begin(), perm.end(), 0);
  std::swap(perm[normalize_axis(d0, a.rank())], perm[normalize_axis(d1, a.rank())]);
  return permute(a, perm);
}

template <typename Real>
CT<Real> concat(const std::vector<CT<Real>>& parts, int axis) {
  if (parts.empty()) throw DimensionError("concat of zero tensors");
  const int rank = parts[0].rank();
  const int ax = normalize_axis(axis, rank);
  Shape shape = parts[0].shape();
  shape[ax] = 0;
  bool all_real = true;
  for (const auto& t : parts) {
    if (t.rank() != rank) throw DimensionError("concat: rank mismatch");
    for (int d = 0; d < rank; ++d)
      if (d != ax && t.shape()[d] != parts[0].shape()[d])
        throw DimensionError("concat: shape mismatch " + to_string(t.shape()) +
                             " vs " + to_string(parts[0].shape()) + " on axis " +
                             std::to_string(d));
    shape[ax] += t.shape()[ax];
    all_real = all_real && t.is_real();
  }
  int64_t outer = 1, inner = 1;
  for (int d = 0; d < ax; ++d) outer *= shape[d];
  for (int d = ax + 1; d < rank; ++d) inner *= shape[d];
  CT<Real> out = make_output<Real>(shape, all_real);
  const int64_t out_row = shape[ax] * inner;
  int64_t col = 0;
  for (const auto& t : parts) {
    const int64_t row = t.shape()[ax] * inner;
    for (int64_t o = 0; o < outer; ++o) {
      std::copy_n(t.real().data() + o * row, row,
                  out.mutable_real().data() + o * out_row + col);
      std::copy_n(t.imag().data() + o * row, row,
                  out.mutable_imag().data() + o * out_row + col);
    }
    col += row;
  }
  bool any = false;
  for (const auto& t : parts) any = any || detail::tracks(t);
  if (grad_enabled() && any) {
    record(out, [parts, outer, inner, out_row, ax](detail::TensorNode<Real>& o) {
      int64_t col = 0;
      for (const auto& t : parts) {
        const int64_t row = t.shape()[ax] * inner;
        if (t.requires_grad()) {
          Real* gr = grad_re(t);
          Real* gi = grad_im(t);
          for (int64_t b = 0; b < outer; ++b)
            for (int64_t i = 0; i < row; ++i) {
              gr[b * row + i] += o.grad_re[b * out_row + col + i];
              gi[b * row + i] += o.grad_im[b * out_row + col + i];
            }
        }
        col += row;
      }
    });
  }
  return out;
}

template <typename Real>
CT<Real> narrow(const CT<Real>& a, int axis, int64_t start, int64_t length) {
  const int ax = normalize_axis(axis, a.rank());
  if (start < 0 || length < 0 || start + length > a.shape()[ax])
    throw DimensionError("narrow: range [" + std::to_string(start) + ", " +
                         std::to_string(start + length) + ") outside axis of size " +
                         std::to_string(a.shape()[ax]));
  auto map = std::make_shared<std::vector<int64_t>>(length);
  std::iota(map->begin(), map->end(), start);
  return gather_axis(a, ax, map);
}

template <typename Real>
std::vector<CT<Real>> split(const CT<Real>& a, int axis, const std::vector<int64_t>& sizes) {
  const int ax = normalize_axis(axis, a.rank());
  const int64_t total = std::accumulate(sizes.begin(), sizes.end(), int64_t{0});
  if (total != a.shape()[ax]) throw DimensionError("split: sizes do not cover axis");
  std::vector<CT<Real>> out;
  int64_t start = 0;
  for (int64_t s : sizes) {
    out.push_back(narrow(a, ax, start, s));
    start += s;
  }
  return out;
}

template <typename Real>
CT<Real> pad_reflect(const CT<Real>& a, int axis, int64_t before, int64_t after) {
  const int ax = normalize_axis(axis, a.rank());
  const int64_t n = a.shape()[ax];
  if (n < 1) throw DimensionError("pad_reflect on an empty axis");
  auto map = std::make_shared<std::vector<int64_t>>(n + before + after);
  for (int64_t j = 0; j < static_cast<int64_t>(map->size()); ++j)
    (*map)[j] = reflect_index(j - before, n);
  return gather_axis(a, ax, map);
}

template <typename Real>
CT<Real> pad_zero(const CT<Real>& a, int axis, int64_t before, int64_t after) {
  const int ax = normalize_axis(axis, a.rank());
  const int64_t n = a.shape()[ax];
  auto map = std::make_shared<std::vector<int64_t>>(n + before + after, -1);
  for (int64_t j = 0; j < n; ++j) (*map)[before + j] = j;
  return gather_axis(a, ax, map);
}

template <typename Real>
CT<Real> sum(const CT<Real>& a) {
  CT<Real> out = make_output<Real>(Shape{}, a.is_real());
  Real sr = 0, si = 0;
  for (int64_t k = 0; k < a.numel(); ++k) {
    sr += a.real()[k];
    si += a.imag()[k];
  }
  out.mutable_real()[0] = sr;
  out.mutable_imag()[0] = si;
  if (needs_grad(a)) {
    record(out, [a](detail::TensorNode<Real>& o) {
      Real* gr = grad_re(a);
      Real* gi = grad_im(a);
      for (int64_t k = 0; k < a.numel(); ++k) {
        gr[k] += o.grad_re[0];
        gi[k] += o.grad_im[0];
      }
    });
  }
  return out;
}

template <typename Real>
CT<Real> mean(const CT<Real>& a) {
  return scale(sum(a), std::complex<Real>(Real(1) / static_cast<Real>(a.numel()), 0));
}

template <typename Real>
CT<Real> sum(const CT<Real>& a, int axis, bool keepdim) {
  const int ax = normalize_axis(axis, a.rank());
  const Shape& in = a.shape();
  int64_t outer = 1, inner = 1;
  for (int d = 0; d < ax; ++d) outer *= in[d];
  for (int d = ax + 1; d < a.rank(); ++d) inner *= in[d];
  const int64_t n = in[ax];
  Shape shape = in;
  if (keepdim)
    shape[ax] = 1;
  else
    shape.erase(shape.begin() + ax);
  CT<Real> out = make_output<Real>(shape, a.is_real());
  Real* orr = out.mutable_real().data();
  Real* oi = out.mutable_imag().data();
  for (int64_t o = 0; o < outer; ++o)
    for (int64_t j = 0; j < n; ++j)
      for (int64_t i = 0; i < inner; ++i) {
        orr[o * inner + i] += a.real()[(o * n + j) * inner + i];
        oi[o * inner + i] += a.imag()[(o * n + j) * inner + i];
      }
  if (needs_grad(a)) {
    record(out, [a, outer, inner, n](detail::TensorNode<Real>& g) {
      Real* gr = grad_re(a);
      Real* gi = grad_im(a);
      for (int64_t o = 0; o < outer; ++o)
        for (int64_t j = 0; j < n; ++j)
          for (int64_t i = 0; i < inner; ++i) {
            gr[(o * n + j) * inner + i] += g.grad_re[o * inner + i];
            gi[(o * n + j) * inner + i] += g.grad_im[o * inner + i];
          }
    });
  }
  return out;
}

template <typename Real>
CT<Real> mean(const CT<Real>& a, int axis, bool keepdim) {
  const int64_t n = a.shape()[normalize_axis(axis, a.rank())];
  return scale(sum(a, axis, keepdim), std::complex<Real>(Real(1) / static_cast<Real>(n), 0));
}

#define CTFT_INSTANTIATE_OPS(R)                                                     \
  template CT<R> add(const CT<R>&, const CT<R>&);                                   \
  template CT<R> sub(const CT<R>&, const CT<R>&);                                   \
  template CT<R> mul(const CT<R>&, const CT<R>&);                                   \
  template CT<R> div(const CT<R>&, const CT<R>&);                                   \
  template CT<R> scale(const CT<R>&, std::complex<R>);                              \
  template CT<R> add_scalar(const CT<R>&, std::complex<R>);                         \
  template CT<R> neg(const CT<R>&);                                                 \
  template CT<R> conj(const CT<R>&);                                                \
  template CT<R> abs(const CT<R>&);                                                 \
  template CT<R> abs2(const CT<R>&);                                                \
  template CT<R> real_part(const CT<R>&);                                           \
  template CT<R> imag_part(const CT<R>&);                                           \
  template CT<R> make_complex(const CT<R>&, const CT<R>&);                          \
  template CT<R> log(const CT<R>&);                                                 \
  template CT<R> exp(const CT<R>&);                                                 \
  template CT<R> sqrt(const CT<R>&);                                                \
  template CT<R> clamp(const CT<R>&, R, R);                                         \
  template CT<R> softmax(const CT<R>&);                                             \
  template CT<R> crelu(const CT<R>&);                                               \
  template CT<R> dropout(const CT<R>&, double, Rng&);                               \
  template CT<R> reshape(const CT<R>&, const Shape&);                               \
  template CT<R> permute(const CT<R>&, const std::vector<int>&);                    \
  template CT<R> transpose(const CT<R>&, int, int);                                 \
  template CT<R> concat(const std::vector<CT<R>>&, int);                            \
  template CT<R> narrow(const CT<R>&, int, int64_t, int64_t);                       \
  template std::vector<CT<R>> split(const CT<R>&, int, const std::vector<int64_t>&); \
  template CT<R> pad_reflect(const CT<R>&, int, int64_t, int64_t);                  \
  template CT<R> pad_zero(const CT<R>&, int, int64_t, int64_t);                     \
  template CT<R> sum(const CT<R>&);                                                 \
  template CT<R> mean(const CT<R>&);                                                \
  template CT<R> sum(const CT<R>&, int, bool);                                      \
  template CT<R> mean(const CT<R>&, int, bool);

CTFT_INSTANTIATE_OPS(float)
CTFT_INSTANTIATE_OPS(double)

}  // namespace ctft
