// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cstdint>

namespace ctft::detail {

// Planar row-major matrix operand. rows/cols are the logical extents after
// the optional transpose; im may be null for a real operand.
template <typename Real>
struct MatRef {
  const Real* re;
  const Real* im;
  int64_t rows;
  int64_t cols;
  bool trans = false;
};

// out_r (+)= rr * Pr Qr + ii * Pi Qi
// out_i (+)= ri * Pr Qi + ir * Pi Qr
struct Coef {
  double rr, ii, ri, ir;
};

template <typename Real>
void real_gemm(const Real* p, const MatRef<Real>& P, const Real* q, const MatRef<Real>& Q,
               Real* out, Real coef) {
  using RM = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using CMap = Eigen::Map<const RM>;
  Eigen::Map<RM> o(out, P.rows, Q.cols);
  if (!P.trans && !Q.trans) {
    o.noalias() += coef * (CMap(p, P.rows, P.cols) * CMap(q, Q.rows, Q.cols));
  } else if (P.trans && !Q.trans) {
    o.noalias() += coef * (CMap(p, P.cols, P.rows).transpose() * CMap(q, Q.rows, Q.cols));
  } else if (!P.trans && Q.trans) {
    o.noalias() += coef * (CMap(p, P.rows, P.cols) * CMap(q, Q.cols, Q.rows).transpose());
  } else {
    o.noalias() +=
        coef * (CMap(p, P.cols, P.rows).transpose() * CMap(q, Q.cols, Q.rows).transpose());
  }
}

template <typename Real>
void cgemm(const MatRef<Real>& P, const MatRef<Real>& Q, Real* out_r, Real* out_i,
           const Coef& c, bool accumulate) {
  if (!accumulate) {
    std::fill_n(out_r, P.rows * Q.cols, Real(0));
    std::fill_n(out_i, P.rows * Q.cols, Real(0));
  }
  if (P.rows == 0 || Q.cols == 0 || P.cols == 0) return;
  if (c.rr != 0) real_gemm(P.re, P, Q.re, Q, out_r, static_cast<Real>(c.rr));
  if (c.ii != 0 && P.im && Q.im) real_gemm(P.im, P, Q.im, Q, out_r, static_cast<Real>(c.ii));
  if (c.ri != 0 && Q.im) real_gemm(P.re, P, Q.im, Q, out_i, static_cast<Real>(c.ri));
  if (c.ir != 0 && P.im) real_gemm(P.im, P, Q.re, Q, out_i, static_cast<Real>(c.ir));
}

}  // namespace ctft::detail
