// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// Activation recomputation. The forward runs untracked and keeps only its
// input; backward re-runs it on the tape and propagates through the copy.

#pragma once

#include <algorithm>
#include <functional>
#include <vector>

#include "ctft/core/parameter.h"
#include "ctft/core/tensor.h"

namespace ctft {

// `f` must be deterministic given its input. `state` lists tensors f mutates
// as a side effect (running statistics); their values are restored after the
// backward re-run so they advance exactly once per step.
template <typename Real>
ComplexTensor<Real> recompute(std::function<ComplexTensor<Real>(const ComplexTensor<Real>&)> f,
                              const ComplexTensor<Real>& x, ParameterList<Real> state = {}) {
  if (!grad_enabled()) return f(x);
  ComplexTensor<Real> y;
  {
    NoGradGuard off;
    y = f(x);
  }
  if (y.same(x)) y = y.clone();
  detail::record(y, [f = std::move(f), x, state = std::move(state)](detail::TensorNode<Real>& out) mutable {
    std::vector<std::vector<Real>> saved_re, saved_im;
    for (const auto& p : state) {
      saved_re.emplace_back(p.tensor.real().begin(), p.tensor.real().end());
      saved_im.emplace_back(p.tensor.imag().begin(), p.tensor.imag().end());
    }
    ComplexTensor<Real> xi = x.clone();
    xi.set_requires_grad(true);
    const bool previous = grad_enabled();
    set_grad_enabled(true);
    ComplexTensor<Real> yi = f(xi);
    set_grad_enabled(previous);
    for (size_t i = 0; i < state.size(); ++i) {
      auto& t = state[i].tensor;
      std::copy(saved_re[i].begin(), saved_re[i].end(), t.mutable_real().begin());
      std::copy(saved_im[i].begin(), saved_im[i].end(), t.mutable_imag().begin());
    }
    if (!yi.requires_grad()) {
      Tape<Real>::current().clear();
      return;
    }
    Real* gr = detail::grad_re(yi);
    Real* gi = detail::grad_im(yi);
    for (size_t k = 0; k < out.grad_re.size(); ++k) {
      gr[k] += out.grad_re[k];
      gi[k] += out.grad_im[k];
    }
    Tape<Real>::current().replay();
    if (!detail::tracks(x) || !xi.has_grad()) return;
    Real* xr = detail::grad_re(x);
    Real* xim = detail::grad_im(x);
    for (int64_t k = 0; k < x.numel(); ++k) {
      xr[k] += xi.grad_real()[k];
      xim[k] += xi.grad_imag()[k];
    }
  });
  return y;
}

}  // namespace ctft
