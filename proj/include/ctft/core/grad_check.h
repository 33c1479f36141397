// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// Central-difference verification of reverse-mode gradients.

#pragma once

#include <functional>
#include <string>

#include "ctft/core/parameter.h"

namespace ctft {

struct GradCheckOptions {
  double step = 1e-6;
  // Entries checked per parameter (real and imaginary part each); <= 0
  // checks every entry. Sampled entries are drawn from `seed`.
  int64_t max_entries_per_param = 0;
  uint64_t seed = 0;
  // Five-point stencil (error O(step^4)) instead of the central difference.
  // Allows a larger step, which lowers round-off on smooth losses.
  bool fourth_order = false;
  // Ridders' extrapolation over central differences from `step` down by
  // 1.4x per stage, keeping the estimate with the smallest error bound.
  // Suits losses whose curvature and round-off leave no single good step.
  bool ridders = false;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  int64_t worst_index = -1;
  bool worst_is_imag = false;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  int64_t checked = 0;
};

// Relative error |a - b| / max(|a|, |b|, 1e-8).
double relative_error(double a, double b);

// `loss` must rebuild its graph from `params` on every call and return a
// real scalar. Throws DeterminismError if two evaluations disagree.
template <typename Real>
GradCheckResult grad_check(const std::function<ComplexTensor<Real>()>& loss,
                           const ParameterList<Real>& params,
                           const GradCheckOptions& options = {});

}  // namespace ctft
