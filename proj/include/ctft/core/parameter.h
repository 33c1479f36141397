// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ctft/core/tensor.h"

namespace ctft {

template <typename Real>
struct Parameter {
  std::string name;  // module path, e.g. "enc3.conv.weight"
  ComplexTensor<Real> tensor;
};

template <typename Real>
using ParameterList = std::vector<Parameter<Real>>;

template <typename Real>
struct GradientMap {
  // name -> (dL/d real, dL/d imag)
  std::map<std::string, std::pair<std::vector<Real>, std::vector<Real>>> grads;
  // The loss did not depend on any parameter.
  bool detached = false;
};

// Runs backward(loss) and collects the gradients of the named parameters.
// Parameters that received no gradient are omitted from the map.
template <typename Real>
GradientMap<Real> backward(const ComplexTensor<Real>& loss, const ParameterList<Real>& params) {
  GradientMap<Real> out;
  const BackwardStatus status = backward(loss);
  out.detached = status.detached;
  for (const auto& p : params) {
    if (!p.tensor.has_grad()) continue;
    out.grads[p.name] = {std::vector<Real>(p.tensor.grad_real().begin(), p.tensor.grad_real().end()),
                         std::vector<Real>(p.tensor.grad_imag().begin(), p.tensor.grad_imag().end())};
  }
  if (out.grads.empty()) out.detached = true;
  return out;
}

}  // namespace ctft
