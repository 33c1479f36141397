// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <deque>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "ctft/core/parameter.h"
#include "ctft/core/random.h"
#include "ctft/core/tensor.h"

namespace ctft {

enum class Mode { kTrain, kEval };

// Per-call forward state. Dropout draws from rng in train mode; a null rng
// disables dropout.
struct Context {
  Mode mode = Mode::kEval;
  Rng* rng = nullptr;
  bool training() const { return mode == Mode::kTrain; }
};

// Owner of named parameters, buffers and sub-modules. Names are dotted
// module paths built from registration order, e.g. "enc3.bn.beta".
template <typename Real>
class Module {
 public:
  using Tensor = ComplexTensor<Real>;

  Module() = default;
  Module(const Module&) = delete;
  Module& operator=(const Module&) = delete;
  virtual ~Module() = default;

  ParameterList<Real> parameters() const {
    ParameterList<Real> out;
    collect(out, "", false);
    return out;
  }
  // Non-trainable state such as running statistics.
  ParameterList<Real> buffers() const {
    ParameterList<Real> out;
    collect(out, "", true);
    return out;
  }
  const std::vector<std::pair<std::string, Module*>>& children() const { return child_refs_; }

  // Real scalar count: complex entries count twice.
  int64_t count_parameters() const {
    int64_t n = 0;
    for (const auto& p : parameters()) n += p.tensor.numel() * (p.tensor.is_real() ? 1 : 2);
    return n;
  }
  void zero_grad() {
    for (auto& p : parameters()) p.tensor.clear_grad();
  }

 protected:
  Tensor add_parameter(const std::string& name, Tensor t) {
    t.set_requires_grad(true);
    params_.emplace_back(name, t);
    return t;
  }
  Tensor add_buffer(const std::string& name, Tensor t) {
    buffers_.emplace_back(name, t);
    return t;
  }
  template <typename M>
  M& add_module(const std::string& name, std::unique_ptr<M> m) {
    M& ref = *m;
    child_refs_.emplace_back(name, m.get());
    children_.push_back(std::move(m));
    return ref;
  }

 private:
  void collect(ParameterList<Real>& out, const std::string& prefix, bool buffers) const {
    for (const auto& [name, t] : buffers ? buffers_ : params_) out.push_back({prefix + name, t});
    for (const auto& [name, m] : child_refs_) m->collect(out, prefix + name + ".", buffers);
  }

  std::vector<std::pair<std::string, Tensor>> params_;
  std::vector<std::pair<std::string, Tensor>> buffers_;
  std::vector<std::unique_ptr<Module>> children_;
  std::vector<std::pair<std::string, Module*>> child_refs_;
};

}  // namespace ctft
