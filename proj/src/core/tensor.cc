// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "ctft/core/tensor.h"

namespace ctft {

namespace {
thread_local bool g_grad_enabled = true;
}  // namespace

bool grad_enabled() { return g_grad_enabled; }
void set_grad_enabled(bool enabled) { g_grad_enabled = enabled; }

template <typename Real>
Tape<Real>& Tape<Real>::current() {
  thread_local Tape<Real> tape;
  return tape;
}

template <typename Real>
void Tape<Real>::record(std::shared_ptr<Node> output, BackwardFn fn) {
  entries_.push_back({std::move(output), std::move(fn)});
}

template <typename Real>
void Tape<Real>::replay() {
  // Entries are moved out first so that closures recording nothing new can
  // safely run while the tape itself is empty.
  std::vector<Entry> entries;
  entries.swap(entries_);
  for (auto it = entries.rbegin(); it != entries.rend(); ++it) {
    Node& out = *it->output;
    if (out.has_grad()) it->backward(out);
    it->backward = nullptr;
    if (!out.is_leaf && !out.retain_grad) out.release_grad();
    it->output.reset();
  }
}

template <typename Real>
BackwardStatus backward(const ComplexTensor<Real>& loss) {
  auto& tape = Tape<Real>::current();
  if (loss.numel() != 1) {
    tape.clear();
    throw DimensionError("backward() requires a scalar loss, got shape " +
                         to_string(loss.shape()));
  }
  if (!loss.is_real() && loss.imag()[0] != Real(0)) {
    tape.clear();
    throw DomainError("backward() requires a real-valued loss");
  }
  BackwardStatus status;
  status.nodes = tape.size();
  if (!loss.requires_grad()) {
    tape.clear();
    status.detached = true;
    return status;
  }
  detail::grad_re(loss)[0] += Real(1);
  tape.replay();
  return status;
}

template class Tape<float>;
template class Tape<double>;
template BackwardStatus backward(const ComplexTensor<float>&);
template BackwardStatus backward(const ComplexTensor<double>&);

}  // namespace ctft
