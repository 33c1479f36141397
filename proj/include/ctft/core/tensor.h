// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// ComplexTensor: planar (real, imag) N-d array with reverse-mode autodiff.
//
// Gradients follow the real-pair convention: the gradient of a real loss L
// with respect to z = x + jy is stored as the pair (dL/dx, dL/dy). For a
// holomorphic map w = f(z) this gives dL/dz = dL/dw * conj(f'(z)), which is
// how the backward rules in ops.cc / linalg.cc are written.

#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "ctft/core/error.h"
#include "ctft/core/random.h"
#include "ctft/core/shape.h"

namespace ctft {

namespace detail {

template <typename Real>
struct TensorNode {
  Shape shape;
  std::vector<Real> re;
  std::vector<Real> im;
  std::vector<Real> grad_re;
  std::vector<Real> grad_im;
  bool requires_grad = false;
  bool is_real = false;
  bool is_leaf = true;
  bool retain_grad = false;

  bool has_grad() const { return !grad_re.empty(); }
  void ensure_grad() {
    if (grad_re.empty()) {
      grad_re.assign(re.size(), Real(0));
      grad_im.assign(re.size(), Real(0));
    }
  }
  void release_grad() {
    std::vector<Real>().swap(grad_re);
    std::vector<Real>().swap(grad_im);
  }
};

}  // namespace detail

// Thread-local switch consulted by every op before recording on the tape.
bool grad_enabled();
void set_grad_enabled(bool enabled);

class NoGradGuard {
 public:
  NoGradGuard() : previous_(grad_enabled()) { set_grad_enabled(false); }
  ~NoGradGuard() { set_grad_enabled(previous_); }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

// Ordered record of differentiable operations on one thread. Nodes are
// appended as ops execute, so every node's inputs precede it.
template <typename Real>
class Tape {
 public:
  using Node = detail::TensorNode<Real>;
  using BackwardFn = std::function<void(Node& output)>;

  static Tape& current();

  void record(std::shared_ptr<Node> output, BackwardFn fn);
  size_t size() const { return entries_.size(); }
  void clear() { entries_.clear(); }

  // Visits every node once, newest first, then empties the tape. Gradients of
  // intermediate tensors are dropped after use unless retain_grad was set.
  void replay();

 private:
  struct Entry {
    std::shared_ptr<Node> output;
    BackwardFn backward;
  };
  std::vector<Entry> entries_;
};

template <typename Real>
class ComplexTensor {
 public:
  using value_type = Real;
  using Complex = std::complex<Real>;
  using Node = detail::TensorNode<Real>;

  ComplexTensor() = default;

  // Zero-filled tensor.
  explicit ComplexTensor(const Shape& shape, bool is_real = false)
      : node_(std::make_shared<Node>()) {
    node_->shape = shape;
    node_->re.assign(ctft::numel(shape), Real(0));
    node_->im.assign(ctft::numel(shape), Real(0));
    node_->is_real = is_real;
  }

  ComplexTensor(const Shape& shape, std::vector<Real> re, std::vector<Real> im)
      : node_(std::make_shared<Node>()) {
    const auto n = static_cast<size_t>(ctft::numel(shape));
    if (re.size() != n || im.size() != n)
      throw DimensionError("payload size does not match shape " +
                           to_string(shape));
    node_->shape = shape;
    node_->re = std::move(re);
    node_->im = std::move(im);
  }

  static ComplexTensor zeros(const Shape& shape) { return ComplexTensor(shape); }

  static ComplexTensor full(const Shape& shape, Complex value) {
    ComplexTensor t(shape);
    std::fill(t.node_->re.begin(), t.node_->re.end(), value.real());
    std::fill(t.node_->im.begin(), t.node_->im.end(), value.imag());
    t.node_->is_real = value.imag() == Real(0);
    return t;
  }

  static ComplexTensor from_real(const Shape& shape, std::vector<Real> re) {
    std::vector<Real> im(re.size(), Real(0));
    ComplexTensor t(shape, std::move(re), std::move(im));
    t.node_->is_real = true;
    return t;
  }

  static ComplexTensor scalar(Complex value) { return full(Shape{}, value); }

  // Real and imaginary parts drawn independently from U(lo, hi).
  static ComplexTensor uniform(const Shape& shape, Rng& rng, double lo = -1.0,
                               double hi = 1.0) {
    ComplexTensor t(shape);
    for (auto& v : t.node_->re) v = static_cast<Real>(rng.uniform(lo, hi));
    for (auto& v : t.node_->im) v = static_cast<Real>(rng.uniform(lo, hi));
    return t;
  }

  static ComplexTensor uniform_real(const Shape& shape, Rng& rng,
                                    double lo = -1.0, double hi = 1.0) {
    ComplexTensor t(shape, true);
    for (auto& v : t.node_->re) v = static_cast<Real>(rng.uniform(lo, hi));
    return t;
  }

  bool defined() const { return static_cast<bool>(node_); }
  const Shape& shape() const { return node_->shape; }
  int rank() const { return static_cast<int>(node_->shape.size()); }
  int64_t size(int axis) const {
    return node_->shape[normalize_axis(axis, rank())];
  }
  int64_t numel() const { return static_cast<int64_t>(node_->re.size()); }
  bool is_real() const { return node_->is_real; }

  std::span<const Real> real() const { return node_->re; }
  std::span<const Real> imag() const { return node_->im; }

  // In-place access for optimizers and loaders. Bypasses the tape and must
  // not be used on tensors that are inputs of recorded operations.
  std::span<Real> mutable_real() { return node_->re; }
  std::span<Real> mutable_imag() { return node_->im; }

  Complex flat(int64_t i) const { return {node_->re[i], node_->im[i]}; }
  Complex item() const {
    if (numel() != 1) throw DimensionError("item() on non-scalar tensor");
    return flat(0);
  }
  Complex at(std::initializer_list<int64_t> index) const {
    if (static_cast<int>(index.size()) != rank())
      throw DimensionError("index rank mismatch");
    int64_t offset = 0;
    int d = 0;
    for (int64_t i : index) offset = offset * node_->shape[d++] + i;
    return flat(offset);
  }

  bool requires_grad() const { return node_ && node_->requires_grad; }
  ComplexTensor& set_requires_grad(bool flag) {
    if (!node_->is_leaf)
      throw Error("requires_grad can only be set on leaf tensors");
    node_->requires_grad = flag;
    if (!flag) node_->release_grad();
    return *this;
  }
  bool is_leaf() const { return node_->is_leaf; }
  void retain_grad() { node_->retain_grad = true; }

  bool has_grad() const { return node_->has_grad(); }
  std::span<const Real> grad_real() const { return node_->grad_re; }
  std::span<const Real> grad_imag() const { return node_->grad_im; }
  void zero_grad() {
    if (node_->has_grad()) {
      std::fill(node_->grad_re.begin(), node_->grad_re.end(), Real(0));
      std::fill(node_->grad_im.begin(), node_->grad_im.end(), Real(0));
    }
  }
  void clear_grad() { node_->release_grad(); }

  // Deep copy, detached from any graph.
  ComplexTensor clone() const {
    ComplexTensor t(node_->shape, node_->re, node_->im);
    t.node_->is_real = node_->is_real;
    return t;
  }
  ComplexTensor detach() const { return clone(); }

  template <typename Other>
  ComplexTensor<Other> cast() const {
    std::vector<Other> re(node_->re.begin(), node_->re.end());
    std::vector<Other> im(node_->im.begin(), node_->im.end());
    ComplexTensor<Other> t(node_->shape, std::move(re), std::move(im));
    t.node().is_real = node_->is_real;
    return t;
  }

  Node& node() const { return *node_; }
  const std::shared_ptr<Node>& node_ptr() const { return node_; }
  bool same(const ComplexTensor& other) const { return node_ == other.node_; }

 private:
  std::shared_ptr<Node> node_;
};

struct BackwardStatus {
  // Loss did not depend on any tracked tensor; nothing was propagated.
  bool detached = false;
  size_t nodes = 0;
};

// Propagates d(loss)/d(.) to every tracked tensor recorded on this thread's
// tape, then resets the tape. The loss must be a real scalar.
template <typename Real>
BackwardStatus backward(const ComplexTensor<Real>& loss);

using Tensor32 = ComplexTensor<float>;
using Tensor64 = ComplexTensor<double>;

namespace detail {

template <typename Real>
bool tracks(const ComplexTensor<Real>& t) {
  return t.defined() && t.requires_grad();
}

template <typename Real, typename... Rest>
bool needs_grad(const ComplexTensor<Real>& first, const Rest&... rest) {
  if (!grad_enabled()) return false;
  return (tracks(first) || ... || tracks(rest));
}

// Marks `out` as produced by a recorded op and appends its backward rule.
template <typename Real>
void record(ComplexTensor<Real>& out,
            typename Tape<Real>::BackwardFn backward) {
  out.node().requires_grad = true;
  out.node().is_leaf = false;
  Tape<Real>::current().record(out.node_ptr(), std::move(backward));
}

// Gradient buffers of `t`, allocated on first use.
template <typename Real>
Real* grad_re(const ComplexTensor<Real>& t) {
  t.node().ensure_grad();
  return t.node().grad_re.data();
}
template <typename Real>
Real* grad_im(const ComplexTensor<Real>& t) {
  t.node().ensure_grad();
  return t.node().grad_im.data();
}

}  // namespace detail

}  // namespace ctft
