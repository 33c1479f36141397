// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ctft {

using Shape = std::vector<int64_t>;

int64_t numel(const Shape& shape);
std::string to_string(const Shape& shape);

// Row-major strides for a contiguous tensor of the given shape.
std::vector<int64_t> contiguous_strides(const Shape& shape);

// Numpy-style broadcast of two shapes; throws DimensionError on conflict.
Shape broadcast_shapes(const Shape& a, const Shape& b);

// Resolves a possibly negative axis against a rank.
int normalize_axis(int axis, int rank);

// Maps linear indices of an output shape onto a (broadcast) input shape.
class BroadcastIndexer {
 public:
  BroadcastIndexer(const Shape& out, const Shape& in);

  // Input linear offsets for every output element, in output order.
  const std::vector<int64_t>& offsets() const { return offsets_; }
  bool identity() const { return identity_; }

 private:
  std::vector<int64_t> offsets_;
  bool identity_ = false;
};

}  // namespace ctft
