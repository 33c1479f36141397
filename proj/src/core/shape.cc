// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "ctft/core/shape.h"

#include <algorithm>
#include <sstream>

#include "ctft/core/error.h"

namespace ctft {

int64_t numel(const Shape& shape) {
  int64_t n = 1;
  for (int64_t d : shape) n *= d;
  return n;
}

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ",";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

std::vector<int64_t> contiguous_strides(const Shape& shape) {
  std::vector<int64_t> strides(shape.size(), 1);
  for (int i = static_cast<int>(shape.size()) - 2; i >= 0; --i)
    strides[i] = strides[i + 1] * shape[i + 1];
  return strides;
}

Shape broadcast_shapes(const Shape& a, const Shape& b) {
  const size_t rank = std::max(a.size(), b.size());
  Shape out(rank, 1);
  for (size_t i = 0; i < rank; ++i) {
    const int64_t da = i < rank - a.size() ? 1 : a[i - (rank - a.size())];
    const int64_t db = i < rank - b.size() ? 1 : b[i - (rank - b.size())];
    if (da != db && da != 1 && db != 1)
      throw DimensionError("cannot broadcast " + to_string(a) + " with " +
                           to_string(b));
    out[i] = da == 1 ? db : da;
  }
  return out;
}

int normalize_axis(int axis, int rank) {
  const int a = axis < 0 ? axis + rank : axis;
  if (a < 0 || a >= rank)
    throw DimensionError("axis " + std::to_string(axis) +
                         " out of range for rank " + std::to_string(rank));
  return a;
}

BroadcastIndexer::BroadcastIndexer(const Shape& out, const Shape& in) {
  if (out == in) {
    identity_ = true;
    return;
  }
  const size_t rank = out.size();
  if (in.size() > rank)
    throw DimensionError("broadcast target rank too small");
  // Align trailing axes; broadcast axes get stride 0.
  std::vector<int64_t> in_strides(rank, 0);
  const auto raw = contiguous_strides(in);
  for (size_t i = 0; i < in.size(); ++i) {
    const size_t o = rank - in.size() + i;
    if (in[i] == out[o])
      in_strides[o] = raw[i];
    else if (in[i] != 1)
      throw DimensionError("cannot broadcast " + to_string(in) + " to " +
                           to_string(out));
  }
  const int64_t n = numel(out);
  offsets_.resize(n);
  std::vector<int64_t> index(rank, 0);
  int64_t offset = 0;
  for (int64_t k = 0; k < n; ++k) {
    offsets_[k] = offset;
    for (int d = static_cast<int>(rank) - 1; d >= 0; --d) {
      ++index[d];
      offset += in_strides[d];
      if (index[d] < out[d]) break;
      offset -= in_strides[d] * index[d];
      index[d] = 0;
    }
  }
}

}  // namespace ctft
