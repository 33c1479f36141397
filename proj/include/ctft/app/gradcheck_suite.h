// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "ctft/app/run_config.h"

namespace ctft {

struct BlockCheck {
  std::string block;
  double max_rel_error = 0.0;
  double threshold = 0.0;
  std::string worst;  // parameter[index]
  bool passed() const { return max_rel_error < threshold; }
};

struct GradcheckReport {
  std::vector<BlockCheck> blocks;
  bool all_passed() const;
  // One line per block, then a summary line.
  void print(std::ostream& os) const;
};

// 64-bit checks at tiny shapes, using the config's bn kind, conv sign,
// attention arrangement, score kind and loss choice. Includes a z*conj(z)
// algebra check whose error is the magnitude of the spurious imaginary part.
GradcheckReport run_gradcheck_suite(const RunConfig& cfg);

}  // namespace ctft
