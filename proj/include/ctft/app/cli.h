// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "ctft/nn/module.h"

namespace ctft {

enum ExitCode : int { kExitOk = 0, kExitInternal = 1, kExitUsage = 2, kExitNumeric = 3, kExitIo = 4 };

// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Parameter counts per top-level block (attention blocks split by path) and
// the total, one "name count" line each.
template <typename Real>
std::string parameter_census(const Module<Real>& net);

}  // namespace ctft
