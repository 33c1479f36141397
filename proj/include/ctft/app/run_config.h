// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ctft/core/digest.h"
#include "ctft/data/pairs.h"
#include "ctft/model/config.h"
#include "ctft/train/trainer.h"

namespace ctft {

enum class Precision { kF32, kF64 };

// Everything a run depends on. Defaults are the desk configuration.
struct RunConfig {
  ModelConfig model = ModelConfig::desk();
  TrainConfig train;
  Precision precision = Precision::kF32;
  int lr_rate = 8000;
  int filter_order = 6;
  double cutoff_ratio = 0.99;
  SincParams sinc;
  bool post_process = false;
  // Training memory trade; outside the digest like the rest of [run].
  bool recompute_encoders = false;

  // Target rate and clip length follow the model.
  PipelineParams pipeline() const;
  EnhanceOptions enhance_options() const;

  // Every field that shapes results, in a fixed order; doubles in shortest
  // round-trip form. The [run] table (epochs, step limit, cadences) is
  // left out so a run can be stopped and resumed under one digest.
  std::string canonical() const;
  // canonical() followed by the [run] table; parse(to_toml()) == *this.
  std::string to_toml() const;
  Digest digest() const { return sha256(canonical()); }
  void validate() const;

  // Unknown keys are ConfigError. Each override is "dotted.key=value"; the
  // value is read as TOML and falls back to a bare string.
  static RunConfig parse(const std::string& toml_text, const std::vector<std::string>& overrides = {});
  static RunConfig load(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});
};

std::string to_string(Precision p);

}  // namespace ctft
