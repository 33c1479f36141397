// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// Container: "CTFTNET1", u32 version, 32-byte config digest, u32 parameter
// count and entries, u32 optimizer count and entries. Entry: u32 name length,
// name, u32 rank, u32 dims, f32 real payload, f32 imaginary payload. All
// little-endian.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ctft/core/digest.h"
#include "ctft/nn/module.h"
#include "ctft/train/optim.h"

namespace ctft {

inline constexpr uint32_t kCheckpointVersion = 1;

struct TensorRecord {
  std::string name;
  std::vector<int64_t> dims;
  std::vector<float> re, im;
};

struct TrainProgress {
  int64_t step = 0;
  int64_t best_step = -1;
  double best_val_lsd = 0.0;
};

struct Checkpoint {
  Digest config_digest{};
  // Parameters followed by buffers, in module order.
  std::vector<TensorRecord> params;
  // Adam moments, step count and training progress; empty when absent.
  std::vector<TensorRecord> optimizer;

  std::string serialize() const;
  static Checkpoint parse(const std::string& bytes);
  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);

  const TensorRecord* find_optimizer(const std::string& name) const;
};

template <typename Real>
Checkpoint make_checkpoint(const Module<Real>& net, const Digest& config_digest,
                           const AdamState<Real>* adam = nullptr, const TrainProgress* progress = nullptr);

// Copies parameters and buffers into the net. Throws ConfigError when names
// or shapes differ.
template <typename Real>
void restore_parameters(const Module<Real>& net, const Checkpoint& ckpt);

template <typename Real>
std::optional<AdamState<Real>> restore_optimizer(const Checkpoint& ckpt);

std::optional<TrainProgress> restore_progress(const Checkpoint& ckpt);

}  // namespace ctft
