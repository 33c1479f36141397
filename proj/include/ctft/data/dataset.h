// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ctft/data/manifest.h"
#include "ctft/data/pairs.h"

namespace ctft {

// Reads the clip, prepares the target and synthesizes its low-rate input.
PairedExample synthesize_pair(const ClipRecord& clip, int lr_rate, const PipelineParams& params);

// One file per (clip id, lr_rate), named by the hex digest of that key.
// Each entry records the pipeline digest it was built with; a mismatch on
// load raises StaleCacheError.
class PairCache {
 public:
  PairCache(std::filesystem::path dir, PipelineParams params);

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path entry_path(const std::string& id, int lr_rate) const;

  std::optional<PairedExample> load(const std::string& id, int lr_rate) const;
  void store(const std::string& id, const PairedExample& ex) const;
  PairedExample get_or_build(const ClipRecord& clip, int lr_rate) const;

 private:
  std::filesystem::path dir_;
  PipelineParams params_;
  Digest digest_;
};

enum class IterMode { kTrain, kEval };

struct BatchOptions {
  int lr_rate = 8000;
  int batch_size = 8;
  uint64_t seed = 0;
  IterMode mode = IterMode::kTrain;
  PipelineParams pipeline;
  std::optional<std::filesystem::path> cache_dir;
};

struct Batch {
  std::vector<std::string> ids;
  std::vector<PairedExample> examples;
};

// Random access into a seeded per-epoch order. Training mode shuffles and
// drops the last partial batch; eval keeps manifest order and every clip.
class BatchIterator {
 public:
  BatchIterator(std::vector<ClipRecord> clips, BatchOptions options);

  int64_t batches_per_epoch() const;
  std::vector<size_t> order(int64_t epoch) const;
  std::vector<std::string> batch_ids(int64_t epoch, int64_t index) const;
  Batch batch(int64_t epoch, int64_t index) const;

  // Ids of up to `count` seeded clips whose pair breaks the band-limit invariant.
  std::vector<std::string> spot_check(int64_t epoch, int count) const;

  const std::vector<ClipRecord>& clips() const { return clips_; }
  const BatchOptions& options() const { return options_; }

 private:
  PairedExample fetch(const ClipRecord& clip) const;

  std::vector<ClipRecord> clips_;
  BatchOptions options_;
  std::optional<PairCache> cache_;
};

}  // namespace ctft
