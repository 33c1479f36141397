// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "ctft/dsp/stft.h"
#include "ctft/nn/attention.h"

namespace ctft {

enum class CgabPlacement { kTwoBlocks, kEveryEncoder, kNone };
enum class AttentionVariant { kCgabParallel, kCgabSeries, kFtbOnly };
enum class BottleneckKind { kConformer, kTransformer, kIdentity };
enum class Activation { kCrelu, kSnake };

inline constexpr int kLevels = 8;

struct ModelConfig {
  StftConfig stft{1024, 256, 1024, WindowKind::kHann, true};
  int sample_rate = 48000;
  // Training clip length; attention blocks bind to its frame count.
  double clip_seconds = 4.0;
  std::array<int64_t, kLevels> channels{16, 32, 64, 64, 128, 128, 256, 256};
  Pair kernel{3, 3};
  Pair padding{1, 1};
  // Per level (frequency, time) stride.
  std::array<Pair, kLevels> strides = uniform_strides();
  CgabPlacement placement = CgabPlacement::kTwoBlocks;
  AttentionVariant attention = AttentionVariant::kCgabParallel;
  int64_t attention_kernel = 1;
  BottleneckKind bottleneck = BottleneckKind::kConformer;
  ConformerConfig conformer;
  Activation activation = Activation::kCrelu;
  BatchNormKind bn = BatchNormKind::kWhitened;
  bool flipped_sign = false;
  uint64_t seed = 0;

  static std::array<Pair, kLevels> uniform_strides() {
    std::array<Pair, kLevels> s;
    s.fill({2, 2});
    return s;
  }
  static ModelConfig desk() { return {}; }
  // Widths doubled.
  static ModelConfig full();

  // Bins after dropping the Nyquist bin.
  int64_t bins() const { return stft.n_fft / 2; }
  int64_t clip_samples() const;
  int64_t time_reduction() const;
  int64_t freq_reduction() const;
  // STFT frames of one clip rounded up to a multiple of time_reduction().
  int64_t bound_frames() const;
  // [F, T] at the output of encoder `level` (1-based) for bound_frames().
  Pair level_shape(int level) const;
  bool has_attention(int level) const;
  void validate() const;
};

std::string to_string(CgabPlacement v);
std::string to_string(AttentionVariant v);
std::string to_string(BottleneckKind v);
std::string to_string(Activation v);
std::string to_string(BatchNormKind v);
std::string to_string(ScoreKind v);
std::string to_string(WindowKind v);
// Inverse of to_string; throws ConfigError on unknown names.
template <typename Enum>
Enum parse_enum(const std::string& name);

}  // namespace ctft
