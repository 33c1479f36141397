// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "ctft/model/config.h"

#include <cmath>
#include <utility>
#include <vector>

#include "ctft/core/error.h"

namespace ctft {

namespace {

template <typename Enum>
const std::vector<std::pair<Enum, const char*>>& names();

template <>
const std::vector<std::pair<CgabPlacement, const char*>>& names() {
  static const std::vector<std::pair<CgabPlacement, const char*>> v{
      {CgabPlacement::kTwoBlocks, "two_blocks"},
      {CgabPlacement::kEveryEncoder, "every_encoder"},
      {CgabPlacement::kNone, "none"}};
  return v;
}
template <>
const std::vector<std::pair<AttentionVariant, const char*>>& names() {
  static const std::vector<std::pair<AttentionVariant, const char*>> v{
      {AttentionVariant::kCgabParallel, "cgab_parallel"},
      {AttentionVariant::kCgabSeries, "cgab_series"},
      {AttentionVariant::kFtbOnly, "ftb_only"}};
  return v;
}
template <>
const std::vector<std::pair<BottleneckKind, const char*>>& names() {
  static const std::vector<std::pair<BottleneckKind, const char*>> v{
      {BottleneckKind::kConformer, "conformer"},
      {BottleneckKind::kTransformer, "transformer"},
      {BottleneckKind::kIdentity, "identity"}};
  return v;
}
template <>
const std::vector<std::pair<Activation, const char*>>& names() {
  static const std::vector<std::pair<Activation, const char*>> v{{Activation::kCrelu, "crelu"},
                                                                 {Activation::kSnake, "snake"}};
  return v;
}
template <>
const std::vector<std::pair<BatchNormKind, const char*>>& names() {
  static const std::vector<std::pair<BatchNormKind, const char*>> v{
      {BatchNormKind::kWhitened, "whitened"}, {BatchNormKind::kNaive, "naive"}};
  return v;
}
template <>
const std::vector<std::pair<ScoreKind, const char*>>& names() {
  static const std::vector<std::pair<ScoreKind, const char*>> v{{ScoreKind::kReal, "real"},
                                                                {ScoreKind::kMagnitude, "magnitude"}};
  return v;
}
template <>
const std::vector<std::pair<WindowKind, const char*>>& names() {
  static const std::vector<std::pair<WindowKind, const char*>> v{
      {WindowKind::kHann, "hann"}, {WindowKind::kSqrtHann, "sqrt_hann"}};
  return v;
}

template <typename Enum>
std::string name_of(Enum e) {
  for (const auto& [v, n] : names<Enum>())
    if (v == e) return n;
  throw ConfigError("unnamed enum value");
}

}  // namespace

std::string to_string(CgabPlacement v) { return name_of(v); }
std::string to_string(AttentionVariant v) { return name_of(v); }
std::string to_string(BottleneckKind v) { return name_of(v); }
std::string to_string(Activation v) { return name_of(v); }
std::string to_string(BatchNormKind v) { return name_of(v); }
std::string to_string(ScoreKind v) { return name_of(v); }
std::string to_string(WindowKind v) { return name_of(v); }

template <typename Enum>
Enum parse_enum(const std::string& name) {
  std::string options;
  for (const auto& [v, n] : names<Enum>()) {
    if (name == n) return v;
    options += options.empty() ? n : std::string(", ") + n;
  }
  throw ConfigError("unknown value '" + name + "' (expected one of: " + options + ")");
}

template CgabPlacement parse_enum(const std::string&);
template AttentionVariant parse_enum(const std::string&);
template BottleneckKind parse_enum(const std::string&);
template Activation parse_enum(const std::string&);
template BatchNormKind parse_enum(const std::string&);
template ScoreKind parse_enum(const std::string&);
template WindowKind parse_enum(const std::string&);

ModelConfig ModelConfig::full() {
  ModelConfig cfg;
  for (auto& c : cfg.channels) c *= 2;
  return cfg;
}

int64_t ModelConfig::clip_samples() const {
  return static_cast<int64_t>(std::llround(clip_seconds * sample_rate));
}

int64_t ModelConfig::time_reduction() const {
  int64_t r = 1;
  for (const auto& s : strides) r *= s[1];
  return r;
}

int64_t ModelConfig::freq_reduction() const {
  int64_t r = 1;
  for (const auto& s : strides) r *= s[0];
  return r;
}

int64_t ModelConfig::bound_frames() const {
  const int64_t t = stft.frames(clip_samples());
  const int64_t r = time_reduction();
  return (t + r - 1) / r * r;
}

Pair ModelConfig::level_shape(int level) const {
  int64_t f = bins(), t = bound_frames();
  for (int l = 0; l < level; ++l) {
    f /= strides[l][0];
    t /= strides[l][1];
  }
  return {f, t};
}

bool ModelConfig::has_attention(int level) const {
  switch (placement) {
    case CgabPlacement::kTwoBlocks:
      return level == 1 || level == 7;
    case CgabPlacement::kEveryEncoder:
      return true;
    case CgabPlacement::kNone:
      return false;
  }
  return false;
}

void ModelConfig::validate() const {
  stft.validate();
  if (!satisfies_cola(stft)) throw ConfigError("model STFT window/hop pair violates COLA");
  if (sample_rate <= 0) throw ConfigError("sample_rate must be positive");
  if (!(clip_seconds > 0)) throw ConfigError("clip_seconds must be positive");
  for (int l = 0; l < kLevels; ++l) {
    if (channels[l] <= 0) throw ConfigError("channel counts must be positive");
    for (int a = 0; a < 2; ++a)
      if (strides[l][a] != 1 && strides[l][a] != 2)
        throw ConfigError("strides must be 1 or 2 at level " + std::to_string(l + 1));
  }
  if (kernel[0] % 2 == 0 || kernel[1] % 2 == 0) throw ConfigError("kernel must be odd");
  if (bins() % freq_reduction() != 0)
    throw ConfigError(std::to_string(bins()) + " bins are not divisible by the frequency "
                      "reduction " + std::to_string(freq_reduction()));
  if (activation == Activation::kSnake)
    throw ConfigError("activation 'snake' is recorded but not implemented");
  if (attention_kernel % 2 == 0) throw ConfigError("attention_kernel must be odd");
  if (bottleneck != BottleneckKind::kIdentity) {
    const int64_t d = channels[kLevels - 1] * level_shape(kLevels)[0];
    if (conformer.layers < 1) throw ConfigError("conformer needs at least one layer");
    if (conformer.heads < 1 || d % conformer.heads != 0)
      throw ConfigError("bottleneck dim " + std::to_string(d) + " is not divisible by " +
                        std::to_string(conformer.heads) + " heads");
    if (conformer.kernel % 2 == 0) throw ConfigError("conformer kernel must be odd");
    if (conformer.dropout < 0 || conformer.dropout >= 1)
      throw ConfigError("conformer dropout must lie in [0, 1)");
  }
}

}  // namespace ctft
