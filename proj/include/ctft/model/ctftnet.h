// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
//
// The complex U-Net: eight encoder levels with optional attention blocks,
// a sequence bottleneck, and eight decoders fed by skip blocks.

#pragma once

#include <map>
#include <memory>

#include "ctft/dsp/waveform.h"
#include "ctft/model/config.h"

namespace ctft {

template <typename Real>
class CtftNet : public Module<Real> {
 public:
  using Tensor = ComplexTensor<Real>;
  explicit CtftNet(const ModelConfig& cfg);

  // spec [B, 1, bins, bound_frames] -> same shape.
  Tensor forward(const Tensor& spec, const Context& ctx);

  const ModelConfig& config() const { return cfg_; }

  // Encoder activations are dropped after forward and rebuilt during
  // backward. Gradients are unchanged.
  bool recompute_encoders = false;

  std::array<EncoderBlock<Real>*, kLevels> encoders{};
  std::array<SkipBlock<Real>*, kLevels> skips{};
  std::array<DecoderBlock<Real>*, kLevels> decoders{};
  // Keyed by encoder level.
  std::map<int, Cgab<Real>*> cgabs;
  std::map<int, Ftb<Real>*> ftbs;
  Conformer<Real>* bottleneck = nullptr;

 private:
  ModelConfig cfg_;
};

template <typename Real>
std::unique_ptr<CtftNet<Real>> build_model(const ModelConfig& cfg) {
  return std::make_unique<CtftNet<Real>>(cfg);
}

struct EnhanceOptions {
  // Replace the output band below lr_rate / 2 with the input band.
  bool post_process = false;
  int lr_rate = 0;
  double crossfade_seconds = 0.5;
};

// Waveform at the model rate, already upsampled from the low rate. Inputs
// longer than one clip are processed in overlapping clips and crossfaded.
template <typename Real>
Waveform enhance(CtftNet<Real>& net, const Waveform& wave, const EnhanceOptions& opts = {});

// One clip (at most clip_samples long): input and output spectra on the
// full one-sided grid [bins + 1, frames].
template <typename Real>
Spectrogram enhance_spectrum(CtftNet<Real>& net, const Spectrogram& input,
                             const EnhanceOptions& opts = {});

}  // namespace ctft
