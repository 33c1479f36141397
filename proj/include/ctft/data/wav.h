// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>
#include <string>

#include "ctft/dsp/waveform.h"

namespace ctft {

enum class WavEncoding { kPcm16, kFloat32 };

struct WavInfo {
  int rate = 0;
  int channels = 0;
  int bits = 0;
  bool is_float = false;
  int64_t frames = 0;
};

struct WavRead {
  Waveform wave;
  WavInfo info;
  // Non-empty when the file had more than one channel and only channel 0 was kept.
  std::string warning;
};

// Header only. PCM 16/24/32-bit and float32, plain or extensible format.
WavInfo read_wav_info(const std::filesystem::path& path);
WavRead read_wav_full(const std::filesystem::path& path);
Waveform read_wav(const std::filesystem::path& path);

// pcm16 scales by 32768 and clips to [-32768, 32767].
void write_wav(const std::filesystem::path& path, const Waveform& wave,
               WavEncoding encoding = WavEncoding::kFloat32);

}  // namespace ctft
