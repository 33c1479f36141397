// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "ctft/data/wav.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace ctft {

namespace {

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatFloat = 3;
constexpr uint16_t kFormatExtensible = 0xFFFE;

uint32_t le32(const unsigned char* p) { return p[0] | (p[1] << 8) | (p[2] << 16) | (uint32_t(p[3]) << 24); }
uint16_t le16(const unsigned char* p) { return static_cast<uint16_t>(p[0] | (p[1] << 8)); }

struct Layout {
  WavInfo info;
  std::streamoff data_offset = 0;
};

Layout parse_header(std::ifstream& in, const std::filesystem::path& path) {
  const std::string where = path.string() + ": ";
  unsigned char riff[12];
  if (!in.read(reinterpret_cast<char*>(riff), 12)) throw IoError(where + "file shorter than a RIFF header");
  if (std::memcmp(riff, "RIFF", 4) != 0 || std::memcmp(riff + 8, "WAVE", 4) != 0)
    throw IoError(where + "not a RIFF/WAVE file");
  in.seekg(0, std::ios::end);
  const std::streamoff file_size = in.tellg();
  in.seekg(12);
  Layout out;
  bool have_fmt = false;
  uint16_t format = 0, block_align = 0;
  while (true) {
    unsigned char hdr[8];
    if (!in.read(reinterpret_cast<char*>(hdr), 8)) throw IoError(where + "no data chunk");
    const uint32_t size = le32(hdr + 4);
    const std::streamoff body = in.tellg();
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (size < 16) throw IoError(where + "fmt chunk too short");
      std::vector<unsigned char> f(size);
      if (!in.read(reinterpret_cast<char*>(f.data()), size)) throw IoError(where + "truncated fmt chunk");
      format = le16(&f[0]);
      out.info.channels = le16(&f[2]);
      out.info.rate = static_cast<int>(le32(&f[4]));
      block_align = le16(&f[12]);
      out.info.bits = le16(&f[14]);
      if (format == kFormatExtensible) {
        if (size < 40) throw IoError(where + "extensible fmt chunk too short");
        format = le16(&f[24]);
      }
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      if (!have_fmt) throw IoError(where + "data chunk before fmt chunk");
      out.data_offset = body;
      const int64_t avail = std::min<int64_t>(size, file_size - body);
      if (avail < size) throw IoError(where + "truncated data chunk");
      if (block_align == 0) throw IoError(where + "zero block alignment");
      out.info.frames = size / block_align;
      break;
    }
    in.seekg(body + size + (size & 1));
  }
  WavInfo& i = out.info;
  if (i.channels < 1) throw IoError(where + "no channels");
  if (i.rate <= 0) throw IoError(where + "invalid sample rate");
  if (format == kFormatPcm && (i.bits == 16 || i.bits == 24 || i.bits == 32)) {
    i.is_float = false;
  } else if (format == kFormatFloat && i.bits == 32) {
    i.is_float = true;
  } else {
    throw IoError(where + "unsupported encoding (format " + std::to_string(format) + ", " +
                  std::to_string(i.bits) + " bits)");
  }
  if (block_align != i.channels * (i.bits / 8)) throw IoError(where + "inconsistent block alignment");
  return out;
}

}  // namespace

WavInfo read_wav_info(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open");
  return parse_header(in, path).info;
}

WavRead read_wav_full(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open");
  const Layout lay = parse_header(in, path);
  const WavInfo& info = lay.info;
  if (info.frames == 0) throw IoError(path.string() + ": no samples");
  const int width = info.bits / 8;
  const int64_t stride = static_cast<int64_t>(info.channels) * width;
  std::vector<unsigned char> raw(info.frames * stride);
  in.seekg(lay.data_offset);
  if (!in.read(reinterpret_cast<char*>(raw.data()), raw.size())) throw IoError(path.string() + ": read failed");
  std::vector<double> x(info.frames);
  for (int64_t n = 0; n < info.frames; ++n) {
    const unsigned char* p = raw.data() + n * stride;
    if (info.is_float) {
      x[n] = std::bit_cast<float>(le32(p));
    } else if (width == 2) {
      x[n] = static_cast<int16_t>(le16(p)) / 32768.0;
    } else if (width == 3) {
      const int32_t v = static_cast<int32_t>((p[0] << 8) | (p[1] << 16) | (uint32_t(p[2]) << 24)) >> 8;
      x[n] = v / 8388608.0;
    } else {
      x[n] = static_cast<int32_t>(le32(p)) / 2147483648.0;
    }
    if (!std::isfinite(x[n])) throw IoError(path.string() + ": non-finite sample at frame " + std::to_string(n));
  }
  WavRead out{Waveform(std::move(x), info.rate), info, {}};
  if (info.channels > 1)
    out.warning = path.string() + ": " + std::to_string(info.channels) + " channels, kept channel 0";
  return out;
}

Waveform read_wav(const std::filesystem::path& path) { return read_wav_full(path).wave; }

void write_wav(const std::filesystem::path& path, const Waveform& wave, WavEncoding encoding) {
  const bool fl = encoding == WavEncoding::kFloat32;
  const uint32_t width = fl ? 4 : 2;
  const uint32_t data_bytes = static_cast<uint32_t>(wave.size() * width);
  std::vector<unsigned char> buf;
  buf.reserve(44 + data_bytes);
  auto put = [&](uint32_t v, int n) {
    for (int i = 0; i < n; ++i) buf.push_back(static_cast<unsigned char>(v >> (8 * i)));
  };
  auto tag = [&](const char* t) { buf.insert(buf.end(), t, t + 4); };
  tag("RIFF");
  put(36 + data_bytes, 4);
  tag("WAVE");
  tag("fmt ");
  put(16, 4);
  put(fl ? kFormatFloat : kFormatPcm, 2);
  put(1, 2);
  put(static_cast<uint32_t>(wave.rate()), 4);
  put(static_cast<uint32_t>(wave.rate()) * width, 4);
  put(width, 2);
  put(width * 8, 2);
  tag("data");
  put(data_bytes, 4);
  for (double v : wave.samples()) {
    if (fl) {
      put(std::bit_cast<uint32_t>(static_cast<float>(v)), 4);
    } else {
      const double s = std::clamp(std::round(v * 32768.0), -32768.0, 32767.0);
      put(static_cast<uint16_t>(static_cast<int16_t>(s)), 2);
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  out.write(reinterpret_cast<const char*>(buf.data()), buf.size());
  if (!out) throw IoError(path.string() + ": write failed");
}

}  // namespace ctft
