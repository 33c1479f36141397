// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "ctft/train/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>

namespace ctft {

namespace {

constexpr char kMagic[8] = {'C', 'T', 'F', 'T', 'N', 'E', 'T', '1'};

void put_u32(std::string& s, uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>(v >> (8 * i)));
}

void put_table(std::string& s, const std::vector<TensorRecord>& table) {
  put_u32(s, static_cast<uint32_t>(table.size()));
  for (const auto& r : table) {
    put_u32(s, static_cast<uint32_t>(r.name.size()));
    s += r.name;
    put_u32(s, static_cast<uint32_t>(r.dims.size()));
    for (int64_t d : r.dims) put_u32(s, static_cast<uint32_t>(d));
    for (float v : r.re) put_u32(s, std::bit_cast<uint32_t>(v));
    for (float v : r.im) put_u32(s, std::bit_cast<uint32_t>(v));
  }
}

struct Cursor {
  const std::string& buf;
  size_t pos = 0;

  const char* take(size_t n) {
    if (n > buf.size() - pos) throw IoError("checkpoint truncated at byte " + std::to_string(pos));
    const char* p = buf.data() + pos;
    pos += n;
    return p;
  }
  uint32_t u32() {
    const auto* p = reinterpret_cast<const unsigned char*>(take(4));
    return p[0] | (p[1] << 8) | (p[2] << 16) | (uint32_t(p[3]) << 24);
  }
  std::vector<TensorRecord> table() {
    std::vector<TensorRecord> out(u32());
    for (auto& r : out) {
      const uint32_t len = u32();
      r.name.assign(take(len), len);
      r.dims.resize(u32());
      int64_t n = 1;
      for (auto& d : r.dims) n *= (d = u32());
      if (static_cast<uint64_t>(n) * 8 > buf.size() - pos) throw IoError("checkpoint truncated in " + r.name);
      r.re.resize(n);
      r.im.resize(n);
      for (auto& v : r.re) v = std::bit_cast<float>(u32());
      for (auto& v : r.im) v = std::bit_cast<float>(u32());
    }
    return out;
  }
};

template <typename Real>
TensorRecord record(const std::string& name, const Shape& dims, std::span<const Real> re,
                    std::span<const Real> im) {
  return {name, dims, std::vector<float>(re.begin(), re.end()), std::vector<float>(im.begin(), im.end())};
}

// Integers split into 24-bit halves, each exact in f32.
TensorRecord counter(const std::string& name, int64_t v) {
  const auto u = static_cast<uint64_t>(v);
  return {name, {1}, {static_cast<float>(u & 0xFFFFFF)}, {static_cast<float>(u >> 24)}};
}

int64_t read_counter(const TensorRecord& r) {
  return static_cast<int64_t>(static_cast<uint64_t>(r.re.at(0)) | (static_cast<uint64_t>(r.im.at(0)) << 24));
}

}  // namespace

std::string Checkpoint::serialize() const {
  std::string s(kMagic, 8);
  put_u32(s, kCheckpointVersion);
  s.append(reinterpret_cast<const char*>(config_digest.data()), 32);
  put_table(s, params);
  put_table(s, optimizer);
  return s;
}

Checkpoint Checkpoint::parse(const std::string& bytes) {
  Cursor c{bytes};
  if (std::memcmp(c.take(8), kMagic, 8) != 0) throw IoError("not a CTFTNET1 checkpoint");
  const uint32_t version = c.u32();
  if (version != kCheckpointVersion) throw IoError("unsupported checkpoint version " + std::to_string(version));
  Checkpoint ck;
  std::memcpy(ck.config_digest.data(), c.take(32), 32);
  ck.params = c.table();
  ck.optimizer = c.table();
  if (c.pos != bytes.size()) throw IoError("trailing bytes after checkpoint tables");
  return ck;
}

void Checkpoint::save(const std::filesystem::path& path) const {
  const std::string s = serialize();
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(tmp.string() + ": cannot open for writing");
    out.write(s.data(), s.size());
    if (!out) throw IoError(tmp.string() + ": write failed");
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open");
  const std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return parse(s);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

const TensorRecord* Checkpoint::find_optimizer(const std::string& name) const {
  for (const auto& r : optimizer)
    if (r.name == name) return &r;
  return nullptr;
}

template <typename Real>
Checkpoint make_checkpoint(const Module<Real>& net, const Digest& config_digest, const AdamState<Real>* adam,
                           const TrainProgress* progress) {
  Checkpoint ck;
  ck.config_digest = config_digest;
  for (const auto& list : {net.parameters(), net.buffers()})
    for (const auto& p : list)
      ck.params.push_back(record<Real>(p.name, p.tensor.shape(), p.tensor.real(), p.tensor.imag()));
  if (adam) {
    ck.optimizer.push_back(counter("adam.t", adam->t));
    for (const auto& [name, mo] : adam->moments) {
      const Shape dims{static_cast<int64_t>(mo.m_re.size())};
      ck.optimizer.push_back(record<Real>("adam.m/" + name, dims, mo.m_re, mo.m_im));
      ck.optimizer.push_back(record<Real>("adam.v/" + name, dims, mo.v_re, mo.v_im));
    }
  }
  if (progress) {
    ck.optimizer.push_back(counter("train.step", progress->step));
    ck.optimizer.push_back(counter("train.best_step", progress->best_step + 1));
    ck.optimizer.push_back({"train.best_val_lsd", {1}, {static_cast<float>(progress->best_val_lsd)}, {0.0f}});
  }
  return ck;
}

template <typename Real>
void restore_parameters(const Module<Real>& net, const Checkpoint& ckpt) {
  ParameterList<Real> all = net.parameters();
  for (const auto& b : net.buffers()) all.push_back(b);
  if (all.size() != ckpt.params.size())
    throw ConfigError("checkpoint holds " + std::to_string(ckpt.params.size()) + " tensors, model has " +
                      std::to_string(all.size()));
  for (size_t i = 0; i < all.size(); ++i) {
    const auto& r = ckpt.params[i];
    if (r.name != all[i].name || r.dims != all[i].tensor.shape())
      throw ConfigError("checkpoint tensor " + r.name + " does not match model tensor " + all[i].name);
  }
  for (size_t i = 0; i < all.size(); ++i) {
    ComplexTensor<Real> t = all[i].tensor;
    const auto& r = ckpt.params[i];
    std::copy(r.re.begin(), r.re.end(), t.mutable_real().begin());
    std::copy(r.im.begin(), r.im.end(), t.mutable_imag().begin());
  }
}

template <typename Real>
std::optional<AdamState<Real>> restore_optimizer(const Checkpoint& ckpt) {
  const TensorRecord* t = ckpt.find_optimizer("adam.t");
  if (!t) return std::nullopt;
  AdamState<Real> s;
  s.t = read_counter(*t);
  for (const auto& r : ckpt.optimizer) {
    const bool m = r.name.rfind("adam.m/", 0) == 0, v = r.name.rfind("adam.v/", 0) == 0;
    if (!m && !v) continue;
    auto& mo = s.moments[r.name.substr(7)];
    (m ? mo.m_re : mo.v_re).assign(r.re.begin(), r.re.end());
    (m ? mo.m_im : mo.v_im).assign(r.im.begin(), r.im.end());
  }
  return s;
}

std::optional<TrainProgress> restore_progress(const Checkpoint& ckpt) {
  const TensorRecord* step = ckpt.find_optimizer("train.step");
  if (!step) return std::nullopt;
  TrainProgress p;
  p.step = read_counter(*step);
  if (const auto* b = ckpt.find_optimizer("train.best_step")) p.best_step = read_counter(*b) - 1;
  if (const auto* l = ckpt.find_optimizer("train.best_val_lsd")) p.best_val_lsd = l->re.at(0);
  return p;
}

#define CTFT_CKPT(R)                                                                                     \
  template Checkpoint make_checkpoint(const Module<R>&, const Digest&, const AdamState<R>*, const TrainProgress*); \
  template void restore_parameters(const Module<R>&, const Checkpoint&);                              \
  template std::optional<AdamState<R>> restore_optimizer(const Checkpoint&);
CTFT_CKPT(float)
CTFT_CKPT(double)

}  // namespace ctft
