// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "ctft/data/dataset.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <numeric>

#include "ctft/core/random.h"
#include "ctft/data/wav.h"

namespace ctft {

namespace {

constexpr char kMagic[8] = {'C', 'T', 'F', 'T', 'P', 'A', 'I', 'R'};
constexpr uint32_t kVersion = 1;

void put_u32(std::string& s, uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>(v >> (8 * i)));
}

void put_u64(std::string& s, uint64_t v) {
  for (int i = 0; i < 8; ++i) s.push_back(static_cast<char>(v >> (8 * i)));
}

struct Reader {
  const std::string& buf;
  size_t pos = 0;
  const std::filesystem::path& path;

  const char* take(size_t n) {
    if (pos + n > buf.size()) throw IoError(path.string() + ": truncated cache entry");
    const char* p = buf.data() + pos;
    pos += n;
    return p;
  }
  uint64_t get(int bytes) {
    const auto* p = reinterpret_cast<const unsigned char*>(take(bytes));
    uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= uint64_t(p[i]) << (8 * i);
    return v;
  }
};

std::string rebuild_hint(const std::filesystem::path& dir) {
  return "; delete " + dir.string() + " or rerun `ctftnet degrade --rebuild-cache`";
}

}  // namespace

PairedExample synthesize_pair(const ClipRecord& clip, int lr_rate, const PipelineParams& params) {
  return make_lr_hr_pair(prepare_target(read_wav(clip.path), params), lr_rate, params);
}

PairCache::PairCache(std::filesystem::path dir, PipelineParams params)
    : dir_(std::move(dir)), params_(std::move(params)), digest_(params_.digest()) {
  std::filesystem::create_directories(dir_);
}

std::filesystem::path PairCache::entry_path(const std::string& id, int lr_rate) const {
  return dir_ / (to_hex(sha256("id=" + id + ";lr_rate=" + std::to_string(lr_rate))) + ".pair");
}

std::optional<PairedExample> PairCache::load(const std::string& id, int lr_rate) const {
  const auto path = entry_path(id, lr_rate);
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  const std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Reader r{buf, 0, path};
  if (std::memcmp(r.take(8), kMagic, 8) != 0) throw IoError(path.string() + ": not a pair cache entry");
  if (r.get(4) != kVersion) throw StaleCacheError(path.string() + ": cache format version differs" + rebuild_hint(dir_));
  Digest stored;
  std::memcpy(stored.data(), r.take(32), 32);
  if (stored != digest_)
    throw StaleCacheError(path.string() + ": built with pipeline " + to_hex(stored) + ", current is " +
                          to_hex(digest_) + rebuild_hint(dir_));
  const auto stored_lr = static_cast<int>(r.get(4));
  const auto hr_rate = static_cast<int>(r.get(4));
  const uint64_t n = r.get(8);
  const uint64_t id_len = r.get(4);
  const std::string stored_id(r.take(id_len), id_len);
  if (stored_id != id || stored_lr != lr_rate)
    throw StaleCacheError(path.string() + ": entry belongs to " + stored_id + "@" + std::to_string(stored_lr) +
                          rebuild_hint(dir_));
  auto read_floats = [&] {
    std::vector<double> x(n);
    for (auto& v : x) v = std::bit_cast<float>(static_cast<uint32_t>(r.get(4)));
    return x;
  };
  auto hr = read_floats();
  auto lr = read_floats();
  return PairedExample{Waveform(std::move(hr), hr_rate), Waveform(std::move(lr), hr_rate), lr_rate};
}

void PairCache::store(const std::string& id, const PairedExample& ex) const {
  if (ex.hr.size() != ex.lr_upsampled.size()) throw DimensionError("pair cache: hr and lr lengths differ");
  std::string buf(kMagic, 8);
  put_u32(buf, kVersion);
  buf.append(reinterpret_cast<const char*>(digest_.data()), 32);
  put_u32(buf, static_cast<uint32_t>(ex.source_lr_rate));
  put_u32(buf, static_cast<uint32_t>(ex.hr.rate()));
  put_u64(buf, ex.hr.size());
  put_u32(buf, static_cast<uint32_t>(id.size()));
  buf += id;
  for (const Waveform* w : {&ex.hr, &ex.lr_upsampled})
    for (double v : w->samples()) put_u32(buf, std::bit_cast<uint32_t>(static_cast<float>(v)));
  const auto path = entry_path(id, ex.source_lr_rate);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(tmp.string() + ": cannot open for writing");
    out.write(buf.data(), buf.size());
    if (!out) throw IoError(tmp.string() + ": write failed");
  }
  std::filesystem::rename(tmp, path);
}

PairedExample PairCache::get_or_build(const ClipRecord& clip, int lr_rate) const {
  if (auto hit = load(clip.id, lr_rate)) return *std::move(hit);
  PairedExample ex = synthesize_pair(clip, lr_rate, params_);
  store(clip.id, ex);
  return ex;
}

BatchIterator::BatchIterator(std::vector<ClipRecord> clips, BatchOptions options)
    : clips_(std::move(clips)), options_(std::move(options)) {
  if (options_.batch_size < 1) throw ConfigError("batch size must be at least 1");
  if (clips_.empty()) throw DomainError("batch iterator over an empty clip list");
  if (options_.cache_dir) cache_.emplace(*options_.cache_dir, options_.pipeline);
}

int64_t BatchIterator::batches_per_epoch() const {
  const auto n = static_cast<int64_t>(clips_.size());
  const int64_t b = options_.batch_size;
  return options_.mode == IterMode::kTrain ? n / b : (n + b - 1) / b;
}

std::vector<size_t> BatchIterator::order(int64_t epoch) const {
  std::vector<size_t> idx(clips_.size());
  std::iota(idx.begin(), idx.end(), size_t{0});
  if (options_.mode == IterMode::kTrain) {
    Rng rng = Rng::derive(options_.seed, 0x73687566ULL, static_cast<uint64_t>(epoch));
    for (size_t i = idx.size() - 1; i > 0; --i) std::swap(idx[i], idx[rng.below(i + 1)]);
  }
  return idx;
}

std::vector<std::string> BatchIterator::batch_ids(int64_t epoch, int64_t index) const {
  if (index < 0 || index >= batches_per_epoch())
    throw DomainError("batch index " + std::to_string(index) + " outside epoch of " +
                      std::to_string(batches_per_epoch()));
  const auto idx = order(epoch);
  std::vector<std::string> ids;
  const size_t begin = static_cast<size_t>(index * options_.batch_size);
  for (size_t i = begin; i < std::min(idx.size(), begin + options_.batch_size); ++i) ids.push_back(clips_[idx[i]].id);
  return ids;
}

Batch BatchIterator::batch(int64_t epoch, int64_t index) const {
  const auto ids = batch_ids(epoch, index);
  const auto idx = order(epoch);
  Batch b{ids, {}};
  const size_t begin = static_cast<size_t>(index * options_.batch_size);
  for (size_t i = 0; i < ids.size(); ++i) b.examples.push_back(fetch(clips_[idx[begin + i]]));
  return b;
}

PairedExample BatchIterator::fetch(const ClipRecord& clip) const {
  return cache_ ? cache_->get_or_build(clip, options_.lr_rate)
                : synthesize_pair(clip, options_.lr_rate, options_.pipeline);
}

std::vector<std::string> BatchIterator::spot_check(int64_t epoch, int count) const {
  Rng rng = Rng::derive(options_.seed, 0x73706f74ULL, static_cast<uint64_t>(epoch));
  std::vector<std::string> bad;
  for (int i = 0; i < count; ++i) {
    const auto& clip = clips_[rng.below(clips_.size())];
    if (!satisfies_band_limit(fetch(clip))) bad.push_back(clip.id);
  }
  return bad;
}

}  // namespace ctft
