// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "ctft/data/manifest.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <regex>

#include <json.hpp>

#include "ctft/core/error.h"
#include "ctft/core/random.h"
#include "ctft/data/wav.h"

namespace ctft {

const char* to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "?";
}

Split parse_split(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "val") return Split::kVal;
  if (s == "test") return Split::kTest;
  throw ConfigError("unknown split '" + s + "'");
}

std::vector<ClipRecord> Manifest::split(Split s) const {
  std::vector<ClipRecord> out;
  for (const auto& r : records)
    if (r.split == s) out.push_back(r);
  return out;
}

std::set<std::string> Manifest::speakers(Split s) const {
  std::set<std::string> out;
  for (const auto& r : records)
    if (r.split == s) out.insert(r.speaker);
  return out;
}

void Manifest::write_jsonl(std::ostream& os) const {
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["id"] = r.id;
    j["path"] = r.path.generic_string();
    j["speaker"] = r.speaker;
    j["split"] = to_string(r.split);
    j["duration"] = r.duration;
    j["rate"] = r.rate;
    os << j.dump() << '\n';
  }
}

void Manifest::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  write_jsonl(out);
  if (!out) throw IoError(path.string() + ": write failed");
}

Manifest Manifest::read_jsonl(std::istream& is) {
  Manifest m;
  std::set<std::string> seen;
  std::string line;
  int64_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    ClipRecord r;
    try {
      const auto j = nlohmann::json::parse(line);
      r.id = j.at("id").get<std::string>();
      r.path = j.at("path").get<std::string>();
      r.speaker = j.at("speaker").get<std::string>();
      r.split = parse_split(j.at("split").get<std::string>());
      r.duration = j.at("duration").get<double>();
      r.rate = j.at("rate").get<int>();
    } catch (const nlohmann::json::exception& e) {
      throw IoError("manifest line " + std::to_string(lineno) + ": " + e.what());
    }
    if (!seen.insert(r.id).second) throw DomainError("manifest: duplicate clip id '" + r.id + "'");
    m.records.push_back(std::move(r));
  }
  std::sort(m.records.begin(), m.records.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return m;
}

Manifest Manifest::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open");
  return read_jsonl(in);
}

Manifest build_manifest(const std::filesystem::path& root, const ManifestRules& rules) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) throw IoError(root.string() + ": not a directory");
  static const std::regex kMic("^(.*)_(mic[0-9]+)$");
  std::map<std::string, std::vector<ClipRecord>> by_speaker;
  std::set<std::string> ids;
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(root))
    if (e.is_directory()) dirs.push_back(e.path());
  std::sort(dirs.begin(), dirs.end());
  for (const auto& dir : dirs) {
    const std::string speaker = dir.filename().string();
    if (rules.excluded_speakers.count(speaker)) continue;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
      if (e.is_regular_file() && e.path().extension() == ".wav") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      std::string id = f.stem().string();
      std::smatch m;
      if (std::regex_match(id, m, kMic)) {
        if (!rules.mic.empty() && m[2] != rules.mic) continue;
        id = m[1];
      }
      if (!ids.insert(id).second) throw DomainError("corpus: duplicate clip id '" + id + "' at " + f.string());
      const WavInfo info = read_wav_info(f);
      by_speaker[speaker].push_back(
          {id, f, speaker, Split::kTrain, static_cast<double>(info.frames) / info.rate, info.rate});
    }
  }
  if (by_speaker.empty()) throw IoError(root.string() + ": no usable clips");
  std::vector<std::string> speakers;
  for (const auto& [s, _] : by_speaker) speakers.push_back(s);
  const int n = static_cast<int>(speakers.size());
  if (rules.test_speakers < 0 || rules.val_speakers < 0 || rules.test_speakers + rules.val_speakers >= n)
    throw DomainError("corpus has " + std::to_string(n) + " speakers; cannot hold out " +
                      std::to_string(rules.test_speakers) + " test and " + std::to_string(rules.val_speakers) +
                      " validation speakers");
  Rng rng = Rng::derive(rules.seed, 0x6d616e6966657374ULL);
  for (int i = n - 1; i > 0; --i) std::swap(speakers[i], speakers[rng.below(i + 1)]);
  Manifest out;
  for (int i = 0; i < n; ++i) {
    const Split s = i < rules.test_speakers ? Split::kTest
                    : i < rules.test_speakers + rules.val_speakers ? Split::kVal
                                                                   : Split::kTrain;
    for (auto& r : by_speaker[speakers[i]]) {
      r.split = s;
      out.records.push_back(std::move(r));
    }
  }
  std::sort(out.records.begin(), out.records.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return out;
}

}  // namespace ctft
