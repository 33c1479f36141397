// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

namespace ctft {

enum class Split { kTrain, kVal, kTest };

const char* to_string(Split s);
Split parse_split(const std::string& s);

struct ClipRecord {
  std::string id;
  std::filesystem::path path;
  std::string speaker;
  Split split = Split::kTrain;
  double duration = 0.0;
  int rate = 0;
};

struct ManifestRules {
  std::set<std::string> excluded_speakers{"p280", "p315"};
  // Files tagged _micN with N other than this are skipped. Untagged files are kept.
  std::string mic = "mic1";
  int test_speakers = 11;
  // Held out of the training speakers.
  int val_speakers = 5;
  uint64_t seed = 0;
};

struct Manifest {
  // Sorted by id.
  std::vector<ClipRecord> records;

  std::vector<ClipRecord> split(Split s) const;
  std::set<std::string> speakers(Split s) const;

  void write_jsonl(std::ostream& os) const;
  void save(const std::filesystem::path& path) const;
  static Manifest read_jsonl(std::istream& is);
  static Manifest load(const std::filesystem::path& path);
};

// Scans <root>/<speaker>/*.wav. Speakers are sorted, shuffled with the seed,
// and the first test_speakers become test, the next val_speakers val.
// Throws IoError for an empty corpus and DomainError for duplicate ids or a
// split that leaves no training speaker.
Manifest build_manifest(const std::filesystem::path& root, const ManifestRules& rules = {});

}  // namespace ctft
