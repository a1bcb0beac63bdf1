#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hifreq/training/training.hpp"

namespace hifreq::io {

struct ManifestEntry {
  std::string scene_id;
  std::uint64_t seed = 0;
  std::filesystem::path shading;  // relative to the manifest's directory
  std::filesystem::path depth;    // low-frequency depth
  std::filesystem::path pattern;
  std::filesystem::path gt;
  std::string split;  // "train", "val" or "test"

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

/// One JSON object per line: {"scene_id", "seed", "paths": {...}, "split"}.
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

/// Loads the PFMs of one entry; `root` is the manifest's directory.
train::Sample load_sample(const std::filesystem::path& root, const ManifestEntry& entry);

}  // namespace hifreq::io
