#include "hifreq/io/manifest.hpp"

#include <fstream>
#include <nlohmann/json.hpp>

#include "hifreq/core/error.hpp"
#include "hifreq/io/image_io.hpp"

namespace hifreq::io {

using nlohmann::json;

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorCode::IoError, path.string() + ": cannot open for writing");
  for (const ManifestEntry& e : entries) {
    json j = json::object();
    j["scene_id"] = e.scene_id;
    j["seed"] = e.seed;
    j["paths"] = {{"shading", e.shading.generic_string()},
                  {"depth", e.depth.generic_string()},
                  {"pattern", e.pattern.generic_string()},
                  {"gt", e.gt.generic_string()}};
    j["split"] = e.split;
    os << j.dump() << '\n';
  }
  if (!os) fail(ErrorCode::IoError, path.string() + ": write failed");
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorCode::IoError, path.string() + ": cannot open for reading");
  std::vector<ManifestEntry> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      const json& p = j.at("paths");
      ManifestEntry e;
      e.scene_id = j.at("scene_id").get<std::string>();
      e.seed = j.at("seed").get<std::uint64_t>();
      e.shading = p.at("shading").get<std::string>();
      e.depth = p.at("depth").get<std::string>();
      e.pattern = p.at("pattern").get<std::string>();
      e.gt = p.value("gt", std::string());
      e.split = j.at("split").get<std::string>();
      out.push_back(std::move(e));
    } catch (const json::exception& ex) {
      fail(ErrorCode::ConfigError, path.string() + ":" + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return out;
}

train::Sample load_sample(const std::filesystem::path& root, const ManifestEntry& entry) {
  train::Sample s;
  s.scene_id = entry.scene_id;
  s.shading = read_pfm(root / entry.shading);
  s.lowfreq = read_depth_pfm(root / entry.depth);
  s.pattern = read_pfm(root / entry.pattern);
  if (!entry.gt.empty()) {
    s.gt = read_depth_pfm(root / entry.gt);
    if (s.gt.depth.shape() != s.lowfreq.depth.shape()) fail(ErrorCode::ShapeMismatch, entry.scene_id + ": gt size");
    for (std::size_t i = 0; i < s.gt.mask.size(); ++i) {
      const double m = s.gt.mask[i] * s.lowfreq.mask[i];
      s.gt.mask[i] = m;
      s.lowfreq.mask[i] = m;
    }
  }
  if (s.shading.shape() != s.lowfreq.depth.shape() || s.pattern.shape() != s.shading.shape()) {
    fail(ErrorCode::ShapeMismatch, entry.scene_id + ": image sizes differ");
  }
  return s;
}

}  // namespace hifreq::io
