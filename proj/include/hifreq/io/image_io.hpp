#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "hifreq/core/depth_map.hpp"
#include "hifreq/core/tensor.hpp"

namespace hifreq::io {

/// Single-channel PFM ("Pf", scale -1 for little-endian, rows stored bottom-up).
/// Values are rounded to float32.
void write_pfm(const std::filesystem::path& path, const Tensor& image);
Tensor read_pfm(const std::filesystem::path& path);

/// Depth maps are stored with 0 at invalid pixels; mask = depth > 0 on read.
void write_depth_pfm(const std::filesystem::path& path, const DepthMap& depth);
DepthMap read_depth_pfm(const std::filesystem::path& path);

struct Image8 {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 0;  // 1 (gray) or 3 (RGB)
  std::vector<std::uint8_t> pixels;  // row-major, interleaved
};

void write_png(const std::filesystem::path& path, const Image8& image);
Image8 read_png(const std::filesystem::path& path);

/// Linear map of [lo, hi] to 0..255 (clamped) as a gray image.
Image8 to_gray8(const Tensor& image, double lo, double hi);

}  // namespace hifreq::io
