#pragma once

#include <cstddef>

#include "hifreq/core/tensor.hpp"

namespace hifreq {

/// Depth in millimeters over an H x W grid with a {0,1} validity mask.
/// Depth values where mask == 0 carry no meaning.
struct DepthMap {
  Tensor depth;
  Tensor mask;

  DepthMap() = default;
  DepthMap(std::size_t width, std::size_t height)
      : depth({height, width}, 0.0), mask({height, width}, 0.0) {}
  DepthMap(Tensor depth_mm, Tensor valid);

  std::size_t width() const { return depth.dim(1); }
  std::size_t height() const { return depth.dim(0); }
  bool valid(std::size_t row, std::size_t col) const { return mask(row, col) != 0.0; }
  std::size_t valid_count() const;
};

/// Masked mean and population standard deviation of `values` (64-bit accumulation).
struct MaskedStats {
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t count = 0;
};
MaskedStats masked_stats(const Tensor& values, const Tensor& mask);

}  // namespace hifreq
