#include "hifreq/core/tensor.hpp"

#include "hifreq/core/depth_map.hpp"

namespace hifreq {

std::string shape_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

DepthMap::DepthMap(Tensor depth_mm, Tensor valid) : depth(std::move(depth_mm)), mask(std::move(valid)) {
  if (depth.rank() != 2 || !depth.same_shape(mask)) {
    fail(ErrorCode::ShapeMismatch, "depth map needs matching 2-D depth and mask");
  }
}

std::size_t DepthMap::valid_count() const {
  std::size_t n = 0;
  for (double m : mask.values()) n += (m != 0.0);
  return n;
}

MaskedStats masked_stats(const Tensor& values, const Tensor& mask) {
  if (!values.same_shape(mask)) fail(ErrorCode::ShapeMismatch, "masked_stats: shape mismatch");
  MaskedStats s;
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (mask[i] != 0.0) {
      sum += values[i];
      ++s.count;
    }
  }
  if (s.count == 0) return s;
  s.mean = sum / static_cast<double>(s.count);
  double ss = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (mask[i] != 0.0) {
      const double d = values[i] - s.mean;
      ss += d * d;
    }
  }
  s.stddev = std::sqrt(ss / static_cast<double>(s.count));
  return s;
}

}  // namespace hifreq
