#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hifreq/core/depth_map.hpp"
#include "hifreq/core/rng.hpp"
#include "hifreq/raster/raster.hpp"

namespace hifreq::sparse {

struct DepthSample {
  std::size_t u = 0;  // column
  std::size_t v = 0;  // row
  double depth = 0.0;
};

/// Depth measured at scattered camera pixels.
struct SparseDepth {
  std::vector<DepthSample> samples;
  std::size_t width = 0;
  std::size_t height = 0;
};

/// Keeps masked pixels where the projected pattern exceeds 0.5 and
/// (u + v) % stride == 0, i.e. every stride-th pixel along each grid line, and
/// adds N(0, noise_sigma) to their depth. Throws NoSamples.
SparseDepth sample_sparse(const DepthMap& depth_gt, const Tensor& pattern_cam, std::size_t stride, double noise_sigma,
                          Rng& rng);

/// Plain-text table, one "u v depth" line per sample after a "# width height" header.
void write_sparse(std::ostream& os, const SparseDepth& s);
SparseDepth read_sparse(std::istream& is);

/// Midpoint of the common perpendicular between the camera and projector rays. Throws ParallelRays.
Vec3 triangulate(const raster::PinholeDevice& cam, const raster::PinholeDevice& proj, const Eigen::Vector2d& cam_px,
                 const Eigen::Vector2d& proj_px);

/// Thin-plate spline phi(r) = r^2 log r (phi(0) = 0).
inline double tps_kernel(double r2) { return r2 > 0.0 ? 0.5 * r2 * std::log(r2) : 0.0; }

/// Thin-plate spline with affine term, in pixel coordinates:
/// f(u, v) = a + b u + c v + sum_i w_i phi(|(u, v) - c_i|).
struct RbfModel {
  std::vector<Eigen::Vector2d> centers;
  Eigen::VectorXd weights;
  Eigen::Vector3d affine = Eigen::Vector3d::Zero();  // (a, b, c)
  double smoothing = 0.0;

  double evaluate(double u, double v) const;
};

/// Solves the (n+3)x(n+3) TPS system with smoothing * I on the kernel block.
/// More than `max_centers` samples are subsampled uniformly at random first.
/// Throws SingularSystem.
RbfModel rbf_fit(const SparseDepth& s, double smoothing, std::size_t max_centers, Rng& rng);

/// Dense evaluation on every pixel of `roi`; the result's mask is `roi`.
DepthMap rbf_eval(const RbfModel& model, const Tensor& roi);

}  // namespace hifreq::sparse
