#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "hifreq/core/depth_map.hpp"
#include "hifreq/core/geometry.hpp"
#include "hifreq/core/tensor.hpp"
#include "hifreq/synth/synth.hpp"

namespace hifreq::raster {

/// Perspective camera or projector. Pixel (col, row) has its center at
/// (u, v) = (col, row); origin top-left, v grows downward.
struct PinholeDevice {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  std::size_t width = 1;
  std::size_t height = 1;
  RigidTransform pose;  // world -> device

  bool is_valid() const;

  /// Device-frame depth and pixel position of a world point; nullopt behind the device.
  struct Projection {
    double u;
    double v;
    double z;
  };
  std::optional<Projection> project(const Vec3& world) const;

  /// World-space ray through pixel position (u, v).
  Ray back_project(double u, double v) const;

  Vec3 center() const { return pose.inverse().translation; }
};

/// Centered-principal-point device with square pixels.
PinholeDevice make_device(std::size_t width, std::size_t height, double focal, const RigidTransform& pose);

/// Per-pixel triangle id (-1 for background) and perspective-correct barycentrics.
struct HitBuffer {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::int32_t> triangle;
  std::vector<Eigen::Vector3d> bary;

  bool hit(std::size_t row, std::size_t col) const { return triangle[row * width + col] >= 0; }
};

struct RasterResult {
  DepthMap depth;  // camera-frame z of the nearest surface under each pixel center
  Tensor normal;   // [H x W x 3], world frame, unit on covered pixels
  HitBuffer hit;
};

/// Z-buffered rasterization sampled at pixel centers. Triangles with any
/// vertex at or behind the camera plane are dropped.
RasterResult rasterize(const synth::TriangleMesh& mesh, const PinholeDevice& cam);

/// Interpolates a per-vertex attribute at a covered pixel.
template <typename V>
V interpolate(const synth::TriangleMesh& mesh, const std::vector<V>& attr, const HitBuffer& hit, std::size_t row,
              std::size_t col) {
  const std::size_t i = row * hit.width + col;
  const auto& tri = mesh.triangles[static_cast<std::size_t>(hit.triangle[i])];
  const Eigen::Vector3d& b = hit.bary[i];
  return b[0] * attr[tri[0]] + b[1] * attr[tri[1]] + b[2] * attr[tri[2]];
}

/// albedo * max(0, n . -light_dir) on masked pixels, 0 elsewhere.
Tensor shade_lambertian(const Tensor& normals, const Tensor& mask, const Vec3& light_dir, double albedo);

/// Binary grid: pixel (x, y) lit iff x mod spacing < line_width or y mod spacing < line_width.
Tensor grid_pattern(std::size_t width, std::size_t height, std::size_t spacing, std::size_t line_width);

/// Camera image of `pattern_img` projected by `proj` onto the surface: bilinear
/// pattern lookup times the cosine toward the projector center. No occlusion
/// between surface parts is modeled.
Tensor project_pattern(const synth::TriangleMesh& mesh, const PinholeDevice& cam, const PinholeDevice& proj,
                       const Tensor& pattern_img);
Tensor project_pattern(const synth::TriangleMesh& mesh, const RasterResult& view, const PinholeDevice& proj,
                       const Tensor& pattern_img);

/// Bilinear lookup at (u, v); nullopt outside [0, W-1] x [0, H-1].
std::optional<double> sample_bilinear(const Tensor& image, double u, double v);

/// Fixed camera/projector rig and surface discretization.
struct RigConfig {
  std::size_t camera_width = 240;
  std::size_t camera_height = 240;
  double camera_focal = 2400.0;  // px; 0.25 mm/px at 600 mm
  std::size_t projector_width = 320;
  std::size_t projector_height = 320;
  double projector_focal = 2400.0;
  Vec3 projector_position = Vec3(100.0, 0.0, 0.0);  // nominal, world mm
  double mesh_pitch = 0.0625;                        // mm between height samples
  double surface_size = 90.0;                        // mm, side of the square height field
  std::size_t grid_spacing = 48;
  std::size_t grid_line_width = 2;

  friend bool operator==(const RigConfig&, const RigConfig&) = default;
};

RigConfig desk_rig();
RigConfig paper_rig();

PinholeDevice rig_camera(const RigConfig& rig);

/// Projector aimed at the surface center from its nominal position, then
/// translated by `shift` with the orientation held fixed.
PinholeDevice rig_projector(const RigConfig& rig, double base_depth, const Vec3& shift);

struct RenderOutput {
  Tensor shading;  // [H x W] in [0, 1]
  DepthMap depth;
  Tensor pattern;  // [H x W] in [0, 1]
};

/// Renders one scene: height map -> mesh -> rasterized depth, Lambertian
/// shading (with albedo texture and sensor noise if the scene has them) and
/// the projected grid pattern.
RenderOutput render_scene(const synth::SceneSpec& scene, const RigConfig& rig);

}  // namespace hifreq::raster
