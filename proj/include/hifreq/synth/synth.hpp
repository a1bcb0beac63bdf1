#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "hifreq/core/geometry.hpp"
#include "hifreq/core/rng.hpp"
#include "hifreq/core/tensor.hpp"

namespace hifreq::synth {

/// One harmonic term: alpha * cos(2*pi * x' * lambda + psi), x' = x cos(theta) + y sin(theta).
/// `lambda` multiplies position, so it is a spatial frequency in cycles/mm.
struct Sinusoid {
  double alpha = 0.0;   // mm
  double lambda = 0.1;  // cycles/mm
  double psi = 0.0;     // rad
  double theta = 0.0;   // rad
};

struct SinusoidParams {
  std::vector<Sinusoid> terms;

  std::size_t count() const { return terms.size(); }
};

/// Height field over an H x W grid, millimeters.
using HeightMap = Tensor;

/// Rigid placement of the height-field plane in front of the camera.
struct ScenePose {
  double base_depth = 600.0;  // mm, surface center along the optical axis
  double pitch = 0.0;         // rad, about x
  double yaw = 0.0;           // rad, about y
  double roll = 0.0;          // rad, about z

  /// Local surface frame (x, y, height) to camera/world frame.
  RigidTransform transform() const;
};

/// Multiplicative albedo variation 1 + amplitude * cos(2*pi*frequency*x' + phase).
struct AlbedoTexture {
  double amplitude = 0.0;
  double frequency = 0.01;  // cycles/mm
  double theta = 0.0;
  double phase = 0.0;

  double factor(double x, double y) const;
};

struct SceneSpec {
  SinusoidParams params;
  ScenePose pose;
  Vec3 light_dir = Vec3(0, 0, 1);  // direction light travels
  double albedo = 0.8;
  AlbedoTexture texture;
  double shading_noise = 0.0;  // sigma of additive sensor noise on shading
  Vec3 projector_shift = Vec3::Zero();
  std::uint64_t seed = 0;
};

struct Range {
  double min = 0.0;
  double max = 0.0;

  friend bool operator==(const Range&, const Range&) = default;
};

struct SynthConfig {
  std::size_t terms = 2;
  Range alpha{0.1, 1.0};
  Range lambda{0.05, 0.5};
  Range psi{0.0, 6.283185307179586};
  Range theta{0.0, 3.141592653589793};
  Range albedo{0.6, 0.95};
  double base_depth = 600.0;
  double max_pitch_deg = 10.0;
  double max_yaw_deg = 10.0;
  double max_roll_deg = 180.0;
  // Light position, degrees: polar angle from the camera axis toward the
  // camera, azimuth in the image plane. Azimuth span is capped at 90 degrees
  // so the light always stays on one side of the object.
  Range light_polar_deg{45.0, 45.0};
  Range light_azimuth_deg{180.0, 180.0};
  Range projector_shift_x{-8.0, 8.0};
  Range projector_shift_y{-8.0, 8.0};
  Range projector_shift_z{0.0, 0.0};
  Range texture_amplitude{0.0, 0.0};
  Range texture_frequency{0.01, 0.03};
  double shading_noise = 0.0;

  friend bool operator==(const SynthConfig&, const SynthConfig&) = default;
};

constexpr double kMaxLightAzimuthSpanDeg = 90.0;

/// Evaluates the harmonic sum at physical coordinates (x, y) in mm.
double height_at(const SinusoidParams& params, double x, double y);

/// (dH/dx, dH/dy) at (x, y).
Eigen::Vector2d height_gradient(const SinusoidParams& params, double x, double y);

/// Physical coordinate of grid index `i` on an axis of `n` samples: (i - (n-1)/2) * pitch.
inline double grid_coord(std::size_t i, std::size_t n, double pitch) {
  return (static_cast<double>(i) - 0.5 * static_cast<double>(n - 1)) * pitch;
}

/// H[r, c] = height_at(grid_coord(c), grid_coord(r)). Throws BadParams.
HeightMap height_map(const SinusoidParams& params, std::size_t width, std::size_t height, double pitch);

/// Unit light travel direction for a source at (polar, azimuth) degrees.
Vec3 light_direction(double polar_deg, double azimuth_deg);

/// Draws every scene field uniformly from its configured range. Throws EmptyRange.
SceneSpec sample_scene(Rng& rng, const SynthConfig& cfg);

/// Checks SceneSpec invariants against `cfg` (light cone, pose limits, parameter signs).
bool scene_satisfies(const SceneSpec& scene, const SynthConfig& cfg, double tol = 1e-9);

void validate(const SynthConfig& cfg);

struct TriangleMesh {
  std::vector<Vec3> vertices;                       // world, mm
  std::vector<Vec3> normals;                        // unit, per vertex
  std::vector<Eigen::Vector2d> surface_xy;          // local (x, y) before posing
  std::vector<std::array<std::uint32_t, 3>> triangles;

  bool empty() const { return triangles.empty(); }
};

/// Regular triangulation of the height grid, 2(W-1)(H-1) triangles, wound so
/// that an unposed flat map faces the camera (normal (0,0,-1)). Vertex normals
/// are the normalized sum of adjacent face normals. Throws DegenerateGrid.
TriangleMesh height_map_to_mesh(const HeightMap& h, const ScenePose& pose, double pitch);

}  // namespace hifreq::synth
