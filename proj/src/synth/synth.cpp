#include "hifreq/synth/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "hifreq/core/error.hpp"

namespace hifreq::synth {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double deg2rad(double d) { return d * std::numbers::pi / 180.0; }

void check_range(const Range& r, const char* name) {
  if (!(r.min <= r.max)) fail(ErrorCode::EmptyRange, std::string("empty range for ") + name);
}

double draw(Rng& rng, const Range& r) { return rng.uniform(r.min, r.max); }

bool within(double v, const Range& r, double tol) { return v >= r.min - tol && v <= r.max + tol; }

}  // namespace

RigidTransform ScenePose::transform() const {
  return RigidTransform::from_euler(pitch, yaw, roll, Vec3(0.0, 0.0, base_depth));
}

double AlbedoTexture::factor(double x, double y) const {
  if (amplitude == 0.0) return 1.0;
  const double xp = x * std::cos(theta) + y * std::sin(theta);
  return 1.0 + amplitude * std::cos(kTwoPi * frequency * xp + phase);
}

double height_at(const SinusoidParams& params, double x, double y) {
  double h = 0.0;
  for (const Sinusoid& s : params.terms) {
    const double xp = x * std::cos(s.theta) + y * std::sin(s.theta);
    h += s.alpha * std::cos(kTwoPi * xp * s.lambda + s.psi);
  }
  return h;
}

Eigen::Vector2d height_gradient(const SinusoidParams& params, double x, double y) {
  Eigen::Vector2d g = Eigen::Vector2d::Zero();
  for (const Sinusoid& s : params.terms) {
    const double c = std::cos(s.theta);
    const double sn = std::sin(s.theta);
    const double xp = x * c + y * sn;
    const double d = -s.alpha * kTwoPi * s.lambda * std::sin(kTwoPi * xp * s.lambda + s.psi);
    g.x() += d * c;
    g.y() += d * sn;
  }
  return g;
}

HeightMap height_map(const SinusoidParams& params, std::size_t width, std::size_t height, double pitch) {
  if (width < 2 || height < 2) fail(ErrorCode::BadParams, "height map needs at least 2x2 samples");
  if (!(pitch > 0.0)) fail(ErrorCode::BadParams, "height map pitch must be positive");
  for (const Sinusoid& s : params.terms) {
    if (!(s.lambda > 0.0)) fail(ErrorCode::BadParams, "sinusoid frequency must be positive");
    if (!(s.alpha >= 0.0)) fail(ErrorCode::BadParams, "sinusoid amplitude must be non-negative");
  }
  HeightMap h({height, width}, 0.0);
  for (std::size_t r = 0; r < height; ++r) {
    const double y = grid_coord(r, height, pitch);
    for (std::size_t c = 0; c < width; ++c) {
      h(r, c) = height_at(params, grid_coord(c, width, pitch), y);
    }
  }
  return h;
}

Vec3 light_direction(double polar_deg, double azimuth_deg) {
  const double p = deg2rad(polar_deg);
  const double a = deg2rad(azimuth_deg);
  const Vec3 toward_light(std::sin(p) * std::cos(a), std::sin(p) * std::sin(a), -std::cos(p));
  return -toward_light.normalized();
}

void validate(const SynthConfig& cfg) {
  if (cfg.terms < 1) fail(ErrorCode::BadParams, "synth.terms must be >= 1");
  check_range(cfg.alpha, "alpha");
  check_range(cfg.lambda, "lambda");
  check_range(cfg.psi, "psi");
  check_range(cfg.theta, "theta");
  check_range(cfg.albedo, "albedo");
  check_range(cfg.light_polar_deg, "light_polar_deg");
  check_range(cfg.light_azimuth_deg, "light_azimuth_deg");
  check_range(cfg.projector_shift_x, "projector_shift_x");
  check_range(cfg.projector_shift_y, "projector_shift_y");
  check_range(cfg.projector_shift_z, "projector_shift_z");
  check_range(cfg.texture_amplitude, "texture_amplitude");
  check_range(cfg.texture_frequency, "texture_frequency");
  if (cfg.alpha.min < 0.0) fail(ErrorCode::BadParams, "alpha must be non-negative");
  if (cfg.lambda.min <= 0.0) fail(ErrorCode::BadParams, "lambda must be positive");
  if (cfg.albedo.min <= 0.0 || cfg.albedo.max > 1.0) fail(ErrorCode::BadParams, "albedo must lie in (0, 1]");
  if (cfg.base_depth <= 0.0) fail(ErrorCode::BadParams, "base_depth must be positive");
  if (cfg.max_pitch_deg < 0.0 || cfg.max_yaw_deg < 0.0 || cfg.max_roll_deg < 0.0 || cfg.max_roll_deg > 180.0) {
    fail(ErrorCode::BadParams, "pose limits must be non-negative and roll <= 180 degrees");
  }
  if (cfg.light_polar_deg.min < 0.0 || cfg.light_polar_deg.max >= 90.0) {
    fail(ErrorCode::BadParams, "light polar angle must lie in [0, 90) degrees");
  }
  if (cfg.light_azimuth_deg.max - cfg.light_azimuth_deg.min > kMaxLightAzimuthSpanDeg) {
    fail(ErrorCode::BadParams, "light azimuth span exceeds the one-sided cone");
  }
  if (cfg.texture_amplitude.min < 0.0 || cfg.texture_amplitude.max >= 1.0) {
    fail(ErrorCode::BadParams, "texture amplitude must lie in [0, 1)");
  }
  if (cfg.shading_noise < 0.0) fail(ErrorCode::BadParams, "shading_noise must be non-negative");
}

SceneSpec sample_scene(Rng& rng, const SynthConfig& cfg) {
  validate(cfg);
  SceneSpec scene;
  scene.seed = rng.next_u64();
  scene.params.terms.resize(cfg.terms);
  for (Sinusoid& s : scene.params.terms) {
    s.alpha = draw(rng, cfg.alpha);
    s.lambda = draw(rng, cfg.lambda);
    s.psi = draw(rng, cfg.psi);
    s.theta = draw(rng, cfg.theta);
  }
  scene.pose.base_depth = cfg.base_depth;
  scene.pose.pitch = deg2rad(rng.uniform(-cfg.max_pitch_deg, cfg.max_pitch_deg));
  scene.pose.yaw = deg2rad(rng.uniform(-cfg.max_yaw_deg, cfg.max_yaw_deg));
  scene.pose.roll = deg2rad(rng.uniform(-cfg.max_roll_deg, cfg.max_roll_deg));
  scene.light_dir = light_direction(draw(rng, cfg.light_polar_deg), draw(rng, cfg.light_azimuth_deg));
  scene.albedo = draw(rng, cfg.albedo);
  scene.projector_shift =
      Vec3(draw(rng, cfg.projector_shift_x), draw(rng, cfg.projector_shift_y), draw(rng, cfg.projector_shift_z));
  scene.texture.amplitude = draw(rng, cfg.texture_amplitude);
  scene.texture.frequency = draw(rng, cfg.texture_frequency);
  scene.texture.theta = rng.uniform(0.0, std::numbers::pi);
  scene.texture.phase = rng.uniform(0.0, kTwoPi);
  scene.shading_noise = cfg.shading_noise;
  return scene;
}

bool scene_satisfies(const SceneSpec& scene, const SynthConfig& cfg, double tol) {
  if (scene.params.count() != cfg.terms || scene.params.count() < 1) return false;
  for (const Sinusoid& s : scene.params.terms) {
    if (s.alpha < 0.0 || s.lambda <= 0.0) return false;
    if (!within(s.alpha, cfg.alpha, tol) || !within(s.lambda, cfg.lambda, tol)) return false;
  }
  if (std::abs(scene.light_dir.norm() - 1.0) > tol) return false;
  // Recover (polar, azimuth) of the source and test them against the cone.
  const Vec3 toward = -scene.light_dir;
  const double polar = std::acos(std::clamp(-toward.z(), -1.0, 1.0)) * 180.0 / std::numbers::pi;
  if (!within(polar, cfg.light_polar_deg, 1e-6)) return false;
  if (std::hypot(toward.x(), toward.y()) > 1e-12) {
    const double az = std::atan2(toward.y(), toward.x()) * 180.0 / std::numbers::pi;
    bool ok = false;
    for (double wrap : {-360.0, 0.0, 360.0}) ok = ok || within(az + wrap, cfg.light_azimuth_deg, 1e-6);
    if (!ok) return false;
  }
  const double lim = std::numbers::pi / 180.0;
  if (std::abs(scene.pose.pitch) > cfg.max_pitch_deg * lim + tol) return false;
  if (std::abs(scene.pose.yaw) > cfg.max_yaw_deg * lim + tol) return false;
  if (std::abs(scene.pose.roll) > std::min(cfg.max_roll_deg * lim, std::numbers::pi) + tol) return false;
  return scene.albedo > 0.0 && scene.albedo <= 1.0;
}

TriangleMesh height_map_to_mesh(const HeightMap& h, const ScenePose& pose, double pitch) {
  if (h.rank() != 2 || h.dim(0) < 2 || h.dim(1) < 2) fail(ErrorCode::DegenerateGrid, "mesh needs a height map of at least 2x2");
  if (!(pitch > 0.0)) fail(ErrorCode::BadParams, "mesh pitch must be positive");
  const std::size_t rows = h.dim(0);
  const std::size_t cols = h.dim(1);
  const RigidTransform world = pose.transform();

  TriangleMesh mesh;
  mesh.vertices.resize(rows * cols);
  mesh.surface_xy.resize(rows * cols);
  mesh.normals.assign(rows * cols, Vec3::Zero());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double x = grid_coord(c, cols, pitch);
      const double y = grid_coord(r, rows, pitch);
      mesh.surface_xy[r * cols + c] = Eigen::Vector2d(x, y);
      mesh.vertices[r * cols + c] = world.apply(Vec3(x, y, h(r, c)));
    }
  }

  mesh.triangles.reserve(2 * (rows - 1) * (cols - 1));
  for (std::size_t r = 0; r + 1 < rows; ++r) {
    for (std::size_t c = 0; c + 1 < cols; ++c) {
      const auto v00 = static_cast<std::uint32_t>(r * cols + c);
      const auto v01 = v00 + 1;
      const auto v10 = static_cast<std::uint32_t>(v00 + cols);
      const auto v11 = v10 + 1;
      mesh.triangles.push_back({v00, v10, v01});
      mesh.triangles.push_back({v01, v10, v11});
    }
  }

  // Area-weighted accumulation: the unnormalized cross product carries twice the face area.
  for (const auto& tri : mesh.triangles) {
    const Vec3& a = mesh.vertices[tri[0]];
    const Vec3 face = (mesh.vertices[tri[1]] - a).cross(mesh.vertices[tri[2]] - a);
    for (std::uint32_t v : tri) mesh.normals[v] += face;
  }
  for (Vec3& n : mesh.normals) n.normalize();
  return mesh;
}

}  // namespace hifreq::synth
