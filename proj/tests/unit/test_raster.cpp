#include <gtest/gtest.h>

#include <cmath>

#include "../support/expect_error.hpp"
#include "../support/surface_oracle.hpp"
#include "hifreq/core/rng.hpp"
#include "hifreq/raster/raster.hpp"

using namespace hifreq;
using namespace hifreq::raster;

namespace {

// Square n x n grid of pitch `pitch` centered on `center`, lying in the plane spanned by u, v.
synth::TriangleMesh plane_mesh(const Vec3& center, const Vec3& u, const Vec3& v, std::size_t n, double pitch) {
  synth::TriangleMesh m;
  const Vec3 normal = -u.cross(v).normalized();  // faces the camera for u = x, v = y
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      const double x = synth::grid_coord(c, n, pitch), y = synth::grid_coord(r, n, pitch);
      m.vertices.push_back(center + x * u + y * v);
      m.normals.push_back(normal);
      m.surface_xy.emplace_back(x, y);
    }
  }
  for (std::uint32_t r = 0; r + 1 < n; ++r) {
    for (std::uint32_t c = 0; c + 1 < n; ++c) {
      const std::uint32_t i = r * static_cast<std::uint32_t>(n) + c;
      const std::uint32_t j = i + static_cast<std::uint32_t>(n);
      m.triangles.push_back({i, i + 1, j});
      m.triangles.push_back({i + 1, j + 1, j});
    }
  }
  return m;
}

PinholeDevice camera(std::size_t n, double focal) { return make_device(n, n, focal, RigidTransform::identity()); }

}  // namespace

TEST(Device, ProjectBackProjectRoundTrip) {
  const PinholeDevice cam = make_device(64, 48, 100.0, RigidTransform::from_euler(0.1, -0.2, 0.3, Vec3(5, -3, 20)));
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const double u = rng.uniform(0, 63), v = rng.uniform(0, 47);
    const Ray ray = cam.back_project(u, v);
    const auto p = cam.project(ray.at(rng.uniform(10, 500)));
    ASSERT_TRUE(p.has_value());
    EXPECT_NEAR(p->u, u, 1e-9);
    EXPECT_NEAR(p->v, v, 1e-9);
  }
  EXPECT_FALSE(cam.project(cam.center() - 5.0 * cam.back_project(10, 10).direction).has_value());
}

TEST(Rasterize, FrontoParallelPlaneHasConstantDepth) {
  const auto mesh = plane_mesh(Vec3(0, 0, 100), Vec3::UnitX(), Vec3::UnitY(), 5, 20.0);
  const RasterResult out = rasterize(mesh, camera(32, 40.0));
  std::size_t covered = 0;
  for (std::size_t r = 0; r < 32; ++r) {
    for (std::size_t c = 0; c < 32; ++c) {
      if (!out.depth.valid(r, c)) continue;
      ++covered;
      EXPECT_NEAR(out.depth.depth(r, c), 100.0, 1e-9);
    }
  }
  EXPECT_EQ(covered, 32u * 32u);
}

TEST(Rasterize, EmptyMeshGivesEmptyMask) {
  const RasterResult out = rasterize(synth::TriangleMesh{}, camera(8, 10.0));
  EXPECT_EQ(out.depth.valid_count(), 0u);
}

TEST(Rasterize, TrianglesBehindCameraAreDropped) {
  const auto mesh = plane_mesh(Vec3(0, 0, -50), Vec3::UnitX(), Vec3::UnitY(), 3, 20.0);
  EXPECT_EQ(rasterize(mesh, camera(16, 20.0)).depth.valid_count(), 0u);
  const auto straddle = plane_mesh(Vec3(0, 0, 0), Vec3::UnitX(), Vec3::UnitZ(), 3, 20.0);
  EXPECT_EQ(rasterize(straddle, camera(16, 20.0)).depth.valid_count(), 0u);
}

TEST(Rasterize, NearestSurfaceWins) {
  auto mesh = plane_mesh(Vec3(0, 0, 200), Vec3::UnitX(), Vec3::UnitY(), 3, 200.0);
  const auto front = plane_mesh(Vec3(0, 0, 120), Vec3::UnitX(), Vec3::UnitY(), 3, 200.0);
  const auto offset = static_cast<std::uint32_t>(mesh.vertices.size());
  mesh.vertices.insert(mesh.vertices.end(), front.vertices.begin(), front.vertices.end());
  mesh.normals.insert(mesh.normals.end(), front.normals.begin(), front.normals.end());
  mesh.surface_xy.insert(mesh.surface_xy.end(), front.surface_xy.begin(), front.surface_xy.end());
  for (auto t : front.triangles) mesh.triangles.push_back({t[0] + offset, t[1] + offset, t[2] + offset});
  const RasterResult out = rasterize(mesh, camera(16, 20.0));
  for (std::size_t i = 0; i < 16 * 16; ++i) EXPECT_NEAR(out.depth.depth[i], 120.0, 1e-9);
}

TEST(Rasterize, TiltedPlaneMatchesRayIntersection) {
  const Vec3 center(3, -2, 150);
  const RigidTransform tilt = RigidTransform::from_euler(0.4, -0.3, 0.2);
  const Vec3 u = tilt.apply_direction(Vec3::UnitX()), v = tilt.apply_direction(Vec3::UnitY());
  const auto mesh = plane_mesh(center, u, v, 9, 40.0);
  const PinholeDevice cam = camera(48, 60.0);
  const RasterResult out = rasterize(mesh, cam);
  const Vec3 n = u.cross(v);
  std::size_t checked = 0;
  for (std::size_t r = 0; r < 48; ++r) {
    for (std::size_t c = 0; c < 48; ++c) {
      if (!out.depth.valid(r, c)) continue;
      const Ray ray = cam.back_project(static_cast<double>(c), static_cast<double>(r));
      const double s = (center - ray.origin).dot(n) / ray.direction.dot(n);
      EXPECT_NEAR(out.depth.depth(r, c), ray.at(s).z(), 1e-6);
      ++checked;
    }
  }
  EXPECT_GT(checked, 1000u);
}

TEST(Rasterize, InterpolatedSurfaceCoordinatesAreConsistent) {
  const auto mesh = plane_mesh(Vec3(0, 0, 80), Vec3::UnitX(), Vec3::UnitY(), 5, 10.0);
  const PinholeDevice cam = camera(20, 30.0);
  const RasterResult out = rasterize(mesh, cam);
  for (std::size_t r = 0; r < 20; ++r) {
    for (std::size_t c = 0; c < 20; ++c) {
      if (!out.hit.hit(r, c)) continue;
      const Eigen::Vector2d xy = interpolate(mesh, mesh.surface_xy, out.hit, r, c);
      const Ray ray = cam.back_project(static_cast<double>(c), static_cast<double>(r));
      const Vec3 hit = ray.at((80.0 - ray.origin.z()) / ray.direction.z());
      EXPECT_NEAR(xy.x(), hit.x(), 1e-9);
      EXPECT_NEAR(xy.y(), hit.y(), 1e-9);
    }
  }
}

TEST(Rasterize, InvalidCameraRejected) {
  PinholeDevice cam = camera(8, 10.0);
  cam.fx = 0.0;
  EXPECT_ERROR_CODE(rasterize(synth::TriangleMesh{}, cam), ErrorCode::InvalidArgument);
}

TEST(Shading, LambertExamples) {
  Tensor normals(Shape{1, 3, 3}, 0.0), mask(Shape{1, 3}, 1.0);
  // Head-on, 45 degrees, facing away.
  normals(0, 0, 2) = -1.0;
  normals(0, 1, 0) = -std::sqrt(0.5);
  normals(0, 1, 2) = -std::sqrt(0.5);
  normals(0, 2, 2) = 1.0;
  const Tensor s = shade_lambertian(normals, mask, Vec3(0, 0, 1), 0.8);
  EXPECT_NEAR(s(0, 0), 0.8, 1e-12);
  EXPECT_NEAR(s(0, 1), 0.8 * std::sqrt(2.0) / 2.0, 1e-12);
  EXPECT_EQ(s(0, 2), 0.0);
}

TEST(Shading, MaskedPixelsAreZero) {
  Tensor normals(Shape{2, 2, 3}, 0.0), mask(Shape{2, 2}, 1.0);
  for (std::size_t i = 0; i < 4; ++i) normals[i * 3 + 2] = -1.0;
  mask(1, 0) = 0.0;
  const Tensor s = shade_lambertian(normals, mask, Vec3(0, 0, 1), 1.0);
  EXPECT_EQ(s(1, 0), 0.0);
  EXPECT_EQ(s(0, 0), 1.0);
}

TEST(Shading, BoundedByAlbedo) {
  Rng rng(6);
  Tensor normals(Shape{10, 10, 3}), mask(Shape{10, 10}, 1.0);
  for (std::size_t i = 0; i < 100; ++i) {
    Vec3 n(rng.normal(), rng.normal(), rng.normal());
    n.normalize();
    for (int k = 0; k < 3; ++k) normals[i * 3 + k] = n[k];
  }
  const Tensor s = shade_lambertian(normals, mask, synth::light_direction(40, 170), 0.7);
  for (double v : s.values()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 0.7 + 1e-12);
  }
}

TEST(GridPattern, LitPixelsMatchDefinition) {
  const Tensor g = grid_pattern(13, 11, 5, 2);
  for (std::size_t y = 0; y < 11; ++y) {
    for (std::size_t x = 0; x < 13; ++x) {
      const bool lit = x % 5 < 2 || y % 5 < 2;
      EXPECT_EQ(g(y, x), lit ? 1.0 : 0.0) << x << "," << y;
    }
  }
}

TEST(GridPattern, LinesMustLeaveGaps) {
  EXPECT_ERROR_CODE(grid_pattern(6, 6, 3, 3), ErrorCode::BadSpacing);
  EXPECT_ERROR_CODE(grid_pattern(6, 6, 3, 0), ErrorCode::BadSpacing);
}

TEST(SampleBilinear, InterpolatesAndRejectsOutside) {
  Tensor img(Shape{2, 2}, 0.0);
  img(0, 1) = 1.0;
  img(1, 1) = 3.0;
  EXPECT_NEAR(*sample_bilinear(img, 0.5, 0.5), 1.0, 1e-12);
  EXPECT_NEAR(*sample_bilinear(img, 1.0, 0.25), 1.5, 1e-12);
  EXPECT_FALSE(sample_bilinear(img, -0.01, 0.0).has_value());
  EXPECT_FALSE(sample_bilinear(img, 0.0, 1.01).has_value());
}

TEST(ProjectPattern, WhitePatternFromCameraGivesCosine) {
  const RigidTransform tilt = RigidTransform::from_euler(0.3, 0.0, 0.0);
  const auto mesh = plane_mesh(Vec3(0, 0, 100), tilt.apply_direction(Vec3::UnitX()),
                               tilt.apply_direction(Vec3::UnitY()), 5, 40.0);
  const PinholeDevice cam = camera(16, 20.0);
  const Tensor white(Shape{16, 16}, 1.0);
  const Tensor img = project_pattern(mesh, cam, cam, white);
  const RasterResult view = rasterize(mesh, cam);
  const Vec3 n = -tilt.apply_direction(Vec3::UnitZ());
  for (std::size_t r = 1; r + 1 < 16; ++r) {
    for (std::size_t c = 1; c + 1 < 16; ++c) {
      ASSERT_TRUE(view.depth.valid(r, c));
      const Ray ray = cam.back_project(static_cast<double>(c), static_cast<double>(r));
      EXPECT_NEAR(img(r, c), n.dot(-ray.direction), 1e-9);
    }
  }
}

TEST(ProjectPattern, DarkPatternGivesZero) {
  const auto mesh = plane_mesh(Vec3(0, 0, 100), Vec3::UnitX(), Vec3::UnitY(), 5, 40.0);
  const PinholeDevice cam = camera(16, 20.0);
  const PinholeDevice proj = make_device(16, 16, 20.0, RigidTransform::from_euler(0, 0, 0, Vec3(-10, 0, 0)));
  const Tensor img = project_pattern(mesh, cam, proj, Tensor(Shape{16, 16}, 0.0));
  for (double v : img.values()) EXPECT_EQ(v, 0.0);
}

TEST(ProjectPattern, SingleLitPixelLandsAtItsImage) {
  const auto mesh = plane_mesh(Vec3(0, 0, 100), Vec3::UnitX(), Vec3::UnitY(), 5, 40.0);
  const PinholeDevice cam = camera(32, 40.0);
  // Projector translated sideways; a lit pixel at (u, v) maps to a known spot on the plane.
  const PinholeDevice proj = make_device(32, 32, 40.0, RigidTransform::from_euler(0, 0, 0, Vec3(-5, 0, 0)));
  Tensor pat(Shape{32, 32}, 0.0);
  pat(12, 20) = 1.0;
  const Tensor img = project_pattern(mesh, cam, proj, pat);
  const Ray pr = proj.back_project(20, 12);
  const Vec3 world = pr.at((100.0 - pr.origin.z()) / pr.direction.z());
  const auto p = cam.project(world);
  ASSERT_TRUE(p.has_value());
  double peak = 0.0;
  std::size_t pr_row = 0, pr_col = 0;
  for (std::size_t r = 0; r < 32; ++r) {
    for (std::size_t c = 0; c < 32; ++c) {
      if (img(r, c) > peak) {
        peak = img(r, c);
        pr_row = r;
        pr_col = c;
      }
    }
  }
  EXPECT_GT(peak, 0.5);
  EXPECT_NEAR(static_cast<double>(pr_col), p->u, 1.0);
  EXPECT_NEAR(static_cast<double>(pr_row), p->v, 1.0);
}

TEST(ProjectPattern, ResolutionMismatchRejected) {
  const auto mesh = plane_mesh(Vec3(0, 0, 100), Vec3::UnitX(), Vec3::UnitY(), 3, 40.0);
  const PinholeDevice cam = camera(8, 10.0);
  EXPECT_ERROR_CODE(project_pattern(mesh, cam, cam, Tensor(Shape{4, 8}, 1.0)), ErrorCode::SizeMismatch);
}

TEST(RenderScene, OutputsAreBoundedAndAligned) {
  RigConfig rig = desk_rig();
  rig.camera_width = rig.camera_height = 64;
  rig.mesh_pitch = 0.25;
  rig.surface_size = 30.0;
  Rng rng(11);
  synth::SynthConfig cfg;
  const synth::SceneSpec scene = synth::sample_scene(rng, cfg);
  const RenderOutput out = render_scene(scene, rig);
  ASSERT_EQ(out.shading.shape(), (Shape{64, 64}));
  ASSERT_EQ(out.pattern.shape(), (Shape{64, 64}));
  EXPECT_GT(out.depth.valid_count(), 64u * 64u / 2);
  for (std::size_t i = 0; i < 64 * 64; ++i) {
    EXPECT_GE(out.shading[i], 0.0);
    EXPECT_LE(out.shading[i], 1.0);
    EXPECT_GE(out.pattern[i], 0.0);
    EXPECT_LE(out.pattern[i], 1.0);
    if (out.depth.mask[i] == 0.0) {
      EXPECT_EQ(out.shading[i], 0.0);
      EXPECT_EQ(out.pattern[i], 0.0);
    } else {
      EXPECT_NEAR(out.depth.depth[i], scene.pose.base_depth, 20.0);
    }
  }
}

TEST(RenderScene, DepthAgreesWithAnalyticSurface) {
  RigConfig rig = desk_rig();
  rig.camera_width = rig.camera_height = 48;
  rig.surface_size = 20.0;
  synth::SceneSpec scene;
  scene.params.terms = {{0.4, 0.2, 0.5, 0.9}};
  scene.pose = {600.0, 0.05, -0.08, 0.4};
  const RenderOutput out = render_scene(scene, rig);
  const PinholeDevice cam = rig_camera(rig);
  double worst = 0.0;
  for (std::size_t r = 0; r < 48; ++r) {
    for (std::size_t c = 0; c < 48; ++c) {
      if (!out.depth.valid(r, c)) continue;
      const auto hit = hifreq::testing::intersect_surface(scene.params, scene.pose, rig.surface_size / 2,
                                                  cam.back_project(static_cast<double>(c), static_cast<double>(r)));
      if (!hit) continue;
      worst = std::max(worst, std::abs(hit->world.z() - out.depth.depth(r, c)));
    }
  }
  EXPECT_LT(worst, 0.02);
}
