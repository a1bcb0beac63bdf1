#include "hifreq/raster/raster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hifreq/core/error.hpp"
#include "hifreq/core/parallel.hpp"
#include "hifreq/core/rng.hpp"

namespace hifreq::raster {

namespace {

constexpr double kNearPlane = 1e-6;  // mm

struct ScreenTriangle {
  double u[3];
  double v[3];
  double inv_z[3];
  double inv_area;
  int row_min, row_max, col_min, col_max;
};

}  // namespace

bool PinholeDevice::is_valid() const {
  return fx > 0.0 && fy > 0.0 && cx >= 0.0 && cx < static_cast<double>(width) && cy >= 0.0 &&
         cy < static_cast<double>(height) && width > 0 && height > 0 && pose.is_valid();
}

std::optional<PinholeDevice::Projection> PinholeDevice::project(const Vec3& world) const {
  const Vec3 p = pose.apply(world);
  if (p.z() <= kNearPlane) return std::nullopt;
  return Projection{fx * p.x() / p.z() + cx, fy * p.y() / p.z() + cy, p.z()};
}

Ray PinholeDevice::back_project(double u, double v) const {
  const RigidTransform inv = pose.inverse();
  const Vec3 dir_device((u - cx) / fx, (v - cy) / fy, 1.0);
  return Ray{inv.translation, inv.apply_direction(dir_device).normalized()};
}

PinholeDevice make_device(std::size_t width, std::size_t height, double focal, const RigidTransform& pose) {
  PinholeDevice d;
  d.width = width;
  d.height = height;
  d.fx = d.fy = focal;
  d.cx = 0.5 * static_cast<double>(width - 1);
  d.cy = 0.5 * static_cast<double>(height - 1);
  d.pose = pose;
  return d;
}

RasterResult rasterize(const synth::TriangleMesh& mesh, const PinholeDevice& cam) {
  if (!cam.is_valid()) fail(ErrorCode::InvalidArgument, "rasterize: invalid camera");
  const std::size_t W = cam.width;
  const std::size_t H = cam.height;

  std::vector<Vec3> local(mesh.vertices.size());
  parallel_for(local.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) local[i] = cam.pose.apply(mesh.vertices[i]);
  });

  std::vector<ScreenTriangle> screen;
  std::vector<std::uint32_t> screen_id;
  screen.reserve(mesh.triangles.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    ScreenTriangle s{};
    bool visible = true;
    double umin = std::numeric_limits<double>::infinity(), umax = -umin, vmin = umin, vmax = -umin;
    for (int k = 0; k < 3; ++k) {
      const Vec3& p = local[tri[k]];
      if (p.z() <= kNearPlane) {
        visible = false;
        break;
      }
      s.u[k] = cam.fx * p.x() / p.z() + cam.cx;
      s.v[k] = cam.fy * p.y() / p.z() + cam.cy;
      s.inv_z[k] = 1.0 / p.z();
      umin = std::min(umin, s.u[k]);
      umax = std::max(umax, s.u[k]);
      vmin = std::min(vmin, s.v[k]);
      vmax = std::max(vmax, s.v[k]);
    }
    if (!visible) continue;
    const double area = (s.u[1] - s.u[0]) * (s.v[2] - s.v[0]) - (s.u[2] - s.u[0]) * (s.v[1] - s.v[0]);
    if (std::abs(area) < 1e-14) continue;
    s.inv_area = 1.0 / area;
    const double lo_c = std::ceil(umin), hi_c = std::floor(umax);
    const double lo_r = std::ceil(vmin), hi_r = std::floor(vmax);
    if (hi_c < 0.0 || hi_r < 0.0 || lo_c > static_cast<double>(W - 1) || lo_r > static_cast<double>(H - 1)) continue;
    if (lo_c > hi_c || lo_r > hi_r) continue;
    s.col_min = static_cast<int>(std::max(lo_c, 0.0));
    s.col_max = static_cast<int>(std::min(hi_c, static_cast<double>(W - 1)));
    s.row_min = static_cast<int>(std::max(lo_r, 0.0));
    s.row_max = static_cast<int>(std::min(hi_r, static_cast<double>(H - 1)));
    screen.push_back(s);
    screen_id.push_back(static_cast<std::uint32_t>(t));
  }

  RasterResult out;
  out.depth = DepthMap(W, H);
  out.normal = Tensor({H, W, 3}, 0.0);
  out.hit.width = W;
  out.hit.height = H;
  out.hit.triangle.assign(W * H, -1);
  out.hit.bary.assign(W * H, Eigen::Vector3d::Zero());
  std::vector<double> zbuf(W * H, std::numeric_limits<double>::infinity());

  // Row bands own disjoint output rows; each band scans all triangles in order,
  // so the result does not depend on the number of workers.
  parallel_for(H, [&](std::size_t row_begin, std::size_t row_end) {
    const int rb = static_cast<int>(row_begin);
    const int re = static_cast<int>(row_end) - 1;
    for (std::size_t k = 0; k < screen.size(); ++k) {
      const ScreenTriangle& s = screen[k];
      if (s.row_max < rb || s.row_min > re) continue;
      const int r0 = std::max(s.row_min, rb);
      const int r1 = std::min(s.row_max, re);
      for (int r = r0; r <= r1; ++r) {
        const double py = r;
        for (int c = s.col_min; c <= s.col_max; ++c) {
          const double px = c;
          double w0 = ((s.u[1] - px) * (s.v[2] - py) - (s.u[2] - px) * (s.v[1] - py)) * s.inv_area;
          double w1 = ((s.u[2] - px) * (s.v[0] - py) - (s.u[0] - px) * (s.v[2] - py)) * s.inv_area;
          double w2 = 1.0 - w0 - w1;
          constexpr double kEdgeTol = -1e-10;
          if (w0 < kEdgeTol || w1 < kEdgeTol || w2 < kEdgeTol) continue;
          const double inv_z = w0 * s.inv_z[0] + w1 * s.inv_z[1] + w2 * s.inv_z[2];
          const double z = 1.0 / inv_z;
          const std::size_t idx = static_cast<std::size_t>(r) * W + static_cast<std::size_t>(c);
          if (!(z < zbuf[idx])) continue;
          zbuf[idx] = z;
          out.hit.triangle[idx] = static_cast<std::int32_t>(screen_id[k]);
          out.hit.bary[idx] = Eigen::Vector3d(w0 * s.inv_z[0] * z, w1 * s.inv_z[1] * z, w2 * s.inv_z[2] * z);
        }
      }
    }
  });

  for (std::size_t r = 0; r < H; ++r) {
    for (std::size_t c = 0; c < W; ++c) {
      const std::size_t idx = r * W + c;
      if (out.hit.triangle[idx] < 0) continue;
      out.depth.depth(r, c) = zbuf[idx];
      out.depth.mask(r, c) = 1.0;
      const Vec3 n = interpolate(mesh, mesh.normals, out.hit, r, c).normalized();
      for (int k = 0; k < 3; ++k) out.normal(r, c, k) = n[k];
    }
  }
  return out;
}

Tensor shade_lambertian(const Tensor& normals, const Tensor& mask, const Vec3& light_dir, double albedo) {
  if (normals.rank() != 3 || normals.dim(2) != 3 || mask.rank() != 2 || normals.dim(0) != mask.dim(0) ||
      normals.dim(1) != mask.dim(1)) {
    fail(ErrorCode::ShapeMismatch, "shade_lambertian: normal buffer and mask disagree");
  }
  const Vec3 toward = -light_dir;
  Tensor s({mask.dim(0), mask.dim(1)}, 0.0);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (mask[i] == 0.0) continue;
    const double d = normals[3 * i] * toward.x() + normals[3 * i + 1] * toward.y() + normals[3 * i + 2] * toward.z();
    s[i] = albedo * std::max(0.0, d);
  }
  return s;
}

Tensor grid_pattern(std::size_t width, std::size_t height, std::size_t spacing, std::size_t line_width) {
  if (line_width < 1 || spacing <= line_width) fail(ErrorCode::BadSpacing, "grid pattern needs spacing > line_width >= 1");
  Tensor g({height, width}, 0.0);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      g(y, x) = (x % spacing < line_width || y % spacing < line_width) ? 1.0 : 0.0;
    }
  }
  return g;
}

std::optional<double> sample_bilinear(const Tensor& image, double u, double v) {
  const double W = static_cast<double>(image.dim(1));
  const double H = static_cast<double>(image.dim(0));
  if (!(u >= 0.0 && v >= 0.0 && u <= W - 1.0 && v <= H - 1.0)) return std::nullopt;
  const auto c0 = static_cast<std::size_t>(std::floor(u));
  const auto r0 = static_cast<std::size_t>(std::floor(v));
  const std::size_t c1 = std::min(c0 + 1, image.dim(1) - 1);
  const std::size_t r1 = std::min(r0 + 1, image.dim(0) - 1);
  const double fu = u - static_cast<double>(c0);
  const double fv = v - static_cast<double>(r0);
  return (1 - fv) * ((1 - fu) * image(r0, c0) + fu * image(r0, c1)) + fv * ((1 - fu) * image(r1, c0) + fu * image(r1, c1));
}

Tensor project_pattern(const synth::TriangleMesh& mesh, const RasterResult& view, const PinholeDevice& proj,
                       const Tensor& pattern_img) {
  if (pattern_img.rank() != 2 || pattern_img.dim(0) != proj.height || pattern_img.dim(1) != proj.width) {
    fail(ErrorCode::SizeMismatch, "pattern image does not match projector resolution");
  }
  const std::size_t H = view.hit.height;
  const std::size_t W = view.hit.width;
  const Vec3 proj_center = proj.center();
  Tensor out({H, W}, 0.0);
  parallel_for(H, [&](std::size_t rb, std::size_t re) {
    for (std::size_t r = rb; r < re; ++r) {
      for (std::size_t c = 0; c < W; ++c) {
        if (!view.hit.hit(r, c)) continue;
        const Vec3 x = interpolate(mesh, mesh.vertices, view.hit, r, c);
        const Vec3 n(view.normal(r, c, 0), view.normal(r, c, 1), view.normal(r, c, 2));
        const Vec3 to_proj = (proj_center - x).normalized();
        const double cosine = n.dot(to_proj);
        if (cosine <= 0.0) continue;
        const auto p = proj.project(x);
        if (!p) continue;
        const auto value = sample_bilinear(pattern_img, p->u, p->v);
        if (!value) continue;
        out(r, c) = *value * cosine;
      }
    }
  });
  return out;
}

Tensor project_pattern(const synth::TriangleMesh& mesh, const PinholeDevice& cam, const PinholeDevice& proj,
                       const Tensor& pattern_img) {
  return project_pattern(mesh, rasterize(mesh, cam), proj, pattern_img);
}

RigConfig desk_rig() { return RigConfig{}; }

RigConfig paper_rig() {
  RigConfig rig;
  rig.camera_width = rig.camera_height = 1200;
  rig.camera_focal = 3000.0;  // 0.2 mm/px at 600 mm
  rig.projector_width = rig.projector_height = 1600;
  rig.projector_focal = 3000.0;
  rig.mesh_pitch = 0.2;
  rig.grid_spacing = 60;
  rig.surface_size = 360.0;
  return rig;
}

PinholeDevice rig_camera(const RigConfig& rig) {
  return make_device(rig.camera_width, rig.camera_height, rig.camera_focal, RigidTransform::identity());
}

PinholeDevice rig_projector(const RigConfig& rig, double base_depth, const Vec3& shift) {
  RigidTransform pose = RigidTransform::look_at(rig.projector_position, Vec3(0.0, 0.0, base_depth));
  pose.translation = -pose.rotation * (rig.projector_position + shift);
  return make_device(rig.projector_width, rig.projector_height, rig.projector_focal, pose);
}

RenderOutput render_scene(const synth::SceneSpec& scene, const RigConfig& rig) {
  const auto samples = static_cast<std::size_t>(std::floor(rig.surface_size / rig.mesh_pitch)) + 1;
  const synth::HeightMap h = synth::height_map(scene.params, samples, samples, rig.mesh_pitch);
  const synth::TriangleMesh mesh = synth::height_map_to_mesh(h, scene.pose, rig.mesh_pitch);
  const PinholeDevice cam = rig_camera(rig);
  const PinholeDevice proj = rig_projector(rig, scene.pose.base_depth, scene.projector_shift);

  const RasterResult view = rasterize(mesh, cam);
  RenderOutput out;
  out.depth = view.depth;
  out.shading = shade_lambertian(view.normal, view.depth.mask, scene.light_dir, scene.albedo);

  if (scene.texture.amplitude != 0.0 || scene.shading_noise > 0.0) {
    Rng noise(mix_seed(scene.seed, 0x5ade));
    for (std::size_t r = 0; r < cam.height; ++r) {
      for (std::size_t c = 0; c < cam.width; ++c) {
        if (!view.hit.hit(r, c)) continue;
        const Eigen::Vector2d xy = interpolate(mesh, mesh.surface_xy, view.hit, r, c);
        double s = out.shading(r, c) * scene.texture.factor(xy.x(), xy.y());
        if (scene.shading_noise > 0.0) s += noise.normal(0.0, scene.shading_noise);
        out.shading(r, c) = std::clamp(s, 0.0, 1.0);
      }
    }
  }

  const Tensor grid = grid_pattern(proj.width, proj.height, rig.grid_spacing, rig.grid_line_width);
  out.pattern = project_pattern(mesh, view, proj, grid);
  return out;
}

}  // namespace hifreq::raster
