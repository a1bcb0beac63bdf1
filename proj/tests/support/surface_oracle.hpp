#pragma once

#include <cmath>
#include <optional>

#include "hifreq/core/geometry.hpp"
#include "hifreq/raster/raster.hpp"
#include "hifreq/synth/synth.hpp"

namespace hifreq::testing {

// Term-by-term scalar evaluation of the harmonic height and its gradient.
inline double scalar_height(const synth::SinusoidParams& p, double x, double y) {
  double h = 0.0;
  for (const synth::Sinusoid& t : p.terms) {
    const double xp = x * std::cos(t.theta) + y * std::sin(t.theta);
    h += t.alpha * std::cos(2.0 * M_PI * xp * t.lambda + t.psi);
  }
  return h;
}

inline Eigen::Vector2d scalar_gradient(const synth::SinusoidParams& p, double x, double y) {
  Eigen::Vector2d g(0.0, 0.0);
  for (const synth::Sinusoid& t : p.terms) {
    const double xp = x * std::cos(t.theta) + y * std::sin(t.theta);
    const double d = -t.alpha * 2.0 * M_PI * t.lambda * std::sin(2.0 * M_PI * xp * t.lambda + t.psi);
    g += d * Eigen::Vector2d(std::cos(t.theta), std::sin(t.theta));
  }
  return g;
}

struct SurfaceHit {
  Vec3 world;
  Vec3 normal;       // world frame, facing the camera side of an unposed map
  Eigen::Vector2d xy;  // surface coordinates
};

// First crossing of a world ray with the posed height field. Marches through
// the height slab in steps of |g| / L, where L bounds the rate of change of the
// height gap g along the ray, so no crossing wider than `min_step` mm is
// skipped; the bracket is then refined by bisection.
inline std::optional<SurfaceHit> intersect_surface(const synth::SinusoidParams& p, const synth::ScenePose& pose,
                                                   double half_size, const Ray& ray, double min_step = 1e-4) {
  const RigidTransform to_world = pose.transform();
  const RigidTransform to_local = to_world.inverse();
  const Vec3 o = to_local.apply(ray.origin);
  const Vec3 d = to_local.apply_direction(ray.direction).normalized();
  double bound = 0.0;
  double slope = 0.0;
  for (const synth::Sinusoid& t : p.terms) {
    bound += std::abs(t.alpha);
    slope += 2.0 * M_PI * std::abs(t.alpha) * t.lambda;
  }
  if (std::abs(d.z()) < 1e-12) return std::nullopt;
  double s0 = (-bound - 1e-6 - o.z()) / d.z();
  double s1 = (bound + 1e-6 - o.z()) / d.z();
  if (s0 > s1) std::swap(s0, s1);
  s0 = std::max(s0, 0.0);
  // Height below the plane point: g < 0 on the camera side of the surface.
  auto g = [&](double s) {
    const Vec3 q = o + s * d;
    return (q.z() - scalar_height(p, q.x(), q.y())) * (d.z() > 0 ? 1.0 : -1.0);
  };
  const double rate = std::abs(d.z()) + slope * std::hypot(d.x(), d.y());
  double a = s0;
  double ga = g(a);
  for (double b = s0 + std::max(std::abs(ga) / rate, min_step);; b = a + std::max(std::abs(ga) / rate, min_step)) {
    const bool last = b >= s1;
    if (last) b = s1;
    const double gb = g(b);
    if (ga <= 0.0 && gb >= 0.0 && !(ga == 0.0 && gb == 0.0)) {
      double lo = a, hi = b;
      for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) < 0.0 ? lo : hi) = mid;
      }
      const Vec3 q = o + 0.5 * (lo + hi) * d;
      if (std::abs(q.x()) > half_size || std::abs(q.y()) > half_size) return std::nullopt;
      const Eigen::Vector2d grad = scalar_gradient(p, q.x(), q.y());
      const Vec3 n_local = Vec3(grad.x(), grad.y(), -1.0).normalized();
      return SurfaceHit{to_world.apply(q), to_world.apply_direction(n_local), Eigen::Vector2d(q.x(), q.y())};
    }
    if (last) return std::nullopt;
    a = b;
    ga = gb;
  }
}

}  // namespace hifreq::testing
