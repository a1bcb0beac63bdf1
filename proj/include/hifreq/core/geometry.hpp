#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace hifreq {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// x -> R x + t, millimeters. Right-handed frames; devices look down +z.
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static RigidTransform identity() { return {}; }

  /// Rotation Rz(roll) * Ry(yaw) * Rx(pitch), all in radians.
  static RigidTransform from_euler(double pitch, double yaw, double roll, const Vec3& translation = Vec3::Zero());

  /// Device pose that sits at `eye` and looks at `target`, with image-down roughly along `down`.
  static RigidTransform look_at(const Vec3& eye, const Vec3& target, const Vec3& down = Vec3(0, 1, 0));

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  Vec3 apply_direction(const Vec3& d) const { return rotation * d; }

  RigidTransform inverse() const;

  /// (*this) after `first`: x -> this(first(x)).
  RigidTransform compose(const RigidTransform& first) const;

  bool is_valid(double tol = 1e-9) const;
};

inline Vec3 transform_point(const RigidTransform& t, const Vec3& p) { return t.apply(p); }

/// Ray through `origin` along unit `direction`.
struct Ray {
  Vec3 origin = Vec3::Zero();
  Vec3 direction = Vec3::UnitZ();

  Vec3 at(double s) const { return origin + s * direction; }
};

}  // namespace hifreq
