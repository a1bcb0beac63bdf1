#include "hifreq/core/geometry.hpp"

#include <cmath>

namespace hifreq {

RigidTransform RigidTransform::from_euler(double pitch, double yaw, double roll, const Vec3& translation) {
  const Eigen::AngleAxisd rx(pitch, Vec3::UnitX());
  const Eigen::AngleAxisd ry(yaw, Vec3::UnitY());
  const Eigen::AngleAxisd rz(roll, Vec3::UnitZ());
  RigidTransform t;
  t.rotation = (rz * ry * rx).toRotationMatrix();
  t.translation = translation;
  return t;
}

RigidTransform RigidTransform::look_at(const Vec3& eye, const Vec3& target, const Vec3& down) {
  const Vec3 z = (target - eye).normalized();
  Vec3 y = down - down.dot(z) * z;
  y.normalize();
  const Vec3 x = y.cross(z);
  // Rows are the device axes expressed in world coordinates.
  RigidTransform t;
  t.rotation.row(0) = x;
  t.rotation.row(1) = y;
  t.rotation.row(2) = z;
  t.translation = -t.rotation * eye;
  return t;
}

RigidTransform RigidTransform::inverse() const {
  RigidTransform inv;
  inv.rotation = rotation.transpose();
  inv.translation = -inv.rotation * translation;
  return inv;
}

RigidTransform RigidTransform::compose(const RigidTransform& first) const {
  RigidTransform out;
  out.rotation = rotation * first.rotation;
  out.translation = rotation * first.translation + translation;
  return out;
}

bool RigidTransform::is_valid(double tol) const {
  if (!rotation.allFinite() || !translation.allFinite()) return false;
  const double ortho = (rotation * rotation.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff();
  return ortho <= tol && std::abs(rotation.determinant() - 1.0) <= tol;
}

}  // namespace hifreq
