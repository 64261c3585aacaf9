#pragma once

#include <string>

#include "qoja/common.hpp"
#include "qoja/core/model.hpp"

namespace qoja {

/// Pinhole intrinsics. Camera frame: x right, y down, z forward.
struct CameraModel {
  double focal = 500.0;
  double cx = 128.0;
  double cy = 128.0;
  int width = 256;
  int height = 256;

  void validate() const {
    if (!(focal > 0.0)) throw ValidationError("camera focal length must be positive");
    if (width <= 0 || height <= 0) throw ValidationError("camera image size must be positive");
    if (cx < 0.0 || cx > width || cy < 0.0 || cy > height)
      throw ValidationError("camera principal point lies outside the image");
  }

  Vec2 project(const Vec3& p) const { return {focal * p.x() / p.z() + cx, focal * p.y() / p.z() + cy}; }

  /// Point on the pixel's ray at the given depth.
  Vec3 back_project(const Vec2& px, double depth) const {
    return {(px.x() - cx) * depth / focal, (px.y() - cy) * depth / focal, depth};
  }

  /// Unit ray direction through an image point.
  Vec3 ray(const Vec2& px) const { return Vec3((px.x() - cx) / focal, (px.y() - cy) / focal, 1.0).normalized(); }

  bool in_image(const Vec2& px) const {
    return px.x() >= 0.0 && px.y() >= 0.0 && px.x() < width && px.y() < height;
  }
};

/// Projects camera-frame points. Throws if any point is not in front of the
/// camera, naming the offending joint when names are supplied.
inline Points2 project_joints(const CameraModel& camera, const Points3& joints3d,
                              const std::vector<std::string>* names = nullptr) {
  Points2 out(2, joints3d.cols());
  for (Eigen::Index j = 0; j < joints3d.cols(); ++j) {
    if (!(joints3d(2, j) > 0.0)) {
      std::string who = names && j < static_cast<Eigen::Index>(names->size()) ? (*names)[j]
                                                                             : "#" + std::to_string(j);
      throw GeometryError("joint " + who + " is behind the camera (depth " + std::to_string(joints3d(2, j)) +
                          ")");
    }
    out.col(j) = camera.project(joints3d.col(j));
  }
  return out;
}

/// Rigid transform taking world points into the camera frame, built from a
/// camera centre, a look-at target and an approximate up vector.
inline PositionParams look_at(const Vec3& eye, const Vec3& target, const Vec3& up) {
  const Vec3 z = (target - eye).normalized();
  // Image y points down, so the camera's -y should align with world up.
  Vec3 x = z.cross(up);
  if (x.norm() < 1e-9) x = z.cross(Vec3::UnitX());
  if (x.norm() < 1e-9) x = z.cross(Vec3::UnitZ());
  x.normalize();
  const Vec3 y = z.cross(x);
  Mat3 r;
  r.row(0) = x.transpose();
  r.row(1) = y.transpose();
  r.row(2) = z.transpose();
  PositionParams t;
  t.rotation = Quat(r).normalized();
  t.translation = -(r * eye);
  return t;
}

}  // namespace qoja
