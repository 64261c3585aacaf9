#pragma once

#include <cmath>

#include "qoja/common.hpp"

namespace qoja {

/// R = Rx(a) * Ry(b) * Rz(c).
inline Mat3 euler_xyz(double a, double b, double c) {
  return (Eigen::AngleAxisd(a, Vec3::UnitX()) * Eigen::AngleAxisd(b, Vec3::UnitY()) *
          Eigen::AngleAxisd(c, Vec3::UnitZ()))
      .toRotationMatrix();
}

inline Quat quat_from_rotvec(const Vec3& w) {
  const double angle = w.norm();
  if (angle < 1e-12) {
    // First-order expansion keeps this smooth through zero.
    Quat q(1.0, 0.5 * w.x(), 0.5 * w.y(), 0.5 * w.z());
    return q.normalized();
  }
  return Quat(Eigen::AngleAxisd(angle, w / angle));
}

inline Vec3 rotvec_from_quat(Quat q) {
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  const Vec3 v = q.vec();
  const double s = v.norm();
  if (s < 1e-12) return 2.0 * v;
  const double angle = 2.0 * std::atan2(s, q.w());
  return v * (angle / s);
}

/// Geodesic angle between two rotations, in [0, pi].
inline double geodesic_angle(const Quat& a, const Quat& b) {
  return rotvec_from_quat(a.conjugate() * b).norm();
}

}  // namespace qoja
