#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "qoja/common.hpp"
#include "qoja/core/camera.hpp"
#include "qoja/core/model.hpp"
#include "qoja/image.hpp"

namespace qoja {

struct Capsule {
  Vec3 a;
  Vec3 b;
  double radius = 0.0;
};

inline std::vector<Capsule> capsules_from(const ProxyQuadruped& model, const Points3& joints3d,
                                          const Eigen::VectorXd* radii = nullptr) {
  std::vector<Capsule> caps(model.bone_count());
  for (int b = 0; b < model.bone_count(); ++b) {
    caps[b].a = joints3d.col(model.topology.bone_parent[b]);
    caps[b].b = joints3d.col(model.topology.bone_child[b]);
    caps[b].radius = radii ? (*radii)[b] : model.capsule_radii[b];
  }
  return caps;
}

struct RayHit {
  double distance = std::numeric_limits<double>::infinity();  // ray to capsule axis
  double axis_param = 0.0;                                     // s in [0, 1] along a -> b
  double depth = 0.0;                                          // z of the closest axis point
};

/// Closest approach between the ray {t d : t >= 0} from the camera centre and
/// a capsule's axis segment. `dir` must be unit length.
inline RayHit ray_axis_distance(const Vec3& dir, const Capsule& c) {
  const Vec3 v = c.b - c.a;
  const double vv = v.squaredNorm();
  const double pd = c.a.dot(dir);
  const double vd = v.dot(dir);
  const double pv = c.a.dot(v);

  auto eval = [&](double s) {
    s = std::clamp(s, 0.0, 1.0);
    const Vec3 q = c.a + s * v;
    const double t = std::max(0.0, q.dot(dir));
    return std::pair{s, (q - t * dir).squaredNorm()};
  };
  // The squared distance is convex in s and piecewise smooth; its minimum is
  // at a stationary point of one piece, the breakpoint or an endpoint.
  double cand[5] = {0.0, 1.0, 0.0, 0.0, 0.0};
  int n = 2;
  const double denom = vv - vd * vd;
  if (denom > 1e-15) cand[n++] = (vd * pd - pv) / denom;
  if (vv > 1e-15) cand[n++] = -pv / vv;
  if (std::abs(vd) > 1e-15) cand[n++] = -pd / vd;
  RayHit best;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    auto [s, d2] = eval(cand[i]);
    if (d2 < best_d2) {
      best_d2 = d2;
      best.axis_param = s;
    }
  }
  best.distance = std::sqrt(best_d2);
  best.depth = (c.a + best.axis_param * v).z();
  return best;
}

struct PixelBox {
  int x0 = 0, y0 = 0, x1 = -1, y1 = -1;  // inclusive
  bool empty() const { return x1 < x0 || y1 < y0; }
};

/// Conservative pixel bounds of a capsule's projection, padded by `pad`
/// pixels. Nullopt when the capsule is entirely behind the camera.
inline std::optional<PixelBox> capsule_bounds(const CameraModel& cam, const Capsule& c, double pad) {
  const double r = c.radius;
  if (std::max(c.a.z(), c.b.z()) + r <= 1e-9) return std::nullopt;
  PixelBox full{0, 0, cam.width - 1, cam.height - 1};
  double xmin = std::numeric_limits<double>::infinity(), ymin = xmin;
  double xmax = -xmin, ymax = -xmin;
  for (const Vec3* p : {&c.a, &c.b}) {
    for (int corner = 0; corner < 8; ++corner) {
      const Vec3 q = *p + r * Vec3(corner & 1 ? 1 : -1, corner & 2 ? 1 : -1, corner & 4 ? 1 : -1);
      if (q.z() <= 1e-6) return full;
      const Vec2 px = cam.project(q);
      xmin = std::min(xmin, px.x());
      xmax = std::max(xmax, px.x());
      ymin = std::min(ymin, px.y());
      ymax = std::max(ymax, px.y());
    }
  }
  PixelBox box;
  box.x0 = std::max(0, static_cast<int>(std::floor(xmin - pad)));
  box.y0 = std::max(0, static_cast<int>(std::floor(ymin - pad)));
  box.x1 = std::min(cam.width - 1, static_cast<int>(std::ceil(xmax + pad)));
  box.y1 = std::min(cam.height - 1, static_cast<int>(std::ceil(ymax + pad)));
  return box;
}

/// Hard render of capsules: a pixel is foreground iff the ray through its
/// centre meets a capsule. Does not throw on an empty result.
inline Silhouette rasterize_capsules(const CameraModel& cam, const std::vector<Capsule>& caps) {
  Silhouette sil(cam.width, cam.height, 0);
  for (const auto& c : caps) {
    auto box = capsule_bounds(cam, c, 1.0);
    if (!box) continue;
    for (int y = box->y0; y <= box->y1; ++y)
      for (int x = box->x0; x <= box->x1; ++x) {
        if (sil(x, y)) continue;
        const Vec3 d = cam.ray({x + 0.5, y + 0.5});
        if (ray_axis_distance(d, c).distance <= c.radius) sil(x, y) = 1;
      }
  }
  return sil;
}

/// Silhouette of the model posed at `position` (camera frame).
inline Silhouette rasterize_silhouette(const CameraModel& cam, const ProxyQuadruped& model,
                                       const Eigen::VectorXd& theta, const PositionParams& position) {
  const Points3 joints = forward_kinematics(model, theta, position);
  Silhouette sil = rasterize_capsules(cam, capsules_from(model, joints));
  if (sil.area() == 0) throw GeometryError("empty silhouette: model is outside the camera frustum");
  return sil;
}

}  // namespace qoja
