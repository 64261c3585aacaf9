#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "qoja/core/camera.hpp"
#include "qoja/fitter/params.hpp"
#include "qoja/image.hpp"
#include "qoja/synth/rasterize.hpp"

namespace qoja {

/// Approximate image-space signed distance (pixels) from a pixel ray to a
/// capsule surface: negative inside.
inline double capsule_signed_distance(const Vec3& ray, const Capsule& c, double focal) {
  const RayHit h = ray_axis_distance(ray, c);
  return (h.distance - c.radius) * focal / std::max(h.depth, 1e-6);
}

inline double sigmoid(double x) { return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

/// Per-pixel nearest capsule and its signed distance. Pixels farther than
/// `band` pixels from every capsule keep +inf and owner -1.
struct SignedDistanceImage {
  FloatImage distance;
  Image<int> owner;
};

inline SignedDistanceImage capsule_distance_image(const CameraModel& cam, const std::vector<Capsule>& caps,
                                                  double band) {
  SignedDistanceImage out{FloatImage(cam.width, cam.height, std::numeric_limits<double>::infinity()),
                          Image<int>(cam.width, cam.height, -1)};
  for (int b = 0; b < static_cast<int>(caps.size()); ++b) {
    const auto box = capsule_bounds(cam, caps[b], band + 1.0);
    if (!box) continue;
    for (int y = box->y0; y <= box->y1; ++y)
      for (int x = box->x0; x <= box->x1; ++x) {
        const double sd = capsule_signed_distance(cam.ray({x + 0.5, y + 0.5}), caps[b], cam.focal);
        if (sd < out.distance(x, y)) {
          out.distance(x, y) = sd;
          out.owner(x, y) = b;
        }
      }
  }
  return out;
}

inline void require_in_front(const Points3& joints) {
  if (!(joints.row(2).minCoeff() > 1e-6)) throw GeometryError("model is behind the camera");
}

/// Soft occupancy sigmoid(-k * sd) of the nearest capsule.
inline FloatImage soft_render(const CameraModel& cam, const ProxyQuadruped& model, const FitParams& p,
                              double sharpness = 2.0) {
  const ProxyQuadruped m = shaped_model(model, p);
  const Points3 joints = forward_kinematics(m, p.theta, p.position);
  require_in_front(joints);
  const double band = 20.0 / sharpness;
  const auto sdi = capsule_distance_image(cam, capsules_from(m, joints), band);
  FloatImage out(cam.width, cam.height, 0.0);
  for (int y = 0; y < cam.height; ++y)
    for (int x = 0; x < cam.width; ++x)
      if (sdi.owner(x, y) >= 0) out(x, y) = sigmoid(-sharpness * sdi.distance(x, y));
  return out;
}

}  // namespace qoja
