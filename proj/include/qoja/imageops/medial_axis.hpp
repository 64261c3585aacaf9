#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "qoja/imageops/distance.hpp"

namespace qoja {

struct MatPointSet {
  std::vector<Vec2> points;  // pixel centres
  std::vector<double> radii; // distance-field value at each point
};

struct MedialAxisConfig {
  std::size_t max_points = 64;
};

/// Greedy farthest-point subsampling. Starts from `first`; ties go to the
/// lowest index, so the result is deterministic.
inline std::vector<std::size_t> farthest_point_sample(const std::vector<Vec2>& pts, std::size_t count,
                                                      std::size_t first) {
  std::vector<std::size_t> chosen;
  if (pts.empty() || count == 0) return chosen;
  std::vector<double> d2(pts.size(), std::numeric_limits<double>::infinity());
  std::size_t next = first;
  while (chosen.size() < std::min(count, pts.size())) {
    const std::size_t current = next;
    chosen.push_back(current);
    double best = -1.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      d2[i] = std::min(d2[i], (pts[i] - pts[current]).squaredNorm());
      if (d2[i] > best) {
        best = d2[i];
        next = i;
      }
    }
    if (best <= 0.0) break;
  }
  return chosen;
}

/// Ridge pixels of the distance field: centres of maximal discs, i.e.
/// foreground pixels whose disc is not contained in an 8-neighbour's disc
/// (d(q) - d(p) < |q - p| - 1e-6 for every neighbour q).
inline MatPointSet medial_axis(const Silhouette& sil, const MedialAxisConfig& cfg = {}) {
  if (sil.area() == 0) throw GeometryError("medial_axis: silhouette has no foreground");
  const DistanceField dt = distance_transform(sil);
  std::vector<Vec2> ridge;
  std::vector<double> radius;
  for (int y = 0; y < sil.height(); ++y)
    for (int x = 0; x < sil.width(); ++x) {
      const double d = dt(x, y);
      if (d <= 0.0) continue;
      bool is_max = true;
      for (int dy = -1; dy <= 1 && is_max; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if (!dx && !dy) continue;
          const double step = (dx && dy) ? std::sqrt(2.0) : 1.0;
          if (dt.at_or(x + dx, y + dy, 0.0) - d >= step - 1e-6) {
            is_max = false;
            break;
          }
        }
      if (is_max) {
        ridge.emplace_back(x + 0.5, y + 0.5);
        radius.push_back(d);
      }
    }
  MatPointSet out;
  if (ridge.size() <= cfg.max_points) {
    out.points = std::move(ridge);
    out.radii = std::move(radius);
    return out;
  }
  const auto deepest = static_cast<std::size_t>(std::max_element(radius.begin(), radius.end()) - radius.begin());
  for (std::size_t i : farthest_point_sample(ridge, cfg.max_points, deepest)) {
    out.points.push_back(ridge[i]);
    out.radii.push_back(radius[i]);
  }
  return out;
}

}  // namespace qoja
