#pragma once

#include <cmath>
#include <limits>

#include "qoja/image.hpp"
#include "qoja/rng.hpp"

namespace qoja::testing {

/// O(W^2 H^2) nearest-background scan; pixels outside the image count as
/// background.
inline FloatImage brute_force_edt(const Silhouette& s) {
  const int W = s.width(), H = s.height();
  FloatImage out(W, H, 0.0);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      if (!s(x, y)) continue;
      double best = std::numeric_limits<double>::infinity();
      for (int v = -1; v <= H; ++v)
        for (int u = -1; u <= W; ++u) {
          if (s.foreground(u, v)) continue;
          best = std::min(best, std::hypot(u - x, v - y));
        }
      out(x, y) = best;
    }
  return out;
}

/// Union of a few random ellipses.
inline Silhouette random_blob(Rng& rng, int size = 64) {
  Silhouette s(size, size, 0);
  const int n = 1 + static_cast<int>(rng.index(4));
  for (int k = 0; k < n; ++k) {
    const double cx = rng.uniform(0.3 * size, 0.7 * size), cy = rng.uniform(0.3 * size, 0.7 * size);
    const double a = rng.uniform(3.0, 0.25 * size), b = rng.uniform(3.0, 0.25 * size);
    const double th = rng.uniform(0.0, 3.14159);
    const double c = std::cos(th), sn = std::sin(th);
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) {
        const double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
        const double u = c * dx + sn * dy, v = -sn * dx + c * dy;
        if (u * u / (a * a) + v * v / (b * b) <= 1.0) s(x, y) = 1;
      }
  }
  return s;
}

/// Fraction of foreground pixels inside some disc (centre, radius).
template <typename Points, typename Radii>
double disc_coverage(const Silhouette& s, const Points& centres, const Radii& radii) {
  std::size_t fg = 0, hit = 0;
  for (int y = 0; y < s.height(); ++y)
    for (int x = 0; x < s.width(); ++x) {
      if (!s(x, y)) continue;
      ++fg;
      const Vec2 p(x + 0.5, y + 0.5);
      for (std::size_t i = 0; i < centres.size(); ++i)
        if ((p - centres[i]).norm() <= radii[i]) {
          ++hit;
          break;
        }
    }
  return fg ? static_cast<double>(hit) / fg : 1.0;
}

}  // namespace qoja::testing
