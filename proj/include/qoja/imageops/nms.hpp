#pragma once

#include <algorithm>
#include <cmath>
#include <tuple>
#include <vector>

#include "qoja/image.hpp"
#include "qoja/proposals.hpp"

namespace qoja {

struct NmsConfig {
  double threshold = 0.1;
  double suppression_radius = 5.0;  // pixels
};

namespace detail {

// Offset of the vertex of a parabola through (-1, a), (0, b), (1, c).
inline double parabola_peak(double a, double b, double c, double* peak_value) {
  const double denom = a - 2.0 * b + c;
  if (denom >= -1e-12) {
    *peak_value = b;
    return 0.0;
  }
  const double off = std::clamp(0.5 * (a - c) / denom, -0.5, 0.5);
  *peak_value = b - 0.25 * (a - c) * off;
  return off;
}

}  // namespace detail

/// Peaks of one heatmap channel, strongest first.
inline std::vector<Proposal> nms_channel(const FloatImage& h, const NmsConfig& cfg = {}) {
  struct Peak {
    double value;
    int y, x;
    Vec2 pos;
    double conf;
  };
  std::vector<Peak> peaks;
  for (int y = 0; y < h.height(); ++y)
    for (int x = 0; x < h.width(); ++x) {
      const double v = h(x, y);
      if (!(v > cfg.threshold)) continue;
      bool is_max = true;
      for (int dy = -1; dy <= 1 && is_max; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
          if ((dx || dy) && h.at_or(x + dx, y + dy, 0.0) > v) {
            is_max = false;
            break;
          }
      if (!is_max) continue;
      // Quadratic fit per axis; in the log domain when possible since a
      // Gaussian is exactly quadratic there.
      const double l = h.at_or(x - 1, y, 0.0), r = h.at_or(x + 1, y, 0.0);
      const double u = h.at_or(x, y - 1, 0.0), d = h.at_or(x, y + 1, 0.0);
      double px, py, vx, vy;
      double ox, oy;
      if (l > 0 && r > 0 && u > 0 && d > 0) {
        const double lv = std::log(v);
        ox = detail::parabola_peak(std::log(l), lv, std::log(r), &px);
        oy = detail::parabola_peak(std::log(u), lv, std::log(d), &py);
        vx = std::exp(px);
        vy = std::exp(py);
      } else {
        ox = detail::parabola_peak(l, v, r, &vx);
        oy = detail::parabola_peak(u, v, d, &vy);
      }
      const double conf = std::min(1.0, v * (vx / v) * (vy / v));
      peaks.push_back({v, y, x, Vec2(x + 0.5 + ox, y + 0.5 + oy), conf});
    }
  std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) {
    return std::tie(b.value, a.y, a.x) < std::tie(a.value, b.y, b.x);
  });
  std::vector<Proposal> kept;
  for (const auto& p : peaks) {
    const bool clear = std::all_of(kept.begin(), kept.end(), [&](const Proposal& k) {
      return (k.position - p.pos).norm() >= cfg.suppression_radius;
    });
    if (clear) kept.push_back({p.pos, std::max(p.conf, 1e-6)});
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const Proposal& a, const Proposal& b) { return a.confidence > b.confidence; });
  return kept;
}

inline ProposalSet nms_extract(const std::vector<FloatImage>& heatmaps, const NmsConfig& cfg = {}) {
  if (!(cfg.threshold > 0.0 && cfg.threshold < 1.0)) throw ArgumentError("nms_extract: threshold must be in (0,1)");
  if (!(cfg.suppression_radius >= 1.0)) throw ArgumentError("nms_extract: suppression radius must be >= 1");
  ProposalSet out;
  out.joints.reserve(heatmaps.size());
  for (const auto& h : heatmaps) out.joints.push_back(nms_channel(h, cfg));
  return out;
}

}  // namespace qoja
