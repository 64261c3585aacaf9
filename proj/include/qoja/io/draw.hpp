#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "qoja/image.hpp"
#include "qoja/imageops/distance.hpp"
#include "qoja/io/image_io.hpp"

namespace qoja {

using Rgb = std::array<std::uint8_t, 3>;

inline constexpr Rgb kRed{230, 40, 40};
inline constexpr Rgb kGreen{40, 200, 60};
inline constexpr Rgb kBlue{60, 110, 240};
inline constexpr Rgb kYellow{240, 210, 40};

inline void put(RgbImage& img, int x, int y, const Rgb& c) { img.set(x, y, c[0], c[1], c[2]); }

/// Pixels visited by a segment, one per unit step along its longer axis.
inline std::vector<std::pair<int, int>> segment_pixels(const Vec2& a, const Vec2& b) {
  const Vec2 d = b - a;
  const int n = std::max(1, static_cast<int>(std::ceil(std::max(std::abs(d.x()), std::abs(d.y())))));
  std::vector<std::pair<int, int>> px;
  for (int i = 0; i <= n; ++i) {
    const Vec2 p = a + d * (static_cast<double>(i) / n);
    std::pair<int, int> q{static_cast<int>(std::floor(p.x())), static_cast<int>(std::floor(p.y()))};
    if (px.empty() || px.back() != q) px.push_back(q);
  }
  return px;
}

inline void draw_line(RgbImage& img, const Vec2& a, const Vec2& b, const Rgb& c) {
  for (auto [x, y] : segment_pixels(a, b)) put(img, x, y, c);
}

inline void draw_disc(RgbImage& img, const Vec2& centre, double r, const Rgb& c) {
  const int x0 = static_cast<int>(std::floor(centre.x() - r)), x1 = static_cast<int>(std::ceil(centre.x() + r));
  const int y0 = static_cast<int>(std::floor(centre.y() - r)), y1 = static_cast<int>(std::ceil(centre.y() + r));
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x)
      if ((Vec2(x + 0.5, y + 0.5) - centre).squaredNorm() <= r * r) put(img, x, y, c);
}

/// Silhouette as dark grey on black.
inline RgbImage silhouette_canvas(const Silhouette& sil) {
  RgbImage img(sil.width(), sil.height());
  for (int y = 0; y < sil.height(); ++y)
    for (int x = 0; x < sil.width(); ++x)
      if (sil(x, y)) img.set(x, y, 90, 90, 90);
  return img;
}

/// Foreground pixels of `mask` with a background 4-neighbour.
inline std::vector<std::pair<int, int>> boundary_pixels(const Silhouette& mask) {
  std::vector<std::pair<int, int>> out;
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      if (mask(x, y) && (!mask.foreground(x - 1, y) || !mask.foreground(x + 1, y) || !mask.foreground(x, y - 1) ||
                         !mask.foreground(x, y + 1)))
        out.emplace_back(x, y);
  return out;
}

/// Tiles of equal size laid out `cols` per row; values in [0, 1] map to
/// [0, 255].
inline Image<std::uint8_t> mosaic(const std::vector<FloatImage>& tiles, int cols) {
  if (tiles.empty()) throw ArgumentError("mosaic: no tiles");
  cols = std::max(1, std::min(cols, static_cast<int>(tiles.size())));
  const int W = tiles.front().width(), H = tiles.front().height();
  const int rows = (static_cast<int>(tiles.size()) + cols - 1) / cols;
  Image<std::uint8_t> out(W * cols, H * rows, 0);
  for (std::size_t k = 0; k < tiles.size(); ++k) {
    const int ox = static_cast<int>(k % cols) * W, oy = static_cast<int>(k / cols) * H;
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x)
        out(ox + x, oy + y) = static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(tiles[k](x, y), 0.0, 1.0)));
  }
  return out;
}

/// Distance field in 1/256 pixel units, saturating at 65535.
inline Image<std::uint16_t> distance_image16(const DistanceField& d) {
  Image<std::uint16_t> out(d.width(), d.height(), 0);
  for (std::size_t i = 0; i < d.size(); ++i)
    out.data()[i] = static_cast<std::uint16_t>(std::min(65535.0, std::round(256.0 * d.data()[i])));
  return out;
}

}  // namespace qoja
