#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "qoja/image.hpp"

namespace qoja {

using DistanceField = FloatImage;

namespace detail {

// Lower envelope of parabolas (Felzenszwalb & Huttenlocher), squared
// distances along one line. `f` holds 0 at sources and +inf elsewhere on the
// first pass, partial squared distances on the second.
inline void edt_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
                   std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  constexpr double inf = std::numeric_limits<double>::infinity();
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == inf) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -inf;
      z[1] = inf;
      continue;
    }
    auto meet = [&](int r) { return ((f[q] + double(q) * q) - (f[r] + double(r) * r)) / (2.0 * (q - r)); };
    double s = meet(v[k]);
    while (s <= z[k]) s = meet(v[--k]);  // z[0] = -inf stops the scan
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = inf;
  }
  if (k < 0) {
    std::fill(d.begin(), d.end(), inf);
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[j + 1] < q) ++j;
    d[q] = double(q - v[j]) * (q - v[j]) + f[v[j]];
  }
}

/// Exact squared Euclidean distance from every pixel centre to the nearest
/// source pixel centre.
inline FloatImage squared_distance_to(const Image<std::uint8_t>& is_source) {
  const int W = is_source.width(), H = is_source.height();
  constexpr double inf = std::numeric_limits<double>::infinity();
  FloatImage out(W, H, inf);
  const int n = std::max(W, H);
  std::vector<double> f(n), d(n), z(n + 1);
  std::vector<int> v(n);
  for (int x = 0; x < W; ++x) {
    f.resize(H);
    d.resize(H);
    for (int y = 0; y < H; ++y) f[y] = is_source(x, y) ? 0.0 : inf;
    edt_1d(f, d, v, z);
    for (int y = 0; y < H; ++y) out(x, y) = d[y];
  }
  for (int y = 0; y < H; ++y) {
    f.resize(W);
    d.resize(W);
    for (int x = 0; x < W; ++x) f[x] = out(x, y);
    edt_1d(f, d, v, z);
    for (int x = 0; x < W; ++x) out(x, y) = d[x];
  }
  return out;
}

}  // namespace detail

/// Euclidean distance from each pixel to the nearest background pixel.
/// Everything outside the image counts as background.
inline DistanceField distance_transform(const Silhouette& sil) {
  const int W = sil.width(), H = sil.height();
  Image<std::uint8_t> background(W + 2, H + 2, 1);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) background(x + 1, y + 1) = sil(x, y) ? 0 : 1;
  const FloatImage sq = detail::squared_distance_to(background);
  DistanceField out(W, H, 0.0);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) out(x, y) = std::sqrt(sq(x + 1, y + 1));
  return out;
}

/// All pixels within Euclidean distance `radius` of the original foreground.
inline Silhouette dilate(const Silhouette& sil, double radius) {
  if (radius < 0.0) throw ArgumentError("dilate: radius must be non-negative");
  if (sil.area() == 0) return sil;
  const FloatImage sq = detail::squared_distance_to(sil);
  Silhouette out(sil.width(), sil.height(), 0);
  const double r2 = radius * radius + 1e-9;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = sq.data()[i] <= r2 ? 1 : 0;
  return out;
}

}  // namespace qoja
