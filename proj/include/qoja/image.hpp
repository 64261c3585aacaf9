#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "qoja/common.hpp"

namespace qoja {

/// Row-major W x H raster. Pixel (x, y) covers [x, x+1) x [y, y+1); its
/// centre is (x + 0.5, y + 0.5).
template <typename T>
class Image {
 public:
  Image() = default;
  Image(int width, int height, T fill = T{})
      : width_(width), height_(height), data_(static_cast<std::size_t>(width) * height, fill) {
    if (width < 0 || height < 0) throw ArgumentError("image dimensions must be non-negative");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  T& operator()(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  const T& operator()(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }

  /// Value at (x, y) or `outside` when out of bounds.
  T at_or(int x, int y, T outside) const { return contains(x, y) ? (*this)(x, y) : outside; }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  bool operator==(const Image&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

/// Binary mask; 1 is foreground.
class Silhouette : public Image<std::uint8_t> {
 public:
  using Image::Image;
  Silhouette() = default;
  explicit Silhouette(Image<std::uint8_t> img) : Image(std::move(img)) {}

  bool foreground(int x, int y) const { return contains(x, y) && (*this)(x, y) != 0; }

  /// Lookup at a continuous image point; out of bounds is background.
  bool foreground_at(const Vec2& p) const {
    return foreground(static_cast<int>(std::floor(p.x())), static_cast<int>(std::floor(p.y())));
  }

  std::size_t area() const {
    return static_cast<std::size_t>(std::count_if(data().begin(), data().end(), [](auto v) { return v != 0; }));
  }

  /// Mean of foreground pixel centres; image centre when empty.
  Vec2 centroid() const {
    Vec2 sum = Vec2::Zero();
    std::size_t n = 0;
    for (int y = 0; y < height(); ++y)
      for (int x = 0; x < width(); ++x)
        if ((*this)(x, y)) {
          sum += Vec2(x + 0.5, y + 0.5);
          ++n;
        }
    return n ? Vec2(sum / static_cast<double>(n)) : Vec2(0.5 * width(), 0.5 * height());
  }
};

using FloatImage = Image<double>;

}  // namespace qoja
