#pragma once

#include <png.h>

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "qoja/image.hpp"

namespace qoja {

/// 8-bit RGB raster for overlays.
struct RgbImage {
  int width = 0, height = 0;
  std::vector<std::uint8_t> data;  // r, g, b per pixel, row-major

  RgbImage() = default;
  RgbImage(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, 0) {}
  void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    if (x < 0 || y < 0 || x >= width || y >= height) return;
    const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
    data[i] = r;
    data[i + 1] = g;
    data[i + 2] = b;
  }
};

// ---------------------------------------------------------------- PNM

namespace detail {

inline std::string pnm_token(std::istream& in) {
  std::string tok;
  char c;
  while (in.get(c)) {
    if (c == '#') {
      std::string skip;
      std::getline(in, skip);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(c);
  }
  return tok;
}

}  // namespace detail

/// Reads P5 (8 or 16 bit) or P4 as a grey image scaled to [0, 255].
inline Image<std::uint8_t> read_pnm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  const std::string magic = detail::pnm_token(in);
  if (magic != "P5" && magic != "P4") throw IoError(path + ": not a binary PGM/PBM file");
  int w = 0, h = 0, maxval = 1;
  try {
    w = std::stoi(detail::pnm_token(in));
    h = std::stoi(detail::pnm_token(in));
    if (magic == "P5") maxval = std::stoi(detail::pnm_token(in));
  } catch (const std::exception&) {
    throw IoError(path + ": malformed header");
  }
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535) throw IoError(path + ": malformed header");
  Image<std::uint8_t> img(w, h, 0);
  if (magic == "P4") {
    const int row_bytes = (w + 7) / 8;
    std::vector<unsigned char> row(row_bytes);
    for (int y = 0; y < h; ++y) {
      if (!in.read(reinterpret_cast<char*>(row.data()), row_bytes)) throw IoError(path + ": truncated data");
      for (int x = 0; x < w; ++x) img(x, y) = (row[x / 8] >> (7 - x % 8)) & 1 ? 255 : 0;  // set bits are foreground
    }
    return img;
  }
  const int bytes = maxval > 255 ? 2 : 1;
  std::vector<unsigned char> buf(static_cast<std::size_t>(w) * h * bytes);
  if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size())))
    throw IoError(path + ": truncated data");
  for (std::size_t i = 0; i < img.size(); ++i) {
    const int v = bytes == 2 ? (buf[2 * i] << 8) | buf[2 * i + 1] : buf[i];
    img.data()[i] = static_cast<std::uint8_t>((v * 255 + maxval / 2) / maxval);
  }
  return img;
}

inline void write_pgm(const std::string& path, const Image<std::uint8_t>& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "P5\n" << img.width() << " " << img.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data().data()), static_cast<std::streamsize>(img.size()));
  if (!out) throw IoError("write failed: " + path);
}

inline void write_pgm16(const std::string& path, const Image<std::uint16_t>& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "P5\n" << img.width() << " " << img.height() << "\n65535\n";
  std::vector<unsigned char> buf(img.size() * 2);
  for (std::size_t i = 0; i < img.size(); ++i) {
    buf[2 * i] = static_cast<unsigned char>(img.data()[i] >> 8);
    buf[2 * i + 1] = static_cast<unsigned char>(img.data()[i] & 0xff);
  }
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("write failed: " + path);
}

// ---------------------------------------------------------------- PNG

namespace detail {

inline void png_write(const std::string& path, int w, int h, png_uint_32 format, const void* buffer) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(w);
  image.height = static_cast<png_uint_32>(h);
  image.format = format;
  if (!png_image_write_to_file(&image, path.c_str(), 0, buffer, 0, nullptr))
    throw IoError("png write failed: " + path + ": " + image.message);
}

}  // namespace detail

inline void write_png(const std::string& path, const Image<std::uint8_t>& img) {
  detail::png_write(path, img.width(), img.height(), PNG_FORMAT_GRAY, img.data().data());
}

/// 16-bit grey; values are stored as given.
inline void write_png16(const std::string& path, const Image<std::uint16_t>& img) {
  detail::png_write(path, img.width(), img.height(), PNG_FORMAT_LINEAR_Y, img.data().data());
}

inline void write_png(const std::string& path, const RgbImage& img) {
  detail::png_write(path, img.width, img.height, PNG_FORMAT_RGB, img.data.data());
}

/// Reads any PNG as 8-bit grey (colour is converted, alpha dropped).
inline Image<std::uint8_t> read_png(const std::string& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str()))
    throw IoError(path + ": cannot read PNG: " + image.message);
  image.format = PNG_FORMAT_GRAY;
  Image<std::uint8_t> out(static_cast<int>(image.width), static_cast<int>(image.height), 0);
  if (!png_image_finish_read(&image, nullptr, out.data().data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw IoError(path + ": corrupt PNG data: " + msg);
  }
  return out;
}

/// Foreground is grey value >= 128.
inline Silhouette to_silhouette(const Image<std::uint8_t>& grey) {
  Silhouette s(grey.width(), grey.height(), 0);
  for (std::size_t i = 0; i < grey.size(); ++i) s.data()[i] = grey.data()[i] >= 128 ? 1 : 0;
  return s;
}

inline Image<std::uint8_t> to_grey(const Silhouette& s) {
  Image<std::uint8_t> g(s.width(), s.height(), 0);
  for (std::size_t i = 0; i < s.size(); ++i) g.data()[i] = s.data()[i] ? 255 : 0;
  return g;
}

inline bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

/// Silhouette from a .png, .pgm or .pbm file.
inline Silhouette read_silhouette(const std::string& path) {
  return to_silhouette(ends_with(path, ".png") ? read_png(path) : read_pnm(path));
}

inline void write_silhouette(const std::string& path, const Silhouette& s) {
  if (ends_with(path, ".png"))
    write_png(path, to_grey(s));
  else
    write_pgm(path, to_grey(s));
}

}  // namespace qoja
