#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace qoja {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;
using Points2 = Eigen::Matrix<double, 2, Eigen::Dynamic>;
using Points3 = Eigen::Matrix<double, 3, Eigen::Dynamic>;

inline constexpr double kPi = std::numbers::pi;

// Every error carries a short machine-readable code; the CLI prints it as
// "qoja: error: <code>: <message>".
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

struct ValidationError : Error {
  explicit ValidationError(const std::string& what) : Error("validation", what) {}
};

struct ArgumentError : Error {
  explicit ArgumentError(const std::string& what) : Error("argument", what) {}
};

struct GeometryError : Error {
  explicit GeometryError(const std::string& what) : Error("geometry", what) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error("io", what) {}
};

struct NumericError : Error {
  explicit NumericError(const std::string& what) : Error("numeric", what) {}
};

inline double sqr(double x) { return x * x; }

}  // namespace qoja
