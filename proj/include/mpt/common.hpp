#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>

namespace mpt {

inline constexpr const char* kVersion = "0.1.0";

using Vector2 = Eigen::Vector2d;
using Vector3 = Eigen::Vector3d;
using Matrix3 = Eigen::Matrix3d;
using BoolGrid = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Axis-aligned box in pixel coordinates, center-anchored.
struct BBox {
  double cx = 0.0;
  double cy = 0.0;
  double width = 0.0;
  double height = 0.0;

  double diagonal() const { return std::hypot(width, height); }
  double area() const { return width * height; }
};

}  // namespace mpt
