#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "graspcap/core/error.hpp"
#include "graspcap/core/rigid_transform.hpp"

namespace graspcap::rgbd {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Pinhole camera model. Camera frame: +x right, +y down, +z forward.
struct Intrinsics {
  double fx = 0, fy = 0, cx = 0, cy = 0;
  std::size_t width = 0, height = 0;

  void validate() const {
    if (!(fx > 0 && fy > 0)) throw PreconditionViolation("focal lengths must be positive");
    if (width == 0 || height == 0) throw PreconditionViolation("image size must be positive");
    if (!(cx >= 0 && cx < static_cast<double>(width) && cy >= 0 && cy < static_cast<double>(height)))
      throw PreconditionViolation("principal point outside the image");
  }

  /// Pixel coordinates of a camera-frame point.
  std::array<double, 2> project(const Vec3& p) const {
    return {fx * p.x() / p.z() + cx, fy * p.y() / p.z() + cy};
  }
};

/// Depth in millimetres, 0 meaning "no reading". Both images row-major.
struct RGBDFrame {
  Intrinsics intrinsics;
  std::size_t color_width = 0, color_height = 0;
  std::vector<Rgb> color;
  std::size_t depth_width = 0, depth_height = 0;
  std::vector<std::uint16_t> depth;
  double timestamp_s = 0.0;
};

/// Colored points in metres, camera frame.
struct PointCloud {
  Points points;
  std::vector<Rgb> colors;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }

  void push_back(const Vec3& p, Rgb c) {
    points.push_back(p);
    colors.push_back(c);
  }

  friend bool operator==(const PointCloud& a, const PointCloud& b) {
    return a.points == b.points && a.colors == b.colors;
  }
};

struct Box3 {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  bool contains(const Vec3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }

  static Box3 bounding(const Points& pts) {
    Box3 b{Vec3::Constant(std::numeric_limits<double>::infinity()),
           Vec3::Constant(-std::numeric_limits<double>::infinity())};
    for (const auto& p : pts) {
      b.min = b.min.cwiseMin(p);
      b.max = b.max.cwiseMax(p);
    }
    return b;
  }

  Box3 dilated(double margin) const { return {min.array() - margin, max.array() + margin}; }
};

/// Back-projects every pixel with a depth reading; zero-depth pixels are skipped.
inline PointCloud to_point_cloud(const RGBDFrame& frame) {
  const Intrinsics& k = frame.intrinsics;
  k.validate();
  if (frame.depth_width != frame.color_width || frame.depth_height != frame.color_height)
    throw DimensionMismatch("depth " + std::to_string(frame.depth_width) + "x" +
                            std::to_string(frame.depth_height) + " vs color " +
                            std::to_string(frame.color_width) + "x" +
                            std::to_string(frame.color_height));
  if (frame.depth_width != k.width || frame.depth_height != k.height)
    throw DimensionMismatch("image size differs from intrinsics");
  if (frame.depth.size() != k.width * k.height || frame.color.size() != k.width * k.height)
    throw DimensionMismatch("pixel buffer size differs from image size");

  PointCloud cloud;
  for (std::size_t v = 0; v < k.height; ++v) {
    for (std::size_t u = 0; u < k.width; ++u) {
      const std::size_t idx = v * k.width + u;
      const std::uint16_t d = frame.depth[idx];
      if (d == 0) continue;
      const double z = d / 1000.0;
      cloud.push_back({(static_cast<double>(u) - k.cx) * z / k.fx,
                       (static_cast<double>(v) - k.cy) * z / k.fy, z},
                      frame.color[idx]);
    }
  }
  return cloud;
}

/// Points inside the closed box, in input order.
inline PointCloud crop_cloud(const PointCloud& cloud, const Box3& box) {
  require((box.min.array() <= box.max.array()).all(), "crop box min must not exceed max");
  PointCloud out;
  for (std::size_t i = 0; i < cloud.size(); ++i)
    if (box.contains(cloud.points[i])) out.push_back(cloud.points[i], cloud.colors[i]);
  return out;
}

inline PointCloud transform_cloud(const PointCloud& cloud, const RigidTransform& t) {
  return {t.apply(cloud.points), cloud.colors};
}

}  // namespace graspcap::rgbd
