#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "graspcap/core/error.hpp"

namespace graspcap {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Points = std::vector<Vec3>;

/// x -> scale * rotation * x + translation
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  double scale = 1.0;

  static RigidTransform identity() { return {}; }

  static RigidTransform from_translation(const Vec3& t) { return {Mat3::Identity(), t, 1.0}; }

  static RigidTransform from_axis_angle(const Vec3& axis, double angle, const Vec3& t = Vec3::Zero()) {
    return {Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix(), t, 1.0};
  }

  /// Roll-pitch-yaw about fixed x, y, z axes (R = Rz * Ry * Rx).
  static RigidTransform from_xyz_rpy(const Vec3& xyz, const Vec3& rpy) {
    const Mat3 r = (Eigen::AngleAxisd(rpy.z(), Vec3::UnitZ()) *
                    Eigen::AngleAxisd(rpy.y(), Vec3::UnitY()) *
                    Eigen::AngleAxisd(rpy.x(), Vec3::UnitX()))
                       .toRotationMatrix();
    return {r, xyz, 1.0};
  }

  Vec3 operator()(const Vec3& p) const { return scale * (rotation * p) + translation; }

  /// (this * other)(x) == this(other(x))
  RigidTransform operator*(const RigidTransform& o) const {
    return {rotation * o.rotation, scale * (rotation * o.translation) + translation, scale * o.scale};
  }

  RigidTransform inverse() const {
    const Mat3 rt = rotation.transpose();
    return {rt, -(rt * translation) / scale, 1.0 / scale};
  }

  Points apply(const Points& pts) const {
    Points out;
    out.reserve(pts.size());
    for (const auto& p : pts) out.push_back((*this)(p));
    return out;
  }

  bool is_valid(double tol = 1e-9) const {
    return (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol &&
           std::abs(rotation.determinant() - 1.0) <= tol && scale > 0.0 && translation.allFinite();
  }

  /// 12 numbers: row-major rotation then translation.
  std::array<double, 12> to_row_major() const {
    std::array<double, 12> m{};
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) m[3 * r + c] = rotation(r, c);
    for (int i = 0; i < 3; ++i) m[9 + i] = translation[i];
    return m;
  }

  static RigidTransform from_row_major(const std::array<double, 12>& m, double scale = 1.0) {
    RigidTransform t;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) t.rotation(r, c) = m[3 * r + c];
    for (int i = 0; i < 3; ++i) t.translation[i] = m[9 + i];
    t.scale = scale;
    return t;
  }

  friend bool operator==(const RigidTransform& a, const RigidTransform& b) {
    return a.rotation == b.rotation && a.translation == b.translation && a.scale == b.scale;
  }
};

/// Geodesic angle between two rotations, radians.
inline double rotation_angle_between(const Mat3& a, const Mat3& b) {
  const double c = ((a.transpose() * b).trace() - 1.0) / 2.0;
  return std::acos(std::clamp(c, -1.0, 1.0));
}

inline double rms_distance(const Points& a, const Points& b) {
  require(a.size() == b.size(), "rms_distance needs equal lengths");
  if (a.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]).squaredNorm();
  return std::sqrt(s / static_cast<double>(a.size()));
}

}  // namespace graspcap
