#pragma once

#include <cmath>
#include <string>

#include <Eigen/SVD>

#include "graspcap/core/error.hpp"
#include "graspcap/core/rigid_transform.hpp"

namespace graspcap::align {

/// Least-squares T minimising sum |T(source_i) - target_i|^2 over proper
/// rotations (det +1), translations and, if `with_scale`, a uniform scale.
/// Closed form via the SVD of the cross-covariance (Kabsch / Umeyama).
inline RigidTransform procrustes(const Points& source, const Points& target, bool with_scale = false) {
  if (source.size() != target.size())
    throw LengthMismatch("procrustes: " + std::to_string(source.size()) + " source vs " +
                         std::to_string(target.size()) + " target points");
  if (source.size() < 3) throw DegenerateConfiguration("procrustes needs at least 3 point pairs");

  const double n = static_cast<double>(source.size());
  Vec3 mu_s = Vec3::Zero(), mu_t = Vec3::Zero();
  for (std::size_t i = 0; i < source.size(); ++i) {
    mu_s += source[i];
    mu_t += target[i];
  }
  mu_s /= n;
  mu_t /= n;

  Mat3 cov = Mat3::Zero();
  double var_s = 0.0;
  for (std::size_t i = 0; i < source.size(); ++i) {
    const Vec3 ds = source[i] - mu_s;
    cov += (target[i] - mu_t) * ds.transpose();
    var_s += ds.squaredNorm();
  }
  cov /= n;
  var_s /= n;

  Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 sigma = svd.singularValues();
  if (!(sigma[0] > 0.0) || sigma[1] <= 1e-12 * sigma[0])
    throw DegenerateConfiguration("cross-covariance has rank < 2 (collinear or coincident points)");

  Vec3 d(1.0, 1.0, 1.0);
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) d[2] = -1.0;

  RigidTransform t;
  t.rotation = svd.matrixU() * d.asDiagonal() * svd.matrixV().transpose();
  t.scale = with_scale ? sigma.dot(d) / var_s : 1.0;
  t.translation = mu_t - t.scale * (t.rotation * mu_s);
  return t;
}

}  // namespace graspcap::align
