#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "graspcap/core/error.hpp"
#include "graspcap/grasps/grasp.hpp"
#include "graspcap/kinematics/chain.hpp"
#include "graspcap/kinematics/object_model.hpp"

namespace graspcap::grasps {

/// Grasp distance: joint_weight * mean_j(|dq_j| / range_j)
///               + palm_weight * |d palm| / bbox_diagonal,
/// with palm positions taken in the object frame.
struct GraspMetric {
  double joint_weight = 0.5;
  double palm_weight = 0.5;
  std::array<double, kinematics::kJointCount> joint_range{};
  double bbox_diagonal = 1.0;

  static GraspMetric of(const kinematics::KinematicChain& chain, const kinematics::ObjectModel& object) {
    GraspMetric m;
    for (std::size_t j = 0; j < kinematics::kJointCount; ++j) m.joint_range[j] = chain.range(j);
    m.bbox_diagonal = kinematics::bounding_box_diagonal(object);
    return m;
  }

  double joint_term(const kinematics::JointState& a, const kinematics::JointState& b) const {
    double sum = 0.0;
    int n = 0;
    for (std::size_t j = 0; j < kinematics::kJointCount; ++j) {
      if (!(joint_range[j] > 0.0)) continue;
      sum += std::abs(a.q[j] - b.q[j]) / joint_range[j];
      ++n;
    }
    return n ? sum / n : 0.0;
  }

  double palm_term(const Grasp& a, const Grasp& b) const {
    require(bbox_diagonal > 0.0, "bounding-box diagonal must be positive");
    return (a.palm_in_object() - b.palm_in_object()).norm() / bbox_diagonal;
  }

  double operator()(const Grasp& a, const Grasp& b) const {
    return joint_weight * joint_term(a.robot_joints(), b.robot_joints()) + palm_weight * palm_term(a, b);
  }
};

inline void require_same_context(const Grasp& a, const Grasp& b) {
  if (a.object != b.object || a.task != b.task)
    throw MixedContext("grasps '" + a.id + "' and '" + b.id + "' belong to different objects or tasks");
}

enum class Nearest { Original, Extreme };

inline const char* to_string(Nearest n) { return n == Nearest::Original ? "original" : "extreme"; }

struct NearestExtreme {
  Nearest label = Nearest::Original;
  double margin = 0.0;
  double d_original = 0.0;
  double d_extreme = 0.0;
};

inline constexpr double kTieTolerance = 1e-9;

inline NearestExtreme nearest_extreme(const Grasp& candidate, const Grasp& original, const Grasp& extreme,
                                      const GraspMetric& metric) {
  require_same_context(candidate, original);
  require_same_context(candidate, extreme);
  NearestExtreme r;
  r.d_original = metric(candidate, original);
  r.d_extreme = metric(candidate, extreme);
  r.margin = std::abs(r.d_original - r.d_extreme);
  if (r.margin <= kTieTolerance) throw Tie("candidate '" + candidate.id + "' is equidistant from original and extreme");
  r.label = r.d_original < r.d_extreme ? Nearest::Original : Nearest::Extreme;
  return r;
}

inline NearestExtreme nearest_extreme(const Grasp& candidate, const Grasp& original, const Grasp& extreme,
                                      const kinematics::ObjectModel& object, const kinematics::KinematicChain& chain) {
  return nearest_extreme(candidate, original, extreme, GraspMetric::of(chain, object));
}

/// Per-grasp quantities the similarity report is computed from. Positions are
/// in the object frame.
struct GraspFeatures {
  kinematics::JointState joints;
  std::size_t finger_contacts = 0;
  Vec3 palm = Vec3::Zero();
  std::array<Vec3, kinematics::kFingers> fingertips{Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
};

inline GraspFeatures features_of(const Grasp& g, const kinematics::KinematicChain& chain) {
  GraspFeatures f;
  f.joints = g.robot_joints();
  f.finger_contacts = g.contacts.finger_count();
  const auto poses = kinematics::forward_kinematics(chain, f.joints);
  const RigidTransform palm_inv = poses[static_cast<std::size_t>(chain.palm)].inverse();
  const RigidTransform palm_to_object = g.object_pose_in_palm.inverse();
  f.palm = palm_to_object.translation;
  for (std::size_t k = 0; k < kinematics::kFingers; ++k)
    f.fingertips[k] = palm_to_object(palm_inv(poses[static_cast<std::size_t>(chain.fingertips[k])].translation));
  return f;
}

struct SimilarityReport {
  std::array<double, kinematics::kJointCount> joint_variation{};  // population std / joint range
  double mean_joint_variation = 0.0;
  std::size_t min_contacts = 0, max_contacts = 0;
  double palm_spread = 0.0;       // max pairwise distance / bbox diagonal
  double fingertip_spread = 0.0;  // max over fingers of the same
};

namespace detail {

inline double max_pairwise(const std::vector<Vec3>& pts) {
  double best = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) best = std::max(best, (pts[i] - pts[j]).norm());
  return best;
}

}  // namespace detail

inline SimilarityReport similarity(const std::vector<GraspFeatures>& group,
                                   const std::array<double, kinematics::kJointCount>& joint_range,
                                   double bbox_diagonal) {
  if (group.size() < 2) throw GroupTooSmall("similarity needs at least two grasps");
  require(bbox_diagonal > 0.0, "bounding-box diagonal must be positive");
  SimilarityReport r;
  const double n = static_cast<double>(group.size());
  int counted = 0;
  for (std::size_t j = 0; j < kinematics::kJointCount; ++j) {
    // Shifted by the first value so identical values give exactly zero.
    const double shift = group.front().joints.q[j];
    double mean = 0.0;
    for (const auto& g : group) mean += g.joints.q[j] - shift;
    mean /= n;
    double var = 0.0;
    for (const auto& g : group) {
      const double d = g.joints.q[j] - shift - mean;
      var += d * d;
    }
    const double sd = std::sqrt(var / n);
    r.joint_variation[j] = joint_range[j] > 0.0 ? sd / joint_range[j] : 0.0;
    if (joint_range[j] > 0.0) {
      r.mean_joint_variation += r.joint_variation[j];
      ++counted;
    }
  }
  if (counted) r.mean_joint_variation /= counted;

  r.min_contacts = r.max_contacts = group.front().finger_contacts;
  for (const auto& g : group) {
    r.min_contacts = std::min(r.min_contacts, g.finger_contacts);
    r.max_contacts = std::max(r.max_contacts, g.finger_contacts);
  }

  std::vector<Vec3> pts;
  for (const auto& g : group) pts.push_back(g.palm);
  r.palm_spread = detail::max_pairwise(pts) / bbox_diagonal;
  for (std::size_t k = 0; k < kinematics::kFingers; ++k) {
    pts.clear();
    for (const auto& g : group) pts.push_back(g.fingertips[k]);
    r.fingertip_spread = std::max(r.fingertip_spread, detail::max_pairwise(pts) / bbox_diagonal);
  }
  return r;
}

inline SimilarityReport similarity(const std::vector<Grasp>& group, const kinematics::ObjectModel& object,
                                   const kinematics::KinematicChain& chain) {
  if (group.size() < 2) throw GroupTooSmall("similarity needs at least two grasps");
  std::vector<GraspFeatures> features;
  for (const auto& g : group) {
    require_same_context(group.front(), g);
    features.push_back(features_of(g, chain));
  }
  std::array<double, kinematics::kJointCount> range{};
  for (std::size_t j = 0; j < kinematics::kJointCount; ++j) range[j] = chain.range(j);
  return similarity(features, range, kinematics::bounding_box_diagonal(object));
}

/// Single-linkage groups of grasp ids: two grasps share a group when a chain
/// of pairwise distances <= threshold connects them. Ids are sorted within a
/// group and groups are ordered by their first id, so the result does not
/// depend on input order.
inline std::vector<std::vector<std::string>> group_grasps(const std::vector<Grasp>& grasps,
                                                          const GraspMetric& metric, double threshold) {
  for (const auto& g : grasps) require_same_context(grasps.front(), g);
  std::vector<std::size_t> parent(grasps.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto root = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < grasps.size(); ++i)
    for (std::size_t j = i + 1; j < grasps.size(); ++j)
      if (metric(grasps[i], grasps[j]) <= threshold) parent[root(i)] = root(j);

  std::vector<std::vector<std::string>> groups;
  std::vector<std::ptrdiff_t> slot(grasps.size(), -1);
  for (std::size_t i = 0; i < grasps.size(); ++i) {
    const std::size_t r = root(i);
    if (slot[r] < 0) {
      slot[r] = static_cast<std::ptrdiff_t>(groups.size());
      groups.emplace_back();
    }
    groups[static_cast<std::size_t>(slot[r])].push_back(grasps[i].id);
  }
  for (auto& g : groups) std::sort(g.begin(), g.end());
  std::sort(groups.begin(), groups.end());
  return groups;
}

}  // namespace graspcap::grasps
