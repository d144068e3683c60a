#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "graspcap/align/icp.hpp"
#include "graspcap/align/kdtree.hpp"
#include "graspcap/align/procrustes.hpp"
#include "graspcap/core/error.hpp"
#include "graspcap/kinematics/object_model.hpp"
#include "graspcap/rgbd/point_cloud.hpp"

// Three-step spatial calibration of a capture frame:
//   1. a user-supplied seed places the cloud near the arm model,
//   2. ICP against the arm surface samples refines cloud -> arm,
//   3. hand and object alignment alternate on a proximity partition of the cloud.

namespace graspcap::align {

struct ArmAlignmentOptions {
  bool crop = true;
  double crop_margin = 0.05;  // metres added around the arm samples' bounding box
};

/// Registers the cloud to arm surface samples. The result maps cloud
/// coordinates into the arm frame.
inline RegistrationResult align_cloud_to_arm(const rgbd::PointCloud& cloud, const Points& arm_samples,
                                             const RigidTransform& init, const IcpParams& params = {},
                                             const ArmAlignmentOptions& options = {}) {
  if (cloud.empty() || arm_samples.empty()) throw EmptyCloud("arm alignment needs a cloud and arm samples");
  Points source;
  if (options.crop) {
    const auto box = rgbd::Box3::bounding(arm_samples).dilated(options.crop_margin);
    for (const auto& p : cloud.points)
      if (box.contains(init(p))) source.push_back(p);
    if (source.empty()) throw EmptyAfterCrop("no cloud point falls inside the dilated arm box");
  } else {
    source = cloud.points;
  }
  return icp(source, KdTree(arm_samples), init, params);
}

struct ObjectAlignmentOptions {
  double object_density = 2e5;   // object surface samples per m^2
  double partition_gate = 0.05;  // points farther than this from both are ignored
  double hand_gate = 0.01;       // hand points must lie this close to the hand samples
};

struct ObjectAlignment {
  RigidTransform object_pose;     // object frame -> hand frame
  RigidTransform cloud_to_hand;   // correction applied to the cloud
  double hand_residual = 0.0;
  double object_residual = 0.0;
  std::vector<double> hand_residuals;    // after each round
  std::vector<double> object_residuals;  // after each round
  std::size_t hand_points = 0, object_points = 0;
};

namespace detail {

struct Partition {
  Points hand;    // raw cloud coordinates
  Points object;  // raw cloud coordinates
};

inline Partition partition_cloud(const Points& cloud, const RigidTransform& cloud_to_hand, const KdTree& hand,
                                 const kinematics::ObjectModel& object, double gate, double hand_gate) {
  Partition part;
  for (const auto& raw : cloud) {
    const Vec3 p = cloud_to_hand(raw);
    const double d_hand = std::sqrt(hand.nearest(p).squared_distance);
    // The cloud is already registered to the hand, so points hugging the hand
    // samples are hand points even where the current object estimate overlaps.
    if (d_hand <= hand_gate) {
      part.hand.push_back(raw);
    } else if (std::abs(kinematics::signed_distance(object, p)) <= gate) {
      part.object.push_back(raw);
    }
  }
  return part;
}

inline double rms_to_tree(const Points& pts, const RigidTransform& t, const KdTree& tree) {
  double s = 0.0;
  for (const auto& p : pts) s += tree.nearest(t(p)).squared_distance;
  return pts.empty() ? 0.0 : std::sqrt(s / static_cast<double>(pts.size()));
}

inline double rms_to_object(const Points& pts, const RigidTransform& t, const kinematics::ObjectModel& object) {
  double s = 0.0;
  for (const auto& p : pts) {
    const double d = kinematics::signed_distance(object, t(p));
    s += d * d;
  }
  return pts.empty() ? 0.0 : std::sqrt(s / static_cast<double>(pts.size()));
}

}  // namespace detail

/// Alternates cloud->hand and object->cloud registration.
///
/// `cloud` and `hand_samples` must already be roughly co-registered (the
/// output of align_cloud_to_arm); `init_object` is the manual object seed in
/// that frame. Each round re-partitions the cloud by proximity, refines the
/// cloud against the hand samples, then fits the object model to its share of
/// the cloud with ICP and a final Procrustes step. An update that would raise
/// a residual on the round's partition is rejected, so both residual
/// sequences are non-increasing.
inline ObjectAlignment alternate_object_alignment(const Points& cloud, const Points& hand_samples,
                                                  const kinematics::ObjectModel& object,
                                                  const RigidTransform& init_object, int rounds,
                                                  const IcpParams& params = {},
                                                  const ObjectAlignmentOptions& options = {}) {
  require(rounds >= 1, "object alignment needs at least one round");
  if (cloud.empty() || hand_samples.empty()) throw EmptyCloud("object alignment needs a cloud and hand samples");

  const KdTree hand_tree(hand_samples);
  kinematics::ObjectModel local = object;
  local.pose = RigidTransform::identity();
  const KdTree object_tree(kinematics::sample_object_surface(local, options.object_density));

  ObjectAlignment out;
  out.object_pose = init_object;
  kinematics::ObjectModel placed = object;
  double hand_best = std::numeric_limits<double>::infinity();
  double object_best = std::numeric_limits<double>::infinity();

  for (int round = 0; round < rounds; ++round) {
    placed.pose = out.object_pose;
    const auto part = detail::partition_cloud(cloud, out.cloud_to_hand, hand_tree, placed, options.partition_gate,
                                                options.hand_gate);
    if (part.hand.empty()) throw EmptyPartition("no cloud point is attributed to the hand");
    if (part.object.empty()) throw EmptyPartition("no cloud point is attributed to the object");
    out.hand_points = part.hand.size();
    out.object_points = part.object.size();

    // Cloud -> hand.
    const double hand_before = detail::rms_to_tree(part.hand, out.cloud_to_hand, hand_tree);
    const auto hand_fit = icp(part.hand, hand_tree, out.cloud_to_hand, params);
    double hand_after = detail::rms_to_tree(part.hand, hand_fit.transform, hand_tree);
    if (hand_after <= hand_before) {
      out.cloud_to_hand = hand_fit.transform;
    } else {
      hand_after = hand_before;
    }

    // Object -> cloud: register the object's share of the cloud, expressed in
    // the current object frame, onto the model samples and invert.
    Points in_object;
    in_object.reserve(part.object.size());
    const RigidTransform hand_to_object = out.object_pose.inverse();
    for (const auto& p : part.object) in_object.push_back(hand_to_object(out.cloud_to_hand(p)));
    const double object_before = detail::rms_to_object(in_object, RigidTransform::identity(), local);
    RigidTransform delta = RigidTransform::identity();
    try {
      delta = icp(in_object, object_tree, RigidTransform::identity(), params).transform;
      // Procrustes refinement on the final nearest-sample correspondences.
      Points from, to;
      std::vector<std::pair<double, std::size_t>> ranked;
      for (std::size_t i = 0; i < in_object.size(); ++i) {
        const Vec3 p = delta(in_object[i]);
        const auto hit = object_tree.nearest(p);
        ranked.push_back({hit.squared_distance, i});
      }
      std::sort(ranked.begin(), ranked.end());
      const auto keep = static_cast<std::size_t>(std::ceil((1.0 - params.trim_fraction) * ranked.size()));
      for (std::size_t k = 0; k < keep; ++k) {
        const Vec3 p = delta(in_object[ranked[k].second]);
        from.push_back(p);
        to.push_back(object_tree.points()[object_tree.nearest(p).index]);
      }
      if (from.size() >= 3) {
        const RigidTransform refined = procrustes(from, to) * delta;
        if (detail::rms_to_object(in_object, refined, local) <= detail::rms_to_object(in_object, delta, local))
          delta = refined;
      }
    } catch (const DegenerateConfiguration&) {
      delta = RigidTransform::identity();
    }
    double object_after = detail::rms_to_object(in_object, delta, local);
    if (object_after <= object_before) {
      out.object_pose = out.object_pose * delta.inverse();
    } else {
      object_after = object_before;
    }

    hand_best = std::min(hand_best, hand_after);
    object_best = std::min(object_best, object_after);
    out.hand_residuals.push_back(hand_best);
    out.object_residuals.push_back(object_best);
  }
  out.hand_residual = out.hand_residuals.back();
  out.object_residual = out.object_residuals.back();
  return out;
}

}  // namespace graspcap::align
