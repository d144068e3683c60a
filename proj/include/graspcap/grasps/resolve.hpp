#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "graspcap/core/error.hpp"
#include "graspcap/grasps/grasp.hpp"
#include "graspcap/kinematics/chain.hpp"
#include "graspcap/kinematics/contacts.hpp"
#include "graspcap/kinematics/object_model.hpp"

namespace graspcap::grasps {

/// Componentwise (1-t)*a + t*b over all joints; angles are treated as reals.
inline kinematics::JointState interpolate_raw(const Grasp& a, const Grasp& b, double t) {
  if (a.object != b.object || a.task != b.task)
    throw MixedContext("cannot interpolate grasps of different objects or tasks");
  require(t >= 0.0 && t <= 1.0, "interpolation parameter must lie in [0, 1]");
  const auto& qa = a.robot_joints();
  const auto& qb = b.robot_joints();
  if (t == 0.0) return qa;
  if (t == 1.0) return qb;
  kinematics::JointState q;
  for (std::size_t j = 0; j < kinematics::kJointCount; ++j) q.q[j] = (1.0 - t) * qa.q[j] + t * qb.q[j];
  q.timestamp_s = (1.0 - t) * qa.timestamp_s + t * qb.timestamp_s;
  return q;
}

struct ResolveParams {
  double palm_step = 1e-3;          // metres per phase-1 step
  double flexion_step = 0.01;       // radians per phase-2/3 step
  int step_budget = 10000;          // per phase
  double contact_threshold = 2e-3;  // metres
  double tolerance = 1e-3;          // admissible residual penetration
  std::set<int> contact_fingers;    // fingers (1..3) to close onto the object

  void validate() const {
    require(palm_step > 0.0 && flexion_step > 0.0, "resolve step sizes must be positive");
    require(step_budget > 0, "resolve step budget must be positive");
    require(contact_threshold > 0.0 && tolerance >= 0.0, "resolve thresholds must be positive");
    for (int f : contact_fingers)
      require(f >= 1 && f <= static_cast<int>(kinematics::kFingers), "contact finger ids are 1..3");
  }
};

struct ResolveTrace {
  Vec3 palm_offset = Vec3::Zero();  // hand translation applied in phase 1
  std::vector<double> palm_depths;  // deepest palm penetration before each phase-1 step and after the last
  int palm_steps = 0;
  int release_steps = 0;
  int closing_steps = 0;
  std::vector<int> unreached_fingers;  // phase 3 ran into the joint limit
};

struct Resolution {
  Grasp grasp;
  ResolveTrace trace;
};

namespace detail {

/// Minimum sphere clearance per group: [0] palm, [1..3] fingers.
using GroupClearance = std::array<double, kinematics::kFingers + 1>;

inline GroupClearance group_clearance(const kinematics::KinematicChain& chain, const kinematics::JointState& q,
                                      const kinematics::ObjectModel& object, const Vec3& offset,
                                      Vec3* deepest_palm = nullptr) {
  GroupClearance out;
  out.fill(std::numeric_limits<double>::infinity());
  const auto poses = kinematics::forward_kinematics(chain, q);
  for (auto s : kinematics::placed_spheres(chain, poses, /*hand_only=*/true)) {
    s.center += offset;
    const double sd = kinematics::sphere_clearance(object, s);
    auto& slot = out[static_cast<std::size_t>(s.finger)];
    if (sd < slot) {
      slot = sd;
      if (s.finger == kinematics::kPalm && deepest_palm) *deepest_palm = s.center;
    }
  }
  return out;
}

inline std::string format_t(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", t);
  return buf;
}

}  // namespace detail

/// Turns a raw joint configuration into a penetration-free grasp of `object`
/// (whose pose is given in the chain's base frame):
///   1. translate the hand out of the object along the SDF gradient at the
///      deepest palm sphere until the palm clears,
///   2. open each penetrating finger until it clears,
///   3. close each requested finger, in finger order, until it touches.
/// Arm joints are never modified; the phase-1 translation is folded into the
/// grasp's object pose.
inline Resolution resolve_grasp_traced(const kinematics::JointState& raw, const kinematics::ObjectModel& object,
                                       const kinematics::KinematicChain& chain, const ResolveParams& params = {}) {
  params.validate();
  chain.check_limits(raw);
  Resolution res;
  ResolveTrace& tr = res.trace;
  kinematics::JointState q = raw;
  Vec3 offset = Vec3::Zero();

  // Phase 1: palm.
  {
    Vec3 deepest = Vec3::Zero();
    double palm = detail::group_clearance(chain, q, object, offset, &deepest)[0];
    if (palm < -params.tolerance) {
      tr.palm_depths.push_back(std::max(0.0, -palm));
      while (palm < 0.0) {
        if (tr.palm_steps >= params.step_budget)
          throw Unresolvable("palm still penetrates after " + std::to_string(tr.palm_steps) + " steps");
        Vec3 dir = kinematics::sdf_gradient(object, deepest);
        if (!(dir.norm() > 0.0)) dir = Vec3::UnitZ();
        offset += params.palm_step * dir.normalized();
        ++tr.palm_steps;
        palm = detail::group_clearance(chain, q, object, offset, &deepest)[0];
        tr.palm_depths.push_back(std::max(0.0, -palm));
      }
    }
  }

  // Phase 2: fingers that penetrate open up.
  for (std::size_t k = 0; k < kinematics::kFingers; ++k) {
    const std::size_t slot = k + 1;
    double sd = detail::group_clearance(chain, q, object, offset)[slot];
    if (sd >= -params.tolerance) continue;
    const double lower = chain.lower[kinematics::kFlexionIndex + k];
    int steps = 0;
    while (sd < 0.0) {
      if (q.flexion(k) <= lower)
        throw Unresolvable("finger " + std::to_string(slot) + " penetrates at its lower flexion limit");
      if (steps >= params.step_budget)
        throw Unresolvable("finger " + std::to_string(slot) + " still penetrates after " + std::to_string(steps) + " steps");
      q.flexion(k) = std::max(lower, q.flexion(k) - params.flexion_step);
      ++steps;
      sd = detail::group_clearance(chain, q, object, offset)[slot];
    }
    tr.release_steps += steps;
  }

  // Phase 3: close fingers that should touch.
  for (int finger : params.contact_fingers) {
    const auto k = static_cast<std::size_t>(finger - 1);
    const auto slot = static_cast<std::size_t>(finger);
    const double upper = chain.upper[kinematics::kFlexionIndex + k];
    double sd = detail::group_clearance(chain, q, object, offset)[slot];
    int steps = 0;
    bool reached = sd <= params.contact_threshold;
    while (!reached) {
      if (q.flexion(k) >= upper || steps >= params.step_budget) break;
      const double prev = q.flexion(k);
      q.flexion(k) = std::min(upper, prev + params.flexion_step);
      ++steps;
      sd = detail::group_clearance(chain, q, object, offset)[slot];
      if (sd < -params.tolerance) {
        // Overshot into the object: bisect back to the contact band.
        double lo = prev, hi = q.flexion(k);
        q.flexion(k) = lo;
        for (int it = 0; it < 60; ++it) {
          const double mid = 0.5 * (lo + hi);
          q.flexion(k) = mid;
          const double m = detail::group_clearance(chain, q, object, offset)[slot];
          if (m > params.contact_threshold) {
            lo = mid;
          } else if (m < -params.tolerance) {
            hi = mid;
          } else {
            break;
          }
          q.flexion(k) = lo;
        }
        sd = detail::group_clearance(chain, q, object, offset)[slot];
      }
      reached = sd <= params.contact_threshold;
    }
    tr.closing_steps += steps;
    if (!reached) tr.unreached_fingers.push_back(finger);
  }

  tr.palm_offset = offset;
  auto poses = kinematics::forward_kinematics(chain, q);
  const RigidTransform palm = RigidTransform::from_translation(offset) * poses[static_cast<std::size_t>(chain.palm)];
  auto contacts = kinematics::contacts_of(chain, poses, object, params.contact_threshold, offset);
  if (contacts.max_penetration > params.tolerance)
    throw Unresolvable("residual penetration " + std::to_string(contacts.max_penetration) + " m exceeds tolerance");
  const RigidTransform to_object = object.pose.inverse();
  for (auto& c : contacts.contacts) c.point = to_object(c.point);

  Grasp& g = res.grasp;
  g.object = object.name;
  g.hand = Hand::Robot;
  g.joints = q;
  g.object_pose_in_palm = palm.inverse() * object.pose;
  g.contacts = std::move(contacts);
  for (int f : tr.unreached_fingers) g.warnings.push_back("NoContactReachable: finger " + std::to_string(f));
  return res;
}

inline Grasp resolve_grasp(const kinematics::JointState& raw, const kinematics::ObjectModel& object,
                           const kinematics::KinematicChain& chain, const ResolveParams& params = {}) {
  return resolve_grasp_traced(raw, object, chain, params).grasp;
}

/// Object placed in the chain's base frame as recorded by `g`.
inline kinematics::ObjectModel object_in_base(const Grasp& g, const kinematics::ObjectModel& model,
                                              const kinematics::KinematicChain& chain) {
  kinematics::ObjectModel placed = model;
  const auto poses = kinematics::forward_kinematics(chain, g.robot_joints());
  placed.pose = poses[static_cast<std::size_t>(chain.palm)] * g.object_pose_in_palm;
  return placed;
}

/// Fingers (1..3) in contact in any of the given grasps.
inline std::set<int> contact_fingers_of(const std::vector<const Grasp*>& grasps) {
  std::set<int> out;
  for (const Grasp* g : grasps)
    for (int f : g->contacts.fingers()) out.insert(f);
  return out;
}

/// Grasp at fraction `t` from the original (0) to extreme `extreme_index` (1).
/// `object` carries the object's pose in the chain's base frame.
inline Grasp interpolate_range(const GraspRange& range, double t, const kinematics::ObjectModel& object,
                               const kinematics::KinematicChain& chain, ResolveParams params = {},
                               std::size_t extreme_index = 0) {
  require(!range.extremes.empty(), "range '" + range.id + "' has no extremes to interpolate toward");
  require(extreme_index < range.extremes.size(), "extreme index out of range");
  const Grasp& a = range.original;
  const Grasp& b = range.extremes[extreme_index];
  const auto raw = interpolate_raw(a, b, t);
  if (params.contact_fingers.empty()) params.contact_fingers = contact_fingers_of({&a, &b});
  Grasp g = resolve_grasp(raw, object, chain, params);
  g.id = range.id + "@" + detail::format_t(t);
  g.object = a.object;
  g.task = a.task;
  g.label = a.label;
  return g;
}

}  // namespace graspcap::grasps
