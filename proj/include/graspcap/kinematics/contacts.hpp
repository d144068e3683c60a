#pragma once

#include <algorithm>
#include <limits>
#include <set>
#include <vector>

#include "graspcap/core/error.hpp"
#include "graspcap/kinematics/chain.hpp"
#include "graspcap/kinematics/object_model.hpp"

namespace graspcap::kinematics {

inline constexpr int kPalm = 0;

struct Contact {
  int finger = kPalm;  // 0 palm, 1..3 fingers
  int link = 0;
  Vec3 point = Vec3::Zero();  // nearest point on the object surface
  double signed_distance = 0.0;  // sphere surface to object surface; negative = penetration

  friend bool operator==(const Contact& a, const Contact& b) {
    return a.finger == b.finger && a.link == b.link && a.point == b.point && a.signed_distance == b.signed_distance;
  }
};

struct ContactSet {
  std::vector<Contact> contacts;
  // Depth of the deepest hand sphere, 0 when nothing penetrates.
  double max_penetration = 0.0;

  /// Distinct fingers (not the palm) with at least one contact.
  std::set<int> fingers() const {
    std::set<int> out;
    for (const auto& c : contacts)
      if (c.finger > kPalm) out.insert(c.finger);
    return out;
  }

  std::size_t finger_count() const { return fingers().size(); }

  friend bool operator==(const ContactSet&, const ContactSet&) = default;
};

/// Signed clearance of one placed sphere against the object.
inline double sphere_clearance(const ObjectModel& object, const PlacedSphere& s) {
  return signed_distance(object, s.center) - s.radius;
}

/// A link is in contact when its closest sphere is within `threshold` of the
/// object surface or penetrates it. `hand_offset` translates the whole hand.
inline ContactSet contacts_of(const KinematicChain& chain, const std::vector<RigidTransform>& poses,
                              const ObjectModel& object, double threshold,
                              const Vec3& hand_offset = Vec3::Zero()) {
  require(threshold > 0.0, "contact threshold must be positive");
  ContactSet out;
  struct Best {
    double sd = std::numeric_limits<double>::infinity();
    PlacedSphere sphere;
  };
  std::vector<Best> per_link(chain.links.size());
  double deepest = 0.0;
  for (PlacedSphere s : placed_spheres(chain, poses, /*hand_only=*/true)) {
    s.center += hand_offset;
    const double sd = sphere_clearance(object, s);
    deepest = std::max(deepest, -sd);
    auto& best = per_link[static_cast<std::size_t>(s.link)];
    if (sd < best.sd) best = {sd, s};
  }
  for (std::size_t i = 0; i < per_link.size(); ++i) {
    const Best& b = per_link[i];
    if (!(b.sd <= threshold)) continue;
    const double centre_sd = signed_distance(object, b.sphere.center);
    const Vec3 surface = b.sphere.center - centre_sd * sdf_gradient(object, b.sphere.center);
    out.contacts.push_back({b.sphere.finger, static_cast<int>(i), surface, b.sd});
  }
  out.max_penetration = deepest;
  return out;
}

inline ContactSet detect_contacts(const KinematicChain& chain, const JointState& q, const ObjectModel& object,
                                  double threshold, const Vec3& hand_offset = Vec3::Zero()) {
  return contacts_of(chain, forward_kinematics(chain, q), object, threshold, hand_offset);
}

}  // namespace graspcap::kinematics
