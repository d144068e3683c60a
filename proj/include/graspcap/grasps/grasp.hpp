#pragma once

#include <optional>
#include <string>
#include <vector>

#include "graspcap/core/error.hpp"
#include "graspcap/core/rigid_transform.hpp"
#include "graspcap/kinematics/contacts.hpp"
#include "graspcap/kinematics/joint_state.hpp"

namespace graspcap::grasps {

enum class Task { PickUp, Natural };
enum class Label { Good, Bad };
enum class Hand { Robot, Human };

inline const char* to_string(Task t) { return t == Task::PickUp ? "pick-up" : "natural"; }
inline const char* to_string(Label l) { return l == Label::Good ? "good" : "bad"; }
inline const char* to_string(Hand h) { return h == Hand::Robot ? "robot" : "human"; }

inline Task parse_task(const std::string& s) {
  if (s == "pick-up") return Task::PickUp;
  if (s == "natural") return Task::Natural;
  throw SchemaViolation("unknown task '" + s + "'");
}
inline Label parse_label(const std::string& s) {
  if (s == "good") return Label::Good;
  if (s == "bad") return Label::Bad;
  throw SchemaViolation("unknown label '" + s + "'");
}
inline Hand parse_hand(const std::string& s) {
  if (s == "robot") return Hand::Robot;
  if (s == "human") return Hand::Human;
  throw SchemaViolation("unknown hand '" + s + "'");
}

/// One demonstrated grasp. Robot grasps carry joints; human grasps do not.
/// Contact points are expressed in the object frame.
struct Grasp {
  std::string id;
  std::string object;
  Task task = Task::PickUp;
  Label label = Label::Good;
  Hand hand = Hand::Robot;
  std::optional<kinematics::JointState> joints;
  RigidTransform object_pose_in_palm;
  kinematics::ContactSet contacts;
  std::vector<std::string> warnings;

  const kinematics::JointState& robot_joints() const {
    if (!joints) throw PreconditionViolation("grasp '" + id + "' has no joint data");
    return *joints;
  }

  /// Palm origin in the object frame.
  Vec3 palm_in_object() const { return object_pose_in_palm.inverse().translation; }

  friend bool operator==(const Grasp&, const Grasp&) = default;
};

struct SymmetryAxis {
  Vec3 axis = Vec3::UnitZ();  // object frame
  double period_rad = 0.0;    // 0 = continuous

  friend bool operator==(const SymmetryAxis& a, const SymmetryAxis& b) {
    return a.axis == b.axis && a.period_rad == b.period_rad;
  }
};

/// An original grasp plus up to two extremes along the object.
struct GraspRange {
  std::string id;
  Grasp original;
  std::vector<Grasp> extremes;
  std::optional<SymmetryAxis> symmetry;
  std::string notes;

  bool is_point() const { return extremes.empty(); }

  friend bool operator==(const GraspRange&, const GraspRange&) = default;

  void validate() const {
    if (extremes.size() > 2) throw SchemaViolation("range '" + id + "' has more than two extremes");
    for (const auto& e : extremes)
      if (e.label != original.label || e.task != original.task || e.object != original.object)
        throw MixedContext("range '" + id + "': extreme '" + e.id + "' differs from the original in label, task or object");
  }
};

}  // namespace graspcap::grasps
