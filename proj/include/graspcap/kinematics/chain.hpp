#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "graspcap/core/error.hpp"
#include "graspcap/core/json_io.hpp"
#include "graspcap/core/rigid_transform.hpp"
#include "graspcap/kinematics/joint_state.hpp"

// Chain description file (JSON):
//
//   {
//     "schema": "graspcap-chain", "version": 1,
//     "coupling_ratio": 0.424,
//     "limits": {"lower": [11 values], "upper": [11 values]},
//     "palm": "<link name>", "fingertips": ["<link>", "<link>", "<link>"],
//     "links": [
//       {"name": "...", "parent": "<earlier link>" | null,
//        "origin": {"xyz": [x, y, z], "rpy": [r, p, y]},
//        "joint": {"source": "arm" | "spread" | "flexion" | "distal",
//                  "index": i, "axis": [x, y, z], "scale": s},   // omit for fixed
//        "finger": -1 (arm) | 0 (palm) | 1..3,
//        "spheres": [{"center": [x, y, z], "radius": r}, ...]}
//     ]
//   }
//
// Links must be listed parent-first. A "distal" joint turns by
// scale * coupling_ratio * flexion[index].

namespace graspcap::kinematics {

enum class JointSource { Fixed, Arm, Spread, Flexion, Distal };

struct Sphere {
  Vec3 center = Vec3::Zero();  // in the link frame
  double radius = 0.0;
};

struct Link {
  std::string name;
  int parent = -1;
  RigidTransform origin;
  JointSource source = JointSource::Fixed;
  int index = 0;
  Vec3 axis = Vec3::UnitZ();
  double scale = 1.0;
  int finger = -1;
  std::vector<Sphere> spheres;
};

class KinematicChain {
 public:
  std::vector<Link> links;
  double coupling_ratio = 0.424;
  std::array<double, kJointCount> lower{}, upper{};
  int palm = -1;
  std::array<int, kFingers> fingertips{-1, -1, -1};

  int find(const std::string& name) const {
    for (std::size_t i = 0; i < links.size(); ++i)
      if (links[i].name == name) return static_cast<int>(i);
    return -1;
  }

  double range(std::size_t joint) const { return upper[joint] - lower[joint]; }

  void validate() const {
    for (std::size_t i = 0; i < links.size(); ++i) {
      const Link& l = links[i];
      if (l.parent >= static_cast<int>(i))
        throw InvalidChain("link '" + l.name + "' listed before its parent");
      for (const auto& s : l.spheres)
        if (!(s.radius > 0.0)) throw InvalidChain("link '" + l.name + "' has a non-positive sphere radius");
      if (l.source != JointSource::Fixed && std::abs(l.axis.norm() - 1.0) > 1e-9)
        throw InvalidChain("link '" + l.name + "' has a non-unit axis");
    }
    for (std::size_t j = 0; j < kJointCount; ++j)
      if (!(lower[j] <= upper[j])) throw InvalidChain("joint " + std::to_string(j) + " has lower > upper");
    if (palm < 0) throw InvalidChain("chain has no palm link");
  }

  /// Joint value driving link `l` in configuration `q`.
  double joint_value(const Link& l, const JointState& q) const {
    switch (l.source) {
      case JointSource::Fixed: return 0.0;
      case JointSource::Arm: return q.arm(static_cast<std::size_t>(l.index));
      case JointSource::Spread: return q.spread();
      case JointSource::Flexion: return q.flexion(static_cast<std::size_t>(l.index));
      case JointSource::Distal: return coupling_ratio * q.flexion(static_cast<std::size_t>(l.index));
    }
    return 0.0;
  }

  void check_limits(const JointState& q, double tol = 1e-12) const {
    static constexpr const char* kNames[kJointCount] = {"arm1", "arm2", "arm3", "arm4", "arm5", "arm6",
                                                        "arm7", "spread", "flex1", "flex2", "flex3"};
    for (std::size_t j = 0; j < kJointCount; ++j)
      if (!(q.q[j] >= lower[j] - tol && q.q[j] <= upper[j] + tol))
        throw JointLimitViolation(std::string(kNames[j]) + " = " + std::to_string(q.q[j]) + " outside [" +
                                  std::to_string(lower[j]) + ", " + std::to_string(upper[j]) + "]");
  }

  JointState clamp(JointState q) const {
    for (std::size_t j = 0; j < kJointCount; ++j) q.q[j] = std::clamp(q.q[j], lower[j], upper[j]);
    return q;
  }
};

/// Pose of every link in the chain's base frame.
inline std::vector<RigidTransform> forward_kinematics(const KinematicChain& chain, const JointState& q) {
  chain.check_limits(q);
  std::vector<RigidTransform> poses(chain.links.size());
  for (std::size_t i = 0; i < chain.links.size(); ++i) {
    const Link& l = chain.links[i];
    RigidTransform local = l.origin;
    if (l.source != JointSource::Fixed)
      local = local * RigidTransform::from_axis_angle(l.axis, l.scale * chain.joint_value(l, q));
    poses[i] = l.parent < 0 ? local : poses[static_cast<std::size_t>(l.parent)] * local;
  }
  return poses;
}

/// World-frame sphere centres/radii for the selected links.
struct PlacedSphere {
  int link = 0;
  int finger = -1;
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
};

inline std::vector<PlacedSphere> placed_spheres(const KinematicChain& chain,
                                                const std::vector<RigidTransform>& poses,
                                                bool hand_only = false) {
  std::vector<PlacedSphere> out;
  for (std::size_t i = 0; i < chain.links.size(); ++i) {
    const Link& l = chain.links[i];
    if (hand_only && l.finger < 0) continue;
    for (const auto& s : l.spheres) out.push_back({static_cast<int>(i), l.finger, poses[i](s.center), s.radius});
  }
  return out;
}

/// Fibonacci-lattice points on a sphere, `n` of them.
inline Points fibonacci_sphere(const Vec3& center, double radius, std::size_t n) {
  Points pts;
  pts.reserve(n);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (std::size_t i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(n);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * static_cast<double>(i);
    pts.push_back(center + radius * Vec3(r * std::cos(phi), r * std::sin(phi), z));
  }
  return pts;
}

inline std::size_t sphere_sample_count(double radius, double density) {
  const double area = 4.0 * std::numbers::pi * radius * radius;
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(density * area)));
}

/// Surface samples of the link spheres at configuration `q`, `density` points
/// per square metre.
inline Points sample_surface(const KinematicChain& chain, const JointState& q, double density,
                             bool hand_only = false) {
  require(density > 0.0, "sampling density must be positive");
  const auto poses = forward_kinematics(chain, q);
  Points out;
  for (const auto& s : placed_spheres(chain, poses, hand_only)) {
    const auto pts = fibonacci_sphere(s.center, s.radius, sphere_sample_count(s.radius, density));
    out.insert(out.end(), pts.begin(), pts.end());
  }
  return out;
}

namespace detail {

inline JointSource parse_source(const std::string& s) {
  if (s == "arm") return JointSource::Arm;
  if (s == "spread") return JointSource::Spread;
  if (s == "flexion") return JointSource::Flexion;
  if (s == "distal") return JointSource::Distal;
  throw InvalidChain("unknown joint source '" + s + "'");
}

}  // namespace detail

inline KinematicChain chain_from_json(const Json& j) {
  KinematicChain chain;
  try {
    if (j.value("schema", std::string{}) != "graspcap-chain") throw InvalidChain("not a graspcap-chain document");
    if (j.at("version").get<int>() != 1) throw InvalidChain("unsupported chain version");
    chain.coupling_ratio = j.value("coupling_ratio", 0.424);
    chain.lower = j.at("limits").at("lower").get<std::array<double, kJointCount>>();
    chain.upper = j.at("limits").at("upper").get<std::array<double, kJointCount>>();
    for (const auto& lj : j.at("links")) {
      Link l;
      l.name = lj.at("name").get<std::string>();
      if (chain.find(l.name) >= 0) throw InvalidChain("duplicate link '" + l.name + "'");
      if (lj.contains("parent") && !lj.at("parent").is_null()) {
        l.parent = chain.find(lj.at("parent").get<std::string>());
        if (l.parent < 0) throw InvalidChain("link '" + l.name + "' has an unknown or later parent");
      }
      if (lj.contains("origin")) {
        const auto& o = lj.at("origin");
        l.origin = RigidTransform::from_xyz_rpy(o.contains("xyz") ? vec3_from_json(o.at("xyz")) : Vec3::Zero(),
                                                o.contains("rpy") ? vec3_from_json(o.at("rpy")) : Vec3::Zero());
      }
      if (lj.contains("joint") && !lj.at("joint").is_null()) {
        const auto& jj = lj.at("joint");
        l.source = detail::parse_source(jj.at("source").get<std::string>());
        l.index = jj.value("index", 0);
        l.axis = vec3_from_json(jj.at("axis"));
        if (l.axis.norm() == 0.0) throw InvalidChain("link '" + l.name + "' has a zero axis");
        l.axis.normalize();
        l.scale = jj.value("scale", 1.0);
        const int max_index = l.source == JointSource::Arm ? static_cast<int>(kArmJoints)
                              : l.source == JointSource::Spread ? 1
                                                                : static_cast<int>(kFingers);
        if (l.index < 0 || l.index >= max_index) throw InvalidChain("link '" + l.name + "' joint index out of range");
      }
      l.finger = lj.value("finger", -1);
      if (l.finger < -1 || l.finger > static_cast<int>(kFingers))
        throw InvalidChain("link '" + l.name + "' has an invalid finger id");
      if (lj.contains("spheres"))
        for (const auto& sj : lj.at("spheres")) l.spheres.push_back({vec3_from_json(sj.at("center")), sj.at("radius").get<double>()});
      chain.links.push_back(std::move(l));
    }
    chain.palm = chain.find(j.at("palm").get<std::string>());
    const auto tips = j.at("fingertips").get<std::vector<std::string>>();
    if (tips.size() != kFingers) throw InvalidChain("expected 3 fingertip links");
    for (std::size_t k = 0; k < kFingers; ++k) {
      chain.fingertips[k] = chain.find(tips[k]);
      if (chain.fingertips[k] < 0) throw InvalidChain("unknown fingertip link '" + tips[k] + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidChain(std::string("chain description: ") + e.what());
  }
  chain.validate();
  return chain;
}

inline KinematicChain load_chain(const std::string& path) { return chain_from_json(read_json_file(path)); }

}  // namespace graspcap::kinematics
