#pragma once

#include <array>
#include <cstddef>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "graspcap/core/error.hpp"

namespace graspcap::kinematics {

inline constexpr std::size_t kArmJoints = 7;
inline constexpr std::size_t kFingers = 3;
/// 7 arm angles, spread, 3 proximal flexions.
inline constexpr std::size_t kJointCount = kArmJoints + 1 + kFingers;
inline constexpr std::size_t kSpreadIndex = kArmJoints;
inline constexpr std::size_t kFlexionIndex = kArmJoints + 1;

/// Arm and hand configuration. Distal finger angles are never stored; they
/// follow from flexion through the chain's coupling ratio.
struct JointState {
  std::array<double, kJointCount> q{};
  double timestamp_s = 0.0;

  double& arm(std::size_t i) { return q[i]; }
  double arm(std::size_t i) const { return q[i]; }
  double& spread() { return q[kSpreadIndex]; }
  double spread() const { return q[kSpreadIndex]; }
  double& flexion(std::size_t finger) { return q[kFlexionIndex + finger]; }
  double flexion(std::size_t finger) const { return q[kFlexionIndex + finger]; }

  friend bool operator==(const JointState&, const JointState&) = default;
};

// Joint stream text: one record per line,
//   timestamp_s a1 a2 a3 a4 a5 a6 a7 spread f1 f2 f3
// whitespace separated; blank lines and '#' comments ignored.

inline std::vector<JointState> parse_joint_stream(std::string_view text) {
  std::vector<JointState> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    JointState s;
    if (!(fields >> s.timestamp_s)) throw MalformedLine(line_no, "bad timestamp");
    for (std::size_t i = 0; i < kJointCount; ++i)
      if (!(fields >> s.q[i]))
        throw MalformedLine(line_no, "expected " + std::to_string(kJointCount) + " joint values");
    std::string extra;
    if (fields >> extra) throw MalformedLine(line_no, "trailing field '" + extra + "'");
    out.push_back(s);
  }
  return out;
}

inline std::string format_joint_record(const JointState& s) {
  std::ostringstream out;
  out.precision(17);
  out << s.timestamp_s;
  for (double v : s.q) out << ' ' << v;
  return out.str();
}

}  // namespace graspcap::kinematics
