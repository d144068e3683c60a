#pragma once

#include <array>
#include <fstream>
#include <iterator>
#include <string>

#include <nlohmann/json.hpp>

#include "graspcap/core/error.hpp"
#include "graspcap/core/rigid_transform.hpp"

// Shared structured-text helpers. A transform is written as
//   {"m": [r00, r01, r02, r10, r11, r12, r20, r21, r22, tx, ty, tz], "scale": s}
// i.e. 12 numbers, row-major rotation then translation, plus the scale.

namespace graspcap {

using Json = nlohmann::json;

inline Json transform_to_json(const RigidTransform& t) {
  return Json{{"m", t.to_row_major()}, {"scale", t.scale}};
}

inline RigidTransform transform_from_json(const Json& j) {
  try {
    const auto m = j.at("m").get<std::array<double, 12>>();
    const double scale = j.contains("scale") ? j.at("scale").get<double>() : 1.0;
    RigidTransform t = RigidTransform::from_row_major(m, scale);
    if (!t.is_valid(1e-6)) throw SchemaViolation("transform is not a proper rotation with positive scale");
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaViolation(std::string("transform: ") + e.what());
  }
}

inline Vec3 vec3_from_json(const Json& j) {
  const auto a = j.get<std::array<double, 3>>();
  return {a[0], a[1], a[2]};
}

inline Json vec3_to_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaViolation(path + ": " + e.what());
  }
}

inline RigidTransform read_transform_file(const std::string& path) {
  return transform_from_json(read_json_file(path));
}

}  // namespace graspcap
