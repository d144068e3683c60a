#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "graspcap/core/error.hpp"
#include "graspcap/core/json_io.hpp"
#include "graspcap/core/rigid_transform.hpp"

namespace graspcap::kinematics {

/// Axis-aligned box centred on the origin; `extents` are full side lengths.
struct BoxShape {
  Vec3 extents = Vec3::Ones();

  friend bool operator==(const BoxShape& a, const BoxShape& b) { return a.extents == b.extents; }
};

/// Cylinder along the local z axis, centred on the origin.
struct CylinderShape {
  double radius = 0.0;
  double height = 0.0;

  friend bool operator==(const CylinderShape&, const CylinderShape&) = default;
};

struct SphereShape {
  double radius = 0.0;

  friend bool operator==(const SphereShape&, const SphereShape&) = default;
};

/// Triangle mesh. `closed` is set by make_mesh when every edge is shared by
/// exactly two consistently oriented triangles.
struct MeshShape {
  Points vertices;
  std::vector<std::array<int, 3>> triangles;
  bool closed = false;

  friend bool operator==(const MeshShape&, const MeshShape&) = default;
};

using Shape = std::variant<BoxShape, CylinderShape, SphereShape, MeshShape>;

struct ObjectModel {
  std::string name;
  Shape shape;
  RigidTransform pose;  // object frame -> working frame

  friend bool operator==(const ObjectModel&, const ObjectModel&) = default;
};

inline MeshShape make_mesh(Points vertices, std::vector<std::array<int, 3>> triangles) {
  MeshShape m{std::move(vertices), std::move(triangles), false};
  std::map<std::pair<int, int>, int> directed;
  for (const auto& t : m.triangles) {
    for (int k = 0; k < 3; ++k) {
      const int a = t[k], b = t[(k + 1) % 3];
      if (a < 0 || b < 0 || a >= static_cast<int>(m.vertices.size()) || b >= static_cast<int>(m.vertices.size()))
        throw SchemaViolation("mesh triangle references a missing vertex");
      ++directed[{a, b}];
    }
  }
  bool closed = !m.triangles.empty();
  for (const auto& [edge, count] : directed) {
    const auto twin = directed.find({edge.second, edge.first});
    if (count != 1 || twin == directed.end() || twin->second != 1) {
      closed = false;
      break;
    }
  }
  m.closed = closed;
  return m;
}

namespace detail {

inline double box_sdf(const BoxShape& b, const Vec3& p) {
  const Vec3 q = p.cwiseAbs() - b.extents / 2.0;
  return q.cwiseMax(0.0).norm() + std::min(q.maxCoeff(), 0.0);
}

inline double cylinder_sdf(const CylinderShape& c, const Vec3& p) {
  const double dr = std::hypot(p.x(), p.y()) - c.radius;
  const double dz = std::abs(p.z()) - c.height / 2.0;
  return std::min(std::max(dr, dz), 0.0) + std::hypot(std::max(dr, 0.0), std::max(dz, 0.0));
}

/// Closest point on triangle abc to p (Ericson, Real-Time Collision Detection 5.1.5).
inline Vec3 closest_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0 && d2 <= 0) return a;
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0 && d4 <= d3) return b;
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) return a + (d1 / (d1 - d3)) * ab;
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0 && d5 <= d6) return c;
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) return a + (d2 / (d2 - d6)) * ac;
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

/// Solid angle of triangle abc seen from p (Van Oosterom & Strackee).
inline double solid_angle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ra = a - p, rb = b - p, rc = c - p;
  const double la = ra.norm(), lb = rb.norm(), lc = rc.norm();
  const double num = ra.dot(rb.cross(rc));
  const double den = la * lb * lc + ra.dot(rb) * lc + rb.dot(rc) * la + rc.dot(ra) * lb;
  return 2.0 * std::atan2(num, den);
}

inline double mesh_sdf(const MeshShape& m, const Vec3& p) {
  if (!m.closed) throw OpenMesh("signed distance requested on a mesh that is not closed and oriented");
  double best = std::numeric_limits<double>::infinity();
  double winding = 0.0;
  for (const auto& t : m.triangles) {
    const Vec3& a = m.vertices[t[0]];
    const Vec3& b = m.vertices[t[1]];
    const Vec3& c = m.vertices[t[2]];
    best = std::min(best, (closest_on_triangle(p, a, b, c) - p).squaredNorm());
    winding += solid_angle(p, a, b, c);
  }
  const double d = std::sqrt(best);
  return winding / (4.0 * std::numbers::pi) > 0.5 ? -d : d;
}

}  // namespace detail

/// Signed distance in the object's own frame; negative inside.
inline double local_signed_distance(const Shape& shape, const Vec3& p) {
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, BoxShape>) return detail::box_sdf(s, p);
        else if constexpr (std::is_same_v<T, CylinderShape>) return detail::cylinder_sdf(s, p);
        else if constexpr (std::is_same_v<T, SphereShape>) return p.norm() - s.radius;
        else return detail::mesh_sdf(s, p);
      },
      shape);
}

/// Signed distance from a working-frame point to the object surface.
inline double signed_distance(const ObjectModel& object, const Vec3& p) {
  return local_signed_distance(object.shape, object.pose.inverse()(p));
}

/// Outward unit normal direction of the distance field at p (central differences).
inline Vec3 sdf_gradient(const ObjectModel& object, const Vec3& p, double h = 1e-6) {
  Vec3 g;
  for (int k = 0; k < 3; ++k) {
    Vec3 dp = Vec3::Zero();
    dp[k] = h;
    g[k] = signed_distance(object, p + dp) - signed_distance(object, p - dp);
  }
  const double n = g.norm();
  if (n == 0.0) return Vec3::UnitZ();
  return g / n;
}

/// Half-size of the object's bounding box in its own frame.
inline Vec3 local_half_extents(const Shape& shape) {
  return std::visit(
      [](const auto& s) -> Vec3 {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, BoxShape>) return s.extents / 2.0;
        else if constexpr (std::is_same_v<T, CylinderShape>) return {s.radius, s.radius, s.height / 2.0};
        else if constexpr (std::is_same_v<T, SphereShape>) return Vec3::Constant(s.radius);
        else {
          Vec3 m = Vec3::Zero();
          for (const auto& v : s.vertices) m = m.cwiseMax(v.cwiseAbs());
          return m;
        }
      },
      shape);
}

/// Diagonal length of the bounding box in the object frame.
inline double bounding_box_diagonal(const ObjectModel& object) {
  if (const auto* mesh = std::get_if<MeshShape>(&object.shape)) {
    Vec3 mn = Vec3::Constant(std::numeric_limits<double>::infinity()), mx = -mn;
    for (const auto& v : mesh->vertices) {
      mn = mn.cwiseMin(v);
      mx = mx.cwiseMax(v);
    }
    return mesh->vertices.empty() ? 0.0 : (mx - mn).norm();
  }
  return 2.0 * local_half_extents(object.shape).norm();
}

inline bool shape_is_valid(const Shape& shape) {
  return std::visit(
      [](const auto& s) -> bool {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, BoxShape>) return (s.extents.array() > 0).all();
        else if constexpr (std::is_same_v<T, CylinderShape>) return s.radius > 0 && s.height > 0;
        else if constexpr (std::is_same_v<T, SphereShape>) return s.radius > 0;
        else return !s.triangles.empty();
      },
      shape);
}

/// Area-weighted pseudo-random samples on the object surface in the working
/// frame. Deterministic for a given seed.
inline Points sample_object_surface(const ObjectModel& object, double density, unsigned seed = 0) {
  require(density > 0.0, "sampling density must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Points local;
  auto count = [&](double area) { return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(density * area))); };

  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, BoxShape>) {
          const Vec3 h = s.extents / 2.0;
          for (int axis = 0; axis < 3; ++axis) {
            const int a1 = (axis + 1) % 3, a2 = (axis + 2) % 3;
            const std::size_t n = count(s.extents[a1] * s.extents[a2]);
            for (double sign : {-1.0, 1.0})
              for (std::size_t i = 0; i < n; ++i) {
                Vec3 p;
                p[axis] = sign * h[axis];
                p[a1] = (2 * u(rng) - 1) * h[a1];
                p[a2] = (2 * u(rng) - 1) * h[a2];
                local.push_back(p);
              }
          }
        } else if constexpr (std::is_same_v<T, CylinderShape>) {
          const std::size_t side = count(2 * std::numbers::pi * s.radius * s.height);
          for (std::size_t i = 0; i < side; ++i) {
            const double phi = 2 * std::numbers::pi * u(rng);
            local.emplace_back(s.radius * std::cos(phi), s.radius * std::sin(phi), (u(rng) - 0.5) * s.height);
          }
          const std::size_t cap = count(std::numbers::pi * s.radius * s.radius);
          for (double sign : {-1.0, 1.0})
            for (std::size_t i = 0; i < cap; ++i) {
              const double r = s.radius * std::sqrt(u(rng)), phi = 2 * std::numbers::pi * u(rng);
              local.emplace_back(r * std::cos(phi), r * std::sin(phi), sign * s.height / 2);
            }
        } else if constexpr (std::is_same_v<T, SphereShape>) {
          const std::size_t n = count(4 * std::numbers::pi * s.radius * s.radius);
          for (std::size_t i = 0; i < n; ++i) {
            const double z = 2 * u(rng) - 1, phi = 2 * std::numbers::pi * u(rng);
            const double r = std::sqrt(std::max(0.0, 1 - z * z));
            local.push_back(s.radius * Vec3(r * std::cos(phi), r * std::sin(phi), z));
          }
        } else {
          for (const auto& t : s.triangles) {
            const Vec3 &a = s.vertices[t[0]], &b = s.vertices[t[1]], &c = s.vertices[t[2]];
            const std::size_t n = count(0.5 * (b - a).cross(c - a).norm());
            for (std::size_t i = 0; i < n; ++i) {
              double r1 = u(rng), r2 = u(rng);
              if (r1 + r2 > 1) r1 = 1 - r1, r2 = 1 - r2;
              local.push_back(a + r1 * (b - a) + r2 * (c - a));
            }
          }
        }
      },
      object.shape);
  return object.pose.apply(local);
}

// Object description (JSON):
//   {"name": "...", "shape": "box", "extents": [x, y, z], "pose": <transform>}
//   {"name": "...", "shape": "cylinder", "radius": r, "height": h, "pose": ...}
//   {"name": "...", "shape": "sphere", "radius": r, "pose": ...}
//   {"name": "...", "shape": "mesh", "vertices": [[x, y, z], ...],
//    "triangles": [[i, j, k], ...], "pose": ...}
// Triangles are counter-clockwise seen from outside.

inline Json object_to_json(const ObjectModel& o) {
  Json j{{"name", o.name}, {"pose", transform_to_json(o.pose)}};
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, BoxShape>) {
          j["shape"] = "box";
          j["extents"] = vec3_to_json(s.extents);
        } else if constexpr (std::is_same_v<T, CylinderShape>) {
          j["shape"] = "cylinder";
          j["radius"] = s.radius;
          j["height"] = s.height;
        } else if constexpr (std::is_same_v<T, SphereShape>) {
          j["shape"] = "sphere";
          j["radius"] = s.radius;
        } else {
          j["shape"] = "mesh";
          Json verts = Json::array();
          for (const auto& v : s.vertices) verts.push_back(vec3_to_json(v));
          j["vertices"] = verts;
          j["triangles"] = s.triangles;
        }
      },
      o.shape);
  return j;
}

inline ObjectModel object_from_json(const Json& j) {
  ObjectModel o;
  try {
    o.name = j.at("name").get<std::string>();
    const auto shape = j.at("shape").get<std::string>();
    if (shape == "box") o.shape = BoxShape{vec3_from_json(j.at("extents"))};
    else if (shape == "cylinder") o.shape = CylinderShape{j.at("radius").get<double>(), j.at("height").get<double>()};
    else if (shape == "sphere") o.shape = SphereShape{j.at("radius").get<double>()};
    else if (shape == "mesh") {
      Points verts;
      for (const auto& v : j.at("vertices")) verts.push_back(vec3_from_json(v));
      o.shape = make_mesh(std::move(verts), j.at("triangles").get<std::vector<std::array<int, 3>>>());
    } else {
      throw SchemaViolation("object '" + o.name + "': unknown shape '" + shape + "'");
    }
    o.pose = j.contains("pose") ? transform_from_json(j.at("pose")) : RigidTransform{};
  } catch (const nlohmann::json::exception& e) {
    throw SchemaViolation(std::string("object: ") + e.what());
  }
  if (!shape_is_valid(o.shape)) throw SchemaViolation("object '" + o.name + "' has non-positive dimensions");
  return o;
}

inline ObjectModel load_object(const std::string& path) { return object_from_json(read_json_file(path)); }

}  // namespace graspcap::kinematics
