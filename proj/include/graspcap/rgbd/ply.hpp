#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <sstream>
#include <string>
#include <vector>

#include "graspcap/core/error.hpp"
#include "graspcap/rgbd/image_io.hpp"
#include "graspcap/rgbd/point_cloud.hpp"

// PLY profile: a single `vertex` element carrying x, y, z as float32 and
// red, green, blue as uchar, in any property order. Read accepts `ascii 1.0`
// and `binary_little_endian 1.0`; write always emits binary little endian
// with properties in the order x y z red green blue.

namespace graspcap::rgbd {

static_assert(std::endian::native == std::endian::little, "PLY writer assumes a little-endian host");

namespace detail {

enum class PlyField { X, Y, Z, R, G, B };

struct PlyLayout {
  bool binary = false;
  std::size_t vertices = 0;
  std::vector<PlyField> fields;
  std::size_t body_offset = 0;
};

inline PlyLayout parse_ply_header(const std::vector<unsigned char>& bytes) {
  PlyLayout layout;
  std::size_t pos = 0;
  auto next_line = [&]() -> std::string {
    const std::size_t start = pos;
    while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    if (pos >= bytes.size()) throw UnsupportedPlyProfile("header not terminated by end_header");
    std::string line(bytes.begin() + static_cast<std::ptrdiff_t>(start),
                     bytes.begin() + static_cast<std::ptrdiff_t>(pos));
    ++pos;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  };
  if (next_line() != "ply") throw UnsupportedPlyProfile("missing 'ply' magic");
  bool have_format = false, in_vertex = false, seen_vertex = false;
  std::array<int, 6> seen{};
  for (;;) {
    std::istringstream line(next_line());
    std::string word;
    line >> word;
    if (word.empty() || word == "comment" || word == "obj_info") continue;
    if (word == "end_header") break;
    if (word == "format") {
      std::string fmt, version;
      line >> fmt >> version;
      if (version != "1.0") throw UnsupportedPlyProfile("PLY version " + version);
      if (fmt == "ascii") layout.binary = false;
      else if (fmt == "binary_little_endian") layout.binary = true;
      else throw UnsupportedPlyProfile("format " + fmt);
      have_format = true;
    } else if (word == "element") {
      std::string name;
      std::size_t count = 0;
      line >> name >> count;
      if (name != "vertex" || seen_vertex)
        throw UnsupportedPlyProfile("unsupported element '" + name + "'");
      layout.vertices = count;
      in_vertex = seen_vertex = true;
    } else if (word == "property") {
      if (!in_vertex) throw UnsupportedPlyProfile("property outside vertex element");
      std::string type, name;
      line >> type >> name;
      PlyField field;
      bool is_float;
      if (name == "x") field = PlyField::X, is_float = true;
      else if (name == "y") field = PlyField::Y, is_float = true;
      else if (name == "z") field = PlyField::Z, is_float = true;
      else if (name == "red") field = PlyField::R, is_float = false;
      else if (name == "green") field = PlyField::G, is_float = false;
      else if (name == "blue") field = PlyField::B, is_float = false;
      else throw UnsupportedPlyProfile("unsupported property '" + name + "'");
      const bool ok = is_float ? (type == "float" || type == "float32")
                               : (type == "uchar" || type == "uint8");
      if (!ok) throw UnsupportedPlyProfile("property " + name + " has type " + type);
      if (seen[static_cast<int>(field)]++) throw UnsupportedPlyProfile("duplicate property " + name);
      layout.fields.push_back(field);
    } else {
      throw UnsupportedPlyProfile("unexpected header line '" + word + "'");
    }
  }
  if (!have_format) throw UnsupportedPlyProfile("missing format line");
  if (!seen_vertex) throw UnsupportedPlyProfile("missing vertex element");
  for (int s : seen)
    if (s != 1) throw UnsupportedPlyProfile("vertex element must carry x y z red green blue");
  layout.body_offset = pos;
  return layout;
}

inline void assign(Vec3& p, Rgb& c, PlyField f, double v) {
  switch (f) {
    case PlyField::X: p.x() = v; break;
    case PlyField::Y: p.y() = v; break;
    case PlyField::Z: p.z() = v; break;
    case PlyField::R: c.r = static_cast<std::uint8_t>(v); break;
    case PlyField::G: c.g = static_cast<std::uint8_t>(v); break;
    case PlyField::B: c.b = static_cast<std::uint8_t>(v); break;
  }
}

}  // namespace detail

inline PointCloud decode_ply(const std::vector<unsigned char>& bytes) {
  const auto layout = detail::parse_ply_header(bytes);
  PointCloud cloud;
  cloud.points.resize(layout.vertices);
  cloud.colors.resize(layout.vertices);
  if (layout.binary) {
    std::size_t stride = 0;
    for (auto f : layout.fields) stride += f <= detail::PlyField::Z ? 4 : 1;
    if (bytes.size() < layout.body_offset + stride * layout.vertices)
      throw UnsupportedPlyProfile("binary body shorter than declared vertex count");
    const unsigned char* p = bytes.data() + layout.body_offset;
    for (std::size_t i = 0; i < layout.vertices; ++i) {
      for (auto f : layout.fields) {
        if (f <= detail::PlyField::Z) {
          float v;
          std::memcpy(&v, p, 4);
          p += 4;
          detail::assign(cloud.points[i], cloud.colors[i], f, v);
        } else {
          detail::assign(cloud.points[i], cloud.colors[i], f, *p++);
        }
      }
    }
  } else {
    std::istringstream body(std::string(bytes.begin() + static_cast<std::ptrdiff_t>(layout.body_offset),
                                        bytes.end()));
    for (std::size_t i = 0; i < layout.vertices; ++i) {
      for (auto f : layout.fields) {
        if (f <= detail::PlyField::Z) {
          float v;
          if (!(body >> v)) throw UnsupportedPlyProfile("ascii body: bad coordinate at vertex " + std::to_string(i));
          detail::assign(cloud.points[i], cloud.colors[i], f, v);
        } else {
          int v;
          if (!(body >> v) || v < 0 || v > 255)
            throw UnsupportedPlyProfile("ascii body: bad color at vertex " + std::to_string(i));
          detail::assign(cloud.points[i], cloud.colors[i], f, v);
        }
      }
    }
  }
  return cloud;
}

/// Binary little-endian encoding. Coordinates are narrowed to float32.
inline std::string encode_ply(const PointCloud& cloud) {
  require(cloud.points.size() == cloud.colors.size(), "points and colors differ in length");
  std::string out = "ply\nformat binary_little_endian 1.0\nelement vertex " +
                    std::to_string(cloud.size()) +
                    "\nproperty float x\nproperty float y\nproperty float z\n"
                    "property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n";
  const std::size_t header = out.size();
  out.resize(header + 15 * cloud.size());
  char* p = out.data() + header;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (int k = 0; k < 3; ++k) {
      const auto v = static_cast<float>(cloud.points[i][k]);
      std::memcpy(p, &v, 4);
      p += 4;
    }
    *p++ = static_cast<char>(cloud.colors[i].r);
    *p++ = static_cast<char>(cloud.colors[i].g);
    *p++ = static_cast<char>(cloud.colors[i].b);
  }
  return out;
}

/// ASCII encoding; float32 values printed with enough digits to round-trip.
inline std::string encode_ply_ascii(const PointCloud& cloud) {
  std::ostringstream out;
  out << "ply\nformat ascii 1.0\nelement vertex " << cloud.size()
      << "\nproperty float x\nproperty float y\nproperty float z\n"
         "property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n";
  out.precision(9);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    out << static_cast<float>(cloud.points[i].x()) << ' ' << static_cast<float>(cloud.points[i].y())
        << ' ' << static_cast<float>(cloud.points[i].z()) << ' ' << int(cloud.colors[i].r) << ' '
        << int(cloud.colors[i].g) << ' ' << int(cloud.colors[i].b) << '\n';
  }
  return out.str();
}

inline void write_ply(const PointCloud& cloud, const std::string& path) {
  detail::spit(path, encode_ply(cloud));
}

inline PointCloud read_ply(const std::string& path) { return decode_ply(detail::slurp(path)); }

}  // namespace graspcap::rgbd
