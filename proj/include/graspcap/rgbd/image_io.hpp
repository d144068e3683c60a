#pragma once

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "graspcap/core/error.hpp"
#include "graspcap/rgbd/point_cloud.hpp"

#ifdef GRASPCAP_WITH_PNG
#include <png.h>
#endif

namespace graspcap::rgbd {

template <typename Pixel>
struct Image {
  std::size_t width = 0, height = 0;
  std::vector<Pixel> pixels;
};

using DepthImage = Image<std::uint16_t>;
using ColorImage = Image<Rgb>;

namespace detail {

inline std::vector<unsigned char> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void spit(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoFailure("short write to " + path);
}

struct NetpbmHeader {
  std::string magic;
  std::size_t width = 0, height = 0, maxval = 0;
  std::size_t data_offset = 0;
};

inline NetpbmHeader parse_netpbm_header(const std::vector<unsigned char>& b) {
  NetpbmHeader h;
  std::size_t pos = 0;
  auto skip_ws = [&] {
    while (pos < b.size()) {
      if (b[pos] == '#') {
        while (pos < b.size() && b[pos] != '\n') ++pos;
      } else if (std::isspace(b[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto token = [&] {
    skip_ws();
    std::string t;
    while (pos < b.size() && !std::isspace(b[pos]) && b[pos] != '#') t += static_cast<char>(b[pos++]);
    return t;
  };
  auto number = [&] {
    const std::string t = token();
    if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos)
      throw UnsupportedImage("bad netpbm header field '" + t + "'");
    return static_cast<std::size_t>(std::stoull(t));
  };
  h.magic = token();
  h.width = number();
  h.height = number();
  h.maxval = number();
  if (pos >= b.size() || !std::isspace(b[pos])) throw UnsupportedImage("truncated netpbm header");
  h.data_offset = pos + 1;
  return h;
}

}  // namespace detail

/// 16-bit binary PGM (P5, maxval 65535), millimetres.
inline DepthImage read_depth_pgm(const std::string& path) {
  const auto bytes = detail::slurp(path);
  const auto h = detail::parse_netpbm_header(bytes);
  if (h.magic != "P5" || h.maxval != 65535)
    throw UnsupportedImage(path + ": expected 16-bit P5 PGM");
  DepthImage img{h.width, h.height, {}};
  const std::size_t n = h.width * h.height;
  if (bytes.size() < h.data_offset + 2 * n) throw UnsupportedImage(path + ": truncated pixel data");
  img.pixels.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    img.pixels[i] = static_cast<std::uint16_t>((bytes[h.data_offset + 2 * i] << 8) |
                                               bytes[h.data_offset + 2 * i + 1]);
  return img;
}

inline void write_depth_pgm(const DepthImage& img, const std::string& path) {
  std::string out = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n65535\n";
  for (auto v : img.pixels) {
    out.push_back(static_cast<char>(v >> 8));
    out.push_back(static_cast<char>(v & 0xff));
  }
  detail::spit(path, out);
}

inline ColorImage read_color_ppm(const std::string& path) {
  const auto bytes = detail::slurp(path);
  const auto h = detail::parse_netpbm_header(bytes);
  if (h.magic != "P6" || h.maxval != 255) throw UnsupportedImage(path + ": expected 8-bit P6 PPM");
  ColorImage img{h.width, h.height, {}};
  const std::size_t n = h.width * h.height;
  if (bytes.size() < h.data_offset + 3 * n) throw UnsupportedImage(path + ": truncated pixel data");
  img.pixels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned char* p = bytes.data() + h.data_offset + 3 * i;
    img.pixels[i] = {p[0], p[1], p[2]};
  }
  return img;
}

inline void write_color_ppm(const ColorImage& img, const std::string& path) {
  std::string out = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  for (const auto& c : img.pixels) {
    out.push_back(static_cast<char>(c.r));
    out.push_back(static_cast<char>(c.g));
    out.push_back(static_cast<char>(c.b));
  }
  detail::spit(path, out);
}

#ifdef GRASPCAP_WITH_PNG
inline ColorImage read_color_png(const std::string& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str()))
    throw UnsupportedImage(path + ": " + image.message);
  image.format = PNG_FORMAT_RGB;
  std::vector<unsigned char> buf(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw UnsupportedImage(path + ": " + msg);
  }
  ColorImage img{image.width, image.height, {}};
  img.pixels.resize(img.width * img.height);
  for (std::size_t i = 0; i < img.pixels.size(); ++i)
    img.pixels[i] = {buf[3 * i], buf[3 * i + 1], buf[3 * i + 2]};
  return img;
}
#endif

/// PPM always; PNG when built with libpng. Chosen by file magic.
inline ColorImage read_color(const std::string& path) {
  const auto head = detail::slurp(path);
  if (head.size() >= 2 && head[0] == 'P' && head[1] == '6') return read_color_ppm(path);
  if (head.size() >= 8 && head[0] == 0x89 && head[1] == 'P' && head[2] == 'N' && head[3] == 'G') {
#ifdef GRASPCAP_WITH_PNG
    return read_color_png(path);
#else
    throw UnsupportedImage(path + ": PNG support not compiled in");
#endif
  }
  throw UnsupportedImage(path + ": unrecognised color image format");
}

/// Intrinsics file: a JSON object {"fx","fy","cx","cy","width","height"}.
inline Intrinsics parse_intrinsics(const nlohmann::json& j) {
  Intrinsics k;
  try {
    k.fx = j.at("fx").get<double>();
    k.fy = j.at("fy").get<double>();
    k.cx = j.at("cx").get<double>();
    k.cy = j.at("cy").get<double>();
    k.width = j.at("width").get<std::size_t>();
    k.height = j.at("height").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaViolation(std::string("intrinsics: ") + e.what());
  }
  k.validate();
  return k;
}

inline Intrinsics read_intrinsics(const std::string& path) {
  const auto bytes = detail::slurp(path);
  try {
    return parse_intrinsics(nlohmann::json::parse(bytes.begin(), bytes.end()));
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaViolation(path + ": " + e.what());
  }
}

inline RGBDFrame make_frame(const Intrinsics& k, ColorImage color, DepthImage depth,
                            double timestamp_s = 0.0) {
  RGBDFrame f;
  f.intrinsics = k;
  f.color_width = color.width;
  f.color_height = color.height;
  f.color = std::move(color.pixels);
  f.depth_width = depth.width;
  f.depth_height = depth.height;
  f.depth = std::move(depth.pixels);
  f.timestamp_s = timestamp_s;
  return f;
}

}  // namespace graspcap::rgbd
