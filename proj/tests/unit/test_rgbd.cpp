#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "graspcap/rgbd/image_io.hpp"
#include "graspcap/rgbd/ply.hpp"
#include "graspcap/rgbd/point_cloud.hpp"
#include "synth.hpp"

using namespace graspcap;
using namespace graspcap::rgbd;

namespace {

RGBDFrame flat_frame(std::size_t w, std::size_t h, std::uint16_t depth_mm, Intrinsics k) {
  RGBDFrame f;
  f.intrinsics = k;
  f.color_width = f.depth_width = w;
  f.color_height = f.depth_height = h;
  f.color.assign(w * h, Rgb{10, 20, 30});
  f.depth.assign(w * h, depth_mm);
  return f;
}

Intrinsics vga() { return {525.0, 525.0, 319.5, 239.5, 640, 480}; }

PointCloud random_cloud(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<float> u(-5.0f, 5.0f);
  std::uniform_int_distribution<int> c(0, 255);
  PointCloud cloud;
  for (std::size_t i = 0; i < n; ++i)
    cloud.push_back(Vec3(u(rng), u(rng), u(rng)),
                    Rgb{std::uint8_t(c(rng)), std::uint8_t(c(rng)), std::uint8_t(c(rng))});
  return cloud;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("graspcap_rgbd_" + name)).string();
}

}  // namespace

TEST(PointCloudTest, PrincipalPointBackProjectsOnAxis) {
  auto f = flat_frame(640, 480, 0, vga());
  // Principal point 319.5 lies between pixels; use an integral one instead.
  f.intrinsics.cx = 320;
  f.intrinsics.cy = 240;
  f.depth[240 * 640 + 320] = 1000;
  const auto c = to_point_cloud(f);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c.points[0], Vec3(0, 0, 1));
  EXPECT_EQ(c.colors[0], (Rgb{10, 20, 30}));
}

TEST(PointCloudTest, CornerPixelExample) {
  auto f = flat_frame(640, 480, 0, vga());
  f.depth[0] = 2000;
  const auto c = to_point_cloud(f);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_NEAR(c.points[0].x(), -319.5 * 2.0 / 525.0, 1e-12);
  EXPECT_NEAR(c.points[0].y(), -239.5 * 2.0 / 525.0, 1e-12);
  EXPECT_EQ(c.points[0].z(), 2.0);
}

TEST(PointCloudTest, ZeroDepthGivesEmptyCloud) {
  EXPECT_TRUE(to_point_cloud(flat_frame(640, 480, 0, vga())).empty());
}

TEST(PointCloudTest, ProjectionInvertsBackProjection) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> d(1, 8000);
  auto f = flat_frame(64, 48, 0, {60.0, 61.0, 31.5, 23.5, 64, 48});
  for (auto& v : f.depth) v = std::uint16_t(d(rng) % 5 == 0 ? 0 : d(rng));
  const auto c = to_point_cloud(f);
  std::size_t expect = 0;
  for (auto v : f.depth) expect += v != 0;
  ASSERT_EQ(c.size(), expect);
  std::size_t i = 0;
  for (std::size_t v = 0; v < 48; ++v)
    for (std::size_t u = 0; u < 64; ++u) {
      if (f.depth[v * 64 + u] == 0) continue;
      const auto px = f.intrinsics.project(c.points[i]);
      EXPECT_NEAR(px[0], double(u), 1e-9);
      EXPECT_NEAR(px[1], double(v), 1e-9);
      EXPECT_EQ(c.points[i].z(), f.depth[v * 64 + u] / 1000.0);
      ++i;
    }
}

TEST(PointCloudTest, DimensionChecks) {
  auto f = flat_frame(640, 480, 1000, vga());
  f.color_width = 320;
  EXPECT_THROW(to_point_cloud(f), DimensionMismatch);
  auto g = flat_frame(640, 480, 1000, vga());
  g.intrinsics.fx = 0;
  EXPECT_THROW(to_point_cloud(g), PreconditionViolation);
  auto h = flat_frame(640, 480, 1000, vga());
  h.depth.pop_back();
  EXPECT_THROW(to_point_cloud(h), DimensionMismatch);
}

TEST(PointCloudTest, CropKeepsPointsInsideClosedBox) {
  std::mt19937_64 rng(5);
  const auto cloud = random_cloud(rng, 2000);
  const Box3 box{Vec3(-1, -2, -3), Vec3(1, 2, 3)};
  const auto in = crop_cloud(cloud, box);
  std::size_t expect = 0;
  for (const auto& p : cloud.points) expect += box.contains(p);
  EXPECT_EQ(in.size(), expect);
  for (const auto& p : in.points) EXPECT_TRUE(box.contains(p));
  PointCloud edge;
  edge.push_back(Vec3(1, 2, 3), {});
  EXPECT_EQ(crop_cloud(edge, box).size(), 1u);
  EXPECT_THROW(crop_cloud(cloud, Box3{Vec3(1, 0, 0), Vec3(0, 0, 0)}), PreconditionViolation);
}

TEST(PointCloudTest, TransformPreservesColorsAndDistances) {
  std::mt19937_64 rng(6);
  const auto cloud = random_cloud(rng, 100);
  const auto t = synth::random_transform(rng);
  const auto moved = transform_cloud(cloud, t);
  EXPECT_EQ(moved.colors, cloud.colors);
  for (std::size_t i = 1; i < cloud.size(); ++i)
    EXPECT_NEAR((moved.points[i] - moved.points[0]).norm(), (cloud.points[i] - cloud.points[0]).norm(), 1e-12);
}

TEST(Ply, BinaryRoundTripIsExactForFloat32) {
  std::mt19937_64 rng(7);
  for (std::size_t n : {0u, 1u, 1000u}) {
    const auto cloud = random_cloud(rng, n);
    const auto bytes = encode_ply(cloud);
    EXPECT_EQ(decode_ply(std::vector<unsigned char>(bytes.begin(), bytes.end())), cloud);
  }
}

TEST(Ply, AsciiRoundTripIsExactForFloat32) {
  std::mt19937_64 rng(8);
  const auto cloud = random_cloud(rng, 500);
  const auto text = encode_ply_ascii(cloud);
  EXPECT_EQ(decode_ply(std::vector<unsigned char>(text.begin(), text.end())), cloud);
}

TEST(Ply, AcceptsAnyPropertyOrderAndComments) {
  const std::string text =
      "ply\r\nformat ascii 1.0\r\ncomment made by hand\r\nelement vertex 2\r\nproperty uchar red\r\n"
      "property float z\r\nproperty uchar green\r\nproperty float x\r\nproperty uchar blue\r\nproperty float y\r\n"
      "end_header\r\n1 0.5 2 1.5 3 2.5\r\n4 -1 5 -2 6 -3\r\n";
  const auto c = decode_ply(std::vector<unsigned char>(text.begin(), text.end()));
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c.points[0], Vec3(1.5, 2.5, 0.5));
  EXPECT_EQ(c.colors[1], (Rgb{4, 5, 6}));
}

TEST(Ply, RejectsOtherProfiles) {
  auto reject = [](const std::string& s) {
    EXPECT_THROW(decode_ply(std::vector<unsigned char>(s.begin(), s.end())), UnsupportedPlyProfile) << s;
  };
  reject("ply\nformat binary_big_endian 1.0\nelement vertex 0\nend_header\n");
  reject("ply\nformat ascii 1.0\nelement face 0\nend_header\n");
  reject("ply\nformat ascii 1.0\nelement vertex 0\nproperty double x\nend_header\n");
  reject("ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\nproperty float z\n"
         "property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n1 2\n");
  reject("PLY\n");
  reject("ply\nformat ascii 1.0\n");
}

TEST(Ply, FileRoundTrip) {
  std::mt19937_64 rng(9);
  const auto cloud = random_cloud(rng, 64);
  const auto path = temp_path("cloud.ply");
  write_ply(cloud, path);
  EXPECT_EQ(read_ply(path), cloud);
  std::filesystem::remove(path);
  EXPECT_THROW(read_ply("/nonexistent/x.ply"), IoFailure);
}

TEST(ImageIo, NetpbmRoundTrip) {
  DepthImage d{3, 2, {0, 1, 256, 1000, 65535, 7}};
  ColorImage c{3, 2, {{1, 2, 3}, {4, 5, 6}, {7, 8, 9}, {10, 11, 12}, {13, 14, 15}, {255, 0, 128}}};
  const auto dp = temp_path("d.pgm"), cp = temp_path("c.ppm");
  write_depth_pgm(d, dp);
  write_color_ppm(c, cp);
  const auto d2 = read_depth_pgm(dp);
  const auto c2 = read_color(cp);
  EXPECT_EQ(d2.pixels, d.pixels);
  EXPECT_EQ(c2.pixels, c.pixels);
  EXPECT_EQ(c2.width, 3u);
  EXPECT_THROW(read_depth_pgm(cp), UnsupportedImage);
  std::filesystem::remove(dp);
  std::filesystem::remove(cp);
}

TEST(ImageIo, IntrinsicsSchema) {
  EXPECT_NO_THROW(parse_intrinsics({{"fx", 525}, {"fy", 525}, {"cx", 319.5}, {"cy", 239.5}, {"width", 640}, {"height", 480}}));
  EXPECT_THROW(parse_intrinsics({{"fx", 525}}), SchemaViolation);
  EXPECT_THROW(parse_intrinsics({{"fx", -1}, {"fy", 525}, {"cx", 319.5}, {"cy", 239.5}, {"width", 640}, {"height", 480}}),
               PreconditionViolation);
}

TEST(PointCloudTest, OffAxisPixelExample) {
  Intrinsics k{500.0, 500.0, 480.0, 240.0, 1000, 480};
  auto f = flat_frame(1000, 480, 0, k);
  f.depth[240 * 1000 + 980] = 1000;
  const auto c = to_point_cloud(f);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c.points[0], Vec3(1.0, 0.0, 1.0));
}

TEST(PointCloudTest, CropIdentityAndZeroVolumeBox) {
  std::mt19937_64 rng(10);
  const auto cloud = random_cloud(rng, 300);
  EXPECT_EQ(crop_cloud(cloud, Box3::bounding(cloud.points)), cloud);
  const Vec3 p = cloud.points[17];
  const auto one = crop_cloud(cloud, Box3{p, p});
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one.points[0], p);
  EXPECT_EQ(one.colors[0], cloud.colors[17]);
}

TEST(PointCloudTest, HalfSpaceCropMatchesBruteForce) {
  std::mt19937_64 rng(11);
  const auto cloud = random_cloud(rng, 5000);
  const double inf = std::numeric_limits<double>::infinity();
  const auto out = crop_cloud(cloud, Box3{Vec3(0.3, -inf, -inf), Vec3(inf, inf, inf)});
  std::size_t count = 0;
  for (const auto& p : cloud.points) count += p.x() >= 0.3;
  EXPECT_EQ(out.size(), count);
}

TEST(Ply, ThreePointAndLargeRoundTrips) {
  PointCloud three;
  three.push_back(Vec3(0.1f, -2.5f, 3.0e-7f), Rgb{1, 2, 3});
  three.push_back(Vec3(1e10f, 0.0f, -0.0f), Rgb{255, 255, 255});
  three.push_back(Vec3(-1.17549435e-38f, 3.4028235e38f, 1.0f), Rgb{0, 0, 0});
  const auto b3 = encode_ply(three);
  EXPECT_EQ(decode_ply(std::vector<unsigned char>(b3.begin(), b3.end())), three);

  std::mt19937_64 rng(12);
  const auto big = random_cloud(rng, 100000);
  const auto bytes = encode_ply(big);
  EXPECT_EQ(decode_ply(std::vector<unsigned char>(bytes.begin(), bytes.end())), big);
}
