#include <gtest/gtest.h>

#include <numbers>
#include <random>
#include <sstream>

#include "cltrack/geometry.hpp"

using namespace cltrack;

namespace
{

Box2D random_box(std::mt19937_64 & rng)
{
  std::uniform_real_distribution<double> pos(-50.0, 50.0);
  std::uniform_real_distribution<double> ext(0.5, 40.0);
  const double l = pos(rng);
  const double t = pos(rng);
  return {l, t, l + ext(rng), t + ext(rng)};
}

Box3D random_box3d(std::mt19937_64 & rng)
{
  std::uniform_real_distribution<double> pos(-20.0, 20.0);
  std::uniform_real_distribution<double> dim(0.5, 5.0);
  std::uniform_real_distribution<double> yaw(-std::numbers::pi, std::numbers::pi);
  return {pos(rng), pos(rng), pos(rng), dim(rng), dim(rng), dim(rng), yaw(rng)};
}

}  // namespace

TEST(Iou2d, IdentityDisjointAndHalfOverlap)
{
  const Box2D a{0, 0, 10, 10};
  EXPECT_DOUBLE_EQ(iou_2d(a, a), 1.0);
  EXPECT_DOUBLE_EQ(iou_2d(a, {20, 20, 30, 30}), 0.0);
  // overlap 50, union 150
  EXPECT_DOUBLE_EQ(iou_2d(a, {5, 0, 15, 10}), 1.0 / 3.0);
}

TEST(Iou2d, TouchingEdgesIsZero)
{
  EXPECT_EQ(iou_2d({0, 0, 10, 10}, {10, 0, 20, 10}), 0.0);
  EXPECT_EQ(iou_2d({0, 0, 10, 10}, {0, 10, 10, 20}), 0.0);
}

TEST(Iou2d, RandomizedProperties)
{
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> shift(-100.0, 100.0);
  for (int k = 0; k < 5000; ++k) {
    const Box2D a = random_box(rng);
    const Box2D b = random_box(rng);
    const double v = iou_2d(a, b);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    EXPECT_EQ(v, iou_2d(b, a));
    EXPECT_DOUBLE_EQ(iou_2d(a, a), 1.0);
    const double dx = shift(rng);
    const double dy = shift(rng);
    const Box2D as{a.left + dx, a.top + dy, a.right + dx, a.bottom + dy};
    const Box2D bs{b.left + dx, b.top + dy, b.right + dx, b.bottom + dy};
    EXPECT_NEAR(iou_2d(as, bs), v, 1e-9);
  }
}

TEST(CentroidDistance, Examples)
{
  Box3D a;
  Box3D b;
  EXPECT_EQ(centroid_distance_3d(a, b), 0.0);
  b.center_x = 3;
  b.center_y = 4;
  EXPECT_DOUBLE_EQ(centroid_distance_3d(a, b), 5.0);
  a = Box3D{1, 2, 3, 1, 1, 1, 0};
  b = Box3D{4, 6, 15, 1, 1, 1, 0};
  EXPECT_DOUBLE_EQ(centroid_distance_3d(a, b), 13.0);
}

TEST(CentroidDistance, SymmetricAndTriangleInequality)
{
  std::mt19937_64 rng(11);
  for (int k = 0; k < 2000; ++k) {
    const Box3D a = random_box3d(rng);
    const Box3D b = random_box3d(rng);
    const Box3D c = random_box3d(rng);
    EXPECT_EQ(centroid_distance_3d(a, b), centroid_distance_3d(b, a));
    EXPECT_LE(centroid_distance_3d(a, c), centroid_distance_3d(a, b) + centroid_distance_3d(b, c) + 1e-12);
  }
}

TEST(BoxCorners, UnitCubeAtOrigin)
{
  const auto corners = box3d_corners(Box3D{0, 0, 0, 1, 1, 1, 0});
  for (int k = 0; k < 8; ++k) {
    EXPECT_DOUBLE_EQ(std::abs(corners[k].x()), 0.5);
    EXPECT_DOUBLE_EQ(std::abs(corners[k].y()), 0.5);
    EXPECT_DOUBLE_EQ(std::abs(corners[k].z()), 0.5);
    EXPECT_EQ(corners[k].x() > 0, (k & 1) != 0);
    EXPECT_EQ(corners[k].y() > 0, (k & 2) != 0);
    EXPECT_EQ(corners[k].z() > 0, (k & 4) != 0);
  }
}

TEST(BoxCorners, YawPiNegatesXZ)
{
  const Box3D b0{0, 0, 0, 1.5, 1.0, 3.0, 0.0};
  Box3D bpi = b0;
  bpi.yaw = std::numbers::pi;
  const auto c0 = box3d_corners(b0);
  const auto cpi = box3d_corners(bpi);
  for (int k = 0; k < 8; ++k) {
    EXPECT_NEAR(cpi[k].x(), -c0[k].x(), 1e-12);
    EXPECT_NEAR(cpi[k].y(), c0[k].y(), 1e-12);
    EXPECT_NEAR(cpi[k].z(), -c0[k].z(), 1e-12);
  }
}

TEST(BoxCorners, QuarterTurnSwapsFootprint)
{
  // length 2 along x, width 1 along z at yaw 0; rotating by pi/2 about y maps
  // (x, z) -> (z, -x), so the footprint spans 1 in x and 2 in z.
  const auto c = box3d_corners(Box3D{0, 0, 0, 1.0, 1.0, 2.0, std::numbers::pi / 2});
  double min_x = 1e9, max_x = -1e9, min_z = 1e9, max_z = -1e9;
  for (const auto & p : c) {
    min_x = std::min(min_x, p.x());
    max_x = std::max(max_x, p.x());
    min_z = std::min(min_z, p.z());
    max_z = std::max(max_z, p.z());
  }
  EXPECT_NEAR(max_x - min_x, 1.0, 1e-12);
  EXPECT_NEAR(max_z - min_z, 2.0, 1e-12);
  // corner 1 is (+l/2, -h/2, -w/2) = (1, -0.5, -0.5) before rotation
  EXPECT_NEAR(c[1].x(), -0.5, 1e-12);
  EXPECT_NEAR(c[1].z(), -1.0, 1e-12);
}

TEST(BoxCorners, YawEqualsRotationOfYawZeroCorners)
{
  std::mt19937_64 rng(3);
  for (int k = 0; k < 500; ++k) {
    Box3D b = random_box3d(rng);
    const double yaw = b.yaw;
    Box3D b0 = b;
    b0.yaw = 0.0;
    const Eigen::Matrix3d R = Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitY()).toRotationMatrix();
    const auto cy = box3d_corners(b);
    const auto c0 = box3d_corners(b0);
    for (int i = 0; i < 8; ++i) {
      const Eigen::Vector3d expected = R * (c0[i] - b.center()) + b.center();
      EXPECT_LT((cy[i] - expected).norm(), 1e-9);
    }
  }
}

TEST(ProjectBox3d, PinholeSymmetryAndScaling)
{
  const auto calib = Calibration::pinhole(700.0, 600.0, 180.0);
  const Box3D near{0, 0, 10, 1.5, 1.6, 4.0, 0.0};
  const auto p10 = project_box3d(near, calib);
  ASSERT_TRUE(p10);
  EXPECT_NEAR(0.5 * (p10->left + p10->right), 600.0, 1e-9);
  EXPECT_NEAR(0.5 * (p10->top + p10->bottom), 180.0, 1e-9);

  // Doubling every depth-related quantity halves the projected extent.
  const Box3D far{0, 0, 20, 1.5, 3.2, 4.0, 0.0};
  const auto p20 = project_box3d(far, calib);
  ASSERT_TRUE(p20);
  EXPECT_NEAR(p20->width(), 0.5 * p10->width(), 1e-9);
  EXPECT_NEAR(p20->height(), 0.5 * p10->height(), 1e-9);
}

TEST(ProjectBox3d, DepthScalingProperty)
{
  // Scaling the whole box (center and extents) by 2 about the camera leaves the
  // projection unchanged; moving only the center depth by 2x with the depth
  // extent scaled too halves the image extent.
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::uniform_real_distribution<double> depth(8.0, 30.0);
  const auto calib = Calibration::pinhole(721.5, 609.5, 172.8);
  for (int k = 0; k < 200; ++k) {
    const Box3D b{u(rng), u(rng), depth(rng), 1.5, 1.7, 4.0, 0.0};
    const Box3D b2{b.center_x, b.center_y, 2.0 * b.center_z, b.height, 2.0 * b.width, b.length, 0.0};
    const auto p1 = project_box3d(b, calib);
    const auto p2 = project_box3d(b2, calib);
    ASSERT_TRUE(p1 && p2);
    // Image extents relative to the principal point scale by 1/2.
    EXPECT_NEAR(p2->left - 609.5, 0.5 * (p1->left - 609.5), 1e-9);
    EXPECT_NEAR(p2->right - 609.5, 0.5 * (p1->right - 609.5), 1e-9);
    EXPECT_NEAR(p2->top - 172.8, 0.5 * (p1->top - 172.8), 1e-9);
    EXPECT_NEAR(p2->bottom - 172.8, 0.5 * (p1->bottom - 172.8), 1e-9);
  }
}

TEST(ProjectBox3d, BehindCamera)
{
  const auto calib = Calibration::pinhole(700.0, 600.0, 180.0);
  EXPECT_FALSE(project_box3d(Box3D{0, 0, -5, 1, 1, 1, 0}, calib));
  // straddling the camera plane counts as behind
  EXPECT_FALSE(project_box3d(Box3D{0, 0, 0.2, 1, 1, 1, 0}, calib));
}

TEST(ProjectBox3d, ClipsToImageAndRejectsOffImage)
{
  const auto calib = Calibration::pinhole(700.0, 600.0, 180.0);
  const ImageSize image{1200, 360};
  const auto partial = project_box3d(Box3D{8, 0, 10, 1.5, 1.6, 4.0, 0}, calib, image);
  ASSERT_TRUE(partial);
  EXPECT_EQ(partial->right, 1200.0);
  EXPECT_FALSE(project_box3d(Box3D{40, 0, 10, 1.5, 1.6, 4.0, 0}, calib, image));
  // without image bounds the same box projects off to the side
  EXPECT_TRUE(project_box3d(Box3D{40, 0, 10, 1.5, 1.6, 4.0, 0}, calib));
}

TEST(Calibration, ParsesKittiTrackingLayout)
{
  std::istringstream in(
    "P0: 7.215377e+02 0.000000e+00 6.095593e+02 0.000000e+00 0.000000e+00 7.215377e+02 1.728540e+02 0.000000e+00 0.000000e+00 0.000000e+00 1.000000e+00 0.000000e+00\n"
    "P2: 7.215377e+02 0.000000e+00 6.095593e+02 4.485728e+01 0.000000e+00 7.215377e+02 1.728540e+02 2.163791e-01 0.000000e+00 0.000000e+00 1.000000e+00 2.745884e-03\n"
    "R_rect 9.999239e-01 9.837760e-03 -7.445048e-03 -9.869795e-03 9.999421e-01 -4.278459e-03 7.402527e-03 4.351614e-03 9.999631e-01\n"
    "Tr_velo_cam 7.533745e-03 -9.999714e-01 -6.166020e-04 -4.069766e-03 1.480249e-02 7.280733e-04 -9.998902e-01 -7.631618e-02 9.998621e-01 7.523790e-03 1.480755e-02 -2.717806e-01\n"
    "Tr_imu_velo 9.999976e-01 7.553071e-04 -2.035826e-03 -8.086759e-01 -7.854027e-04 9.998898e-01 -1.482298e-02 3.195559e-01 2.024406e-03 1.482454e-02 9.998881e-01 -7.997231e-01\n");
  const Calibration c = parse_calibration(in);
  EXPECT_DOUBLE_EQ(c.projection(0, 3), 44.85728);
  EXPECT_DOUBLE_EQ(c.rectification(0, 1), 9.837760e-03);
  EXPECT_DOUBLE_EQ(c.lidar_to_camera(2, 3), -2.717806e-01);
  EXPECT_TRUE(c.valid());
}

TEST(Calibration, AlternateSpellingsAndRoundTrip)
{
  std::istringstream in(
    "P2: 700 0 600 0 0 700 180 0 0 0 1 0\n"
    "R0_rect: 1 0 0 0 1 0 0 0 1\n"
    "Tr_velo_to_cam: 0 -1 0 0 0 0 -1 0 1 0 0 0\n");
  const Calibration c = parse_calibration(in);
  EXPECT_EQ(c.lidar_to_camera(0, 1), -1.0);
  // forward LiDAR axis maps to camera depth
  EXPECT_NEAR(c.lidar_to_rectified({10, 0, 0}).z(), 10.0, 1e-12);

  std::stringstream io;
  write_calibration(io, c);
  const Calibration back = parse_calibration(io);
  EXPECT_EQ(back.projection, c.projection);
  EXPECT_EQ(back.lidar_to_camera, c.lidar_to_camera);
}

TEST(Calibration, Errors)
{
  std::istringstream missing("R_rect 1 0 0 0 1 0 0 0 1\n");
  EXPECT_THROW(parse_calibration(missing), ParseError);
  std::istringstream short_row("P2: 1 2 3\n");
  try {
    parse_calibration(short_row);
    FAIL();
  } catch (const ParseError & e) {
    EXPECT_EQ(e.line(), 1u);
  }
  std::istringstream skewed("P2: 700 0 600 0 0 700 180 0 0 0 1 0\nR_rect 2 0 0 0 1 0 0 0 1\n");
  EXPECT_THROW(parse_calibration(skewed), DataError);
}
