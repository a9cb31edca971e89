#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "cltrack/errors.hpp"
#include "cltrack/text.hpp"

namespace cltrack
{

/// Axis-aligned image rectangle in pixels.
struct Box2D
{
  double left = 0.0;
  double top = 0.0;
  double right = 0.0;
  double bottom = 0.0;

  double width() const { return right - left; }
  double height() const { return bottom - top; }
  double area() const { return width() * height(); }

  bool valid() const
  {
    return std::isfinite(left) && std::isfinite(top) && std::isfinite(right) &&
           std::isfinite(bottom) && left < right && top < bottom;
  }

  bool operator==(const Box2D &) const = default;
};

/// Oriented cuboid in rectified camera coordinates (x right, y down, z forward).
/// The center is the geometric center of the cuboid. `length` runs along the
/// object's heading (camera x at yaw 0), `width` along camera z at yaw 0,
/// `height` along y. Yaw rotates about the camera y axis.
struct Box3D
{
  double center_x = 0.0;
  double center_y = 0.0;
  double center_z = 0.0;
  double height = 1.0;
  double width = 1.0;
  double length = 1.0;
  double yaw = 0.0;

  Eigen::Vector3d center() const { return {center_x, center_y, center_z}; }

  bool valid() const
  {
    const bool finite = std::isfinite(center_x) && std::isfinite(center_y) &&
                        std::isfinite(center_z) && std::isfinite(height) &&
                        std::isfinite(width) && std::isfinite(length) && std::isfinite(yaw);
    return finite && height > 0.0 && width > 0.0 && length > 0.0 &&
           yaw >= -std::numbers::pi && yaw <= std::numbers::pi;
  }

  bool operator==(const Box3D &) const = default;
};

struct ImageSize
{
  int width = 0;
  int height = 0;
};

/// Wraps an angle into [-pi, pi].
inline double wrap_angle(double angle)
{
  if (angle >= -std::numbers::pi && angle <= std::numbers::pi) {
    return angle;
  }
  angle = std::remainder(angle, 2.0 * std::numbers::pi);
  return std::clamp(angle, -std::numbers::pi, std::numbers::pi);
}

/// Camera model of one KITTI tracking sequence.
struct Calibration
{
  using Matrix34 = Eigen::Matrix<double, 3, 4>;

  Matrix34 projection = Matrix34::Zero();
  Eigen::Matrix3d rectification = Eigen::Matrix3d::Identity();
  Matrix34 lidar_to_camera = Matrix34::Identity();

  /// Pinhole camera with principal point (cx, cy) and focal length f.
  static Calibration pinhole(double focal, double cx, double cy)
  {
    Calibration calib;
    calib.projection << focal, 0.0, cx, 0.0,  //
      0.0, focal, cy, 0.0,                     //
      0.0, 0.0, 1.0, 0.0;
    return calib;
  }

  bool valid() const
  {
    const Eigen::Matrix3d gram = rectification * rectification.transpose();
    return projection.allFinite() && rectification.allFinite() && lidar_to_camera.allFinite() &&
           (gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= 1e-6 &&
           projection(0, 0) != 0.0 && projection(1, 1) != 0.0;
  }

  /// LiDAR-frame point to rectified camera coordinates.
  Eigen::Vector3d lidar_to_rectified(const Eigen::Vector3d & point) const
  {
    return rectification * (lidar_to_camera.leftCols<3>() * point + lidar_to_camera.col(3));
  }
};

/// Intersection over union. Touching or disjoint boxes give 0.
inline double iou_2d(const Box2D & a, const Box2D & b)
{
  const double iw = std::min(a.right, b.right) - std::max(a.left, b.left);
  const double ih = std::min(a.bottom, b.bottom) - std::max(a.top, b.top);
  if (iw <= 0.0 || ih <= 0.0) {
    return 0.0;
  }
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? std::clamp(inter / uni, 0.0, 1.0) : 0.0;
}

inline double centroid_distance_3d(const Box3D & a, const Box3D & b)
{
  return (a.center() - b.center()).norm();
}

/// The 8 cuboid corners. Corner k uses sign +1/-1 on the half-length for bit 0,
/// the half-height for bit 1 and the half-width for bit 2 (bit set means +),
/// rotated by yaw about the y axis and translated to the center:
///   0: (-l,-h,-w)  1: (+l,-h,-w)  2: (-l,+h,-w)  3: (+l,+h,-w)
///   4: (-l,-h,+w)  5: (+l,-h,+w)  6: (-l,+h,+w)  7: (+l,+h,+w)
inline std::array<Eigen::Vector3d, 8> box3d_corners(const Box3D & b)
{
  const double c = std::cos(b.yaw);
  const double s = std::sin(b.yaw);
  std::array<Eigen::Vector3d, 8> corners;
  for (int k = 0; k < 8; ++k) {
    const double x = ((k & 1) ? 0.5 : -0.5) * b.length;
    const double y = ((k & 2) ? 0.5 : -0.5) * b.height;
    const double z = ((k & 4) ? 0.5 : -0.5) * b.width;
    corners[k] = Eigen::Vector3d(c * x + s * z + b.center_x, y + b.center_y, -s * x + c * z + b.center_z);
  }
  return corners;
}

/// Image rectangle spanned by the projected corners. Returns nullopt when any
/// corner lies at or behind the camera plane, or when clipping to `image`
/// leaves nothing (object outside the frustum).
inline std::optional<Box2D> project_box3d(
  const Box3D & b, const Calibration & calib, std::optional<ImageSize> image = std::nullopt)
{
  double min_u = std::numeric_limits<double>::infinity();
  double min_v = min_u;
  double max_u = -min_u;
  double max_v = -min_u;
  for (const auto & corner : box3d_corners(b)) {
    const Eigen::Vector3d uvw = calib.projection.leftCols<3>() * corner + calib.projection.col(3);
    if (corner.z() <= 0.0 || uvw.z() <= 0.0) {
      return std::nullopt;
    }
    const double u = uvw.x() / uvw.z();
    const double v = uvw.y() / uvw.z();
    min_u = std::min(min_u, u);
    max_u = std::max(max_u, u);
    min_v = std::min(min_v, v);
    max_v = std::max(max_v, v);
  }
  Box2D out{min_u, min_v, max_u, max_v};
  if (image) {
    out.left = std::clamp(out.left, 0.0, static_cast<double>(image->width));
    out.right = std::clamp(out.right, 0.0, static_cast<double>(image->width));
    out.top = std::clamp(out.top, 0.0, static_cast<double>(image->height));
    out.bottom = std::clamp(out.bottom, 0.0, static_cast<double>(image->height));
  }
  if (!out.valid()) {
    return std::nullopt;
  }
  return out;
}

namespace detail
{

template <int Rows, int Cols>
Eigen::Matrix<double, Rows, Cols> read_matrix(
  const std::vector<std::string_view> & fields, std::size_t line)
{
  if (fields.size() != 1 + Rows * Cols) {
    throw ParseError(
      "expected " + std::to_string(Rows * Cols) + " values after '" + std::string(fields[0]) + "'",
      line);
  }
  Eigen::Matrix<double, Rows, Cols> m;
  for (int r = 0; r < Rows; ++r) {
    for (int c = 0; c < Cols; ++c) {
      const auto value = text::to_double(fields[1 + r * Cols + c]);
      if (!value) {
        throw ParseError("not a number: '" + std::string(fields[1 + r * Cols + c]) + "'", line);
      }
      m(r, c) = *value;
    }
  }
  return m;
}

}  // namespace detail

/// Reads a KITTI tracking calibration file. P2 is required; R_rect (or R0_rect)
/// and Tr_velo_cam (or Tr_velo_to_cam) default to identity when absent.
/// Other entries (P0, P1, P3, Tr_imu_velo) are ignored.
inline Calibration parse_calibration(std::istream & in)
{
  Calibration calib;
  bool have_projection = false;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (text::is_ignorable(raw)) {
      continue;
    }
    const auto fields = text::split_fields(raw);
    std::string_view key = fields[0];
    if (!key.empty() && key.back() == ':') {
      key.remove_suffix(1);
    }
    if (key == "P2") {
      calib.projection = detail::read_matrix<3, 4>(fields, line_no);
      have_projection = true;
    } else if (key == "R_rect" || key == "R0_rect") {
      calib.rectification = detail::read_matrix<3, 3>(fields, line_no);
    } else if (key == "Tr_velo_cam" || key == "Tr_velo_to_cam") {
      calib.lidar_to_camera = detail::read_matrix<3, 4>(fields, line_no);
    }
  }
  if (!have_projection) {
    throw ParseError("calibration has no P2 entry", 0);
  }
  if (!calib.valid()) {
    throw DataError("calibration: rectification not orthonormal or projection has zero focal length");
  }
  return calib;
}

/// Writes the entries `parse_calibration` reads, KITTI tracking spelling.
inline void write_calibration(std::ostream & out, const Calibration & calib)
{
  auto row = [&out](const char * name, const auto & m) {
    out << name;
    for (int r = 0; r < m.rows(); ++r) {
      for (int c = 0; c < m.cols(); ++c) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), " %.12e", m(r, c));
        out << buf;
      }
    }
    out << '\n';
  };
  row("P2:", calib.projection);
  row("R_rect", calib.rectification);
  row("Tr_velo_cam", calib.lidar_to_camera);
}

}  // namespace cltrack
