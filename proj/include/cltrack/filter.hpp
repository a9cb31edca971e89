#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cstddef>

#include "cltrack/geometry.hpp"

namespace cltrack
{

/// Noise parameters of one constant-acceleration filter. All per coordinate.
struct NoiseModel
{
  double measurement_variance = 1.0;  ///< R
  double jerk_intensity = 0.1;        ///< white-noise jerk spectral density driving Q
  double initial_variance = 1000.0;   ///< P0 for velocity and acceleration
};

/// Constant-acceleration Kalman filter over `Axes` independently moving
/// coordinates. Each coordinate carries (position, velocity, acceleration);
/// only positions are measured.
///
/// F, Q and R are block-diagonal with one identical 3x3 (1x1 for R) block per
/// coordinate and the initial covariance is block-diagonal as well, so the
/// joint covariance stays block-diagonal forever. The filter therefore keeps
/// one 3x3 block per coordinate; `covariance()` assembles the full matrix.
template <std::size_t Axes>
class KinematicState
{
public:
  static constexpr std::size_t kAxes = Axes;
  static constexpr std::size_t kDim = 3 * Axes;

  using Measurement = Eigen::Matrix<double, static_cast<int>(Axes), 1>;
  using StateVector = Eigen::Matrix<double, static_cast<int>(kDim), 1>;
  using Covariance = Eigen::Matrix<double, static_cast<int>(kDim), static_cast<int>(kDim)>;

  KinematicState() = default;

  /// Positions from the measurement, zero velocity and acceleration.
  /// Position variance R, velocity/acceleration variance P0.
  static KinematicState init(const Measurement & z, const NoiseModel & noise)
  {
    KinematicState s;
    s.noise_ = noise;
    for (std::size_t k = 0; k < Axes; ++k) {
      s.mean_[k] = Eigen::Vector3d(z(static_cast<int>(k)), 0.0, 0.0);
      s.cov_[k] = Eigen::Vector3d(
                    noise.measurement_variance, noise.initial_variance, noise.initial_variance)
                    .asDiagonal();
    }
    return s;
  }

  /// State from explicit per-coordinate (p, v, a) means and 3x3 covariances.
  static KinematicState from_moments(
    const std::array<Eigen::Vector3d, Axes> & means, const std::array<Eigen::Matrix3d, Axes> & covs,
    const NoiseModel & noise)
  {
    KinematicState s;
    s.noise_ = noise;
    s.mean_ = means;
    s.cov_ = covs;
    return s;
  }

  /// p += v dt + a dt^2 / 2, v += a dt, P = F P F^T + Q.
  void predict(double dt = 1.0)
  {
    const Eigen::Matrix3d F = transition(dt);
    const Eigen::Matrix3d Q = process_noise(dt, noise_.jerk_intensity);
    for (std::size_t k = 0; k < Axes; ++k) {
      mean_[k] = F * mean_[k];
      cov_[k] = F * cov_[k] * F.transpose() + Q;
    }
  }

  /// Position-only Kalman correction, then P = (P + P^T) / 2.
  void update(const Measurement & z)
  {
    const double r = noise_.measurement_variance;
    for (std::size_t k = 0; k < Axes; ++k) {
      Eigen::Vector3d & x = mean_[k];
      Eigen::Matrix3d & P = cov_[k];
      const double s = P(0, 0) + r;
      if (!(s > 0.0)) {
        // Prior and sensor are both exact; nothing to correct.
        continue;
      }
      const Eigen::Vector3d gain = P.col(0) / s;
      x += gain * (z(static_cast<int>(k)) - x(0));
      P -= gain * P.row(0);
      P = 0.5 * (P + P.transpose()).eval();
    }
  }

  Measurement positions() const
  {
    Measurement z;
    for (std::size_t k = 0; k < Axes; ++k) {
      z(static_cast<int>(k)) = mean_[k](0);
    }
    return z;
  }

  double position(std::size_t axis) const { return mean_[axis](0); }
  double velocity(std::size_t axis) const { return mean_[axis](1); }
  double acceleration(std::size_t axis) const { return mean_[axis](2); }

  /// Layout: (p, v, a) of coordinate 0, then coordinate 1, ...
  StateVector mean() const
  {
    StateVector x;
    for (std::size_t k = 0; k < Axes; ++k) {
      x.template segment<3>(static_cast<int>(3 * k)) = mean_[k];
    }
    return x;
  }

  Covariance covariance() const
  {
    Covariance P = Covariance::Zero();
    for (std::size_t k = 0; k < Axes; ++k) {
      P.template block<3, 3>(static_cast<int>(3 * k), static_cast<int>(3 * k)) = cov_[k];
    }
    return P;
  }

  const Eigen::Matrix3d & axis_covariance(std::size_t axis) const { return cov_[axis]; }
  const NoiseModel & noise() const { return noise_; }

  static Eigen::Matrix3d transition(double dt)
  {
    Eigen::Matrix3d F;
    F << 1.0, dt, 0.5 * dt * dt,  //
      0.0, 1.0, dt,                //
      0.0, 0.0, 1.0;
    return F;
  }

  /// Discretized continuous white-noise-jerk covariance for one coordinate.
  static Eigen::Matrix3d process_noise(double dt, double q)
  {
    const double dt2 = dt * dt;
    const double dt3 = dt2 * dt;
    Eigen::Matrix3d Q;
    Q << dt3 * dt2 / 20.0, dt2 * dt2 / 8.0, dt3 / 6.0,  //
      dt2 * dt2 / 8.0, dt3 / 3.0, dt2 / 2.0,             //
      dt3 / 6.0, dt2 / 2.0, dt;
    return q * Q;
  }

private:
  std::array<Eigen::Vector3d, Axes> mean_{};
  std::array<Eigen::Matrix3d, Axes> cov_{};
  NoiseModel noise_{};
};

namespace detail
{

inline constexpr double kMinExtent = 1e-6;

/// Sorted pair with at least kMinExtent separation.
inline std::pair<double, double> ordered(double a, double b)
{
  double lo = std::min(a, b);
  double hi = std::max(a, b);
  if (hi - lo < kMinExtent) {
    const double mid = 0.5 * (lo + hi);
    lo = mid - 0.5 * kMinExtent;
    hi = mid + 0.5 * kMinExtent;
  }
  return {lo, hi};
}

}  // namespace detail

/// 2D box filtered through its top-left and bottom-right corners.
class BoxState2D
{
public:
  using Filter = KinematicState<4>;

  static Filter::Measurement measure(const Box2D & b) { return {b.left, b.top, b.right, b.bottom}; }

  static BoxState2D init(const Box2D & b, const NoiseModel & noise)
  {
    BoxState2D s;
    s.filter_ = Filter::init(measure(b), noise);
    return s;
  }

  void predict(double dt = 1.0) { filter_.predict(dt); }
  void update(const Box2D & b) { filter_.update(measure(b)); }

  /// Decoded box, corners re-ordered so the box stays well formed.
  Box2D box() const
  {
    const auto z = filter_.positions();
    const auto [left, right] = detail::ordered(z(0), z(2));
    const auto [top, bottom] = detail::ordered(z(1), z(3));
    return {left, top, right, bottom};
  }

  const Filter & filter() const { return filter_; }

private:
  Filter filter_;
};

/// 3D box filtered through two opposite corners of the cuboid in its own
/// (unrotated) frame: center -/+ (length, height, width) / 2 along x, y, z.
/// Yaw is not filtered; the last measured value is carried.
class BoxState3D
{
public:
  using Filter = KinematicState<6>;

  static Filter::Measurement measure(const Box3D & b)
  {
    Filter::Measurement z;
    z << b.center_x - 0.5 * b.length, b.center_y - 0.5 * b.height, b.center_z - 0.5 * b.width,
      b.center_x + 0.5 * b.length, b.center_y + 0.5 * b.height, b.center_z + 0.5 * b.width;
    return z;
  }

  static BoxState3D init(const Box3D & b, const NoiseModel & noise)
  {
    BoxState3D s;
    s.filter_ = Filter::init(measure(b), noise);
    s.yaw_ = b.yaw;
    return s;
  }

  void predict(double dt = 1.0) { filter_.predict(dt); }

  void update(const Box3D & b)
  {
    filter_.update(measure(b));
    yaw_ = b.yaw;
  }

  Box3D box() const
  {
    const auto z = filter_.positions();
    const auto [x0, x1] = detail::ordered(z(0), z(3));
    const auto [y0, y1] = detail::ordered(z(1), z(4));
    const auto [z0, z1] = detail::ordered(z(2), z(5));
    Box3D b;
    b.center_x = 0.5 * (x0 + x1);
    b.center_y = 0.5 * (y0 + y1);
    b.center_z = 0.5 * (z0 + z1);
    b.length = x1 - x0;
    b.height = y1 - y0;
    b.width = z1 - z0;
    b.yaw = yaw_;
    return b;
  }

  double yaw() const { return yaw_; }
  const Filter & filter() const { return filter_; }

private:
  Filter filter_;
  double yaw_ = 0.0;
};

}  // namespace cltrack
