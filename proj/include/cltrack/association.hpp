#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cltrack/errors.hpp"
#include "cltrack/geometry.hpp"

namespace cltrack
{

/// Dense row-major m x n score matrix. Rows are current observations, columns
/// are remembered tracks.
class AssociationMatrix
{
public:
  AssociationMatrix() = default;

  AssociationMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
  : rows_(rows), cols_(cols), data_(rows * cols, fill)
  {
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double & operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const double> values() const { return data_; }

  /// All entries finite and within [0, 1].
  bool valid() const
  {
    for (double v : data_) {
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        return false;
      }
    }
    return true;
  }

  bool operator==(const AssociationMatrix &) const = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct Match
{
  std::size_t observation = 0;
  std::size_t track = 0;
  double score = 0.0;

  bool operator==(const Match &) const = default;
};

struct AssignmentResult
{
  std::vector<Match> matches;
  std::vector<std::size_t> unmatched_observations;
  std::vector<std::size_t> unmatched_tracks;

  bool operator==(const AssignmentResult &) const = default;
};

/// Camera matrix: IoU when it reaches `a_c`, otherwise 0. A missing box on
/// either side yields 0, the camera no-match value.
inline AssociationMatrix build_camera_matrix(
  std::span<const std::optional<Box2D>> observations,
  std::span<const std::optional<Box2D>> predictions, double a_c)
{
  AssociationMatrix m(observations.size(), predictions.size(), 0.0);
  for (std::size_t i = 0; i < observations.size(); ++i) {
    if (!observations[i]) {
      continue;
    }
    for (std::size_t j = 0; j < predictions.size(); ++j) {
      if (!predictions[j]) {
        continue;
      }
      const double iou = iou_2d(*observations[i], *predictions[j]);
      m(i, j) = iou >= a_c ? iou : 0.0;
    }
  }
  return m;
}

/// LiDAR matrix, normalized: centroid distance / a_l when below a_l, else 1.
/// A missing box on either side yields 1, the normalized no-match value.
inline AssociationMatrix build_lidar_matrix(
  std::span<const std::optional<Box3D>> observations,
  std::span<const std::optional<Box3D>> predictions, double a_l)
{
  if (!(a_l > 0.0)) {
    throw ConfigError("a_l must be positive");
  }
  AssociationMatrix m(observations.size(), predictions.size(), 1.0);
  for (std::size_t i = 0; i < observations.size(); ++i) {
    if (!observations[i]) {
      continue;
    }
    for (std::size_t j = 0; j < predictions.size(); ++j) {
      if (!predictions[j]) {
        continue;
      }
      const double d = centroid_distance_3d(*observations[i], *predictions[j]);
      m(i, j) = d < a_l ? d / a_l : 1.0;
    }
  }
  return m;
}

/// Throws ConfigError unless both weights are in [0, 1] and sum to one.
inline void check_fusion_weights(double alpha_c, double alpha_l)
{
  const bool in_range = alpha_c >= 0.0 && alpha_c <= 1.0 && alpha_l >= 0.0 && alpha_l <= 1.0;
  if (!in_range || std::abs(alpha_c + alpha_l - 1.0) > 1e-9) {
    throw ConfigError(
      "fusion weights must lie in [0, 1] and sum to 1 (alpha_c=" + std::to_string(alpha_c) +
      ", alpha_l=" + std::to_string(alpha_l) + ")");
  }
}

/// Fused score alpha_c * camera + alpha_l * (1 - lidar); higher is better.
inline AssociationMatrix fuse(
  const AssociationMatrix & camera, const AssociationMatrix & lidar, double alpha_c, double alpha_l)
{
  if (camera.rows() != lidar.rows() || camera.cols() != lidar.cols()) {
    throw ContractViolation("fuse: camera and lidar matrices differ in shape");
  }
  check_fusion_weights(alpha_c, alpha_l);
  AssociationMatrix fused(camera.rows(), camera.cols());
  for (std::size_t i = 0; i < camera.rows(); ++i) {
    for (std::size_t j = 0; j < camera.cols(); ++j) {
      fused(i, j) = alpha_c * camera(i, j) + alpha_l * (1.0 - lidar(i, j));
    }
  }
  return fused;
}

/// 1 - lidar, entrywise: the score a LiDAR-only association uses.
inline AssociationMatrix complement(const AssociationMatrix & lidar)
{
  AssociationMatrix out(lidar.rows(), lidar.cols());
  for (std::size_t i = 0; i < lidar.rows(); ++i) {
    for (std::size_t j = 0; j < lidar.cols(); ++j) {
      out(i, j) = 1.0 - lidar(i, j);
    }
  }
  return out;
}

/// Repeatedly picks the largest remaining entry of `scores` and pairs its row
/// and column, until that maximum drops below `threshold`. Each pick rescans
/// the whole matrix, skipping used rows and columns. Ties go to the lowest
/// row, then the lowest column.
inline AssignmentResult greedy_assign(const AssociationMatrix & scores, double threshold)
{
  const std::size_t m = scores.rows();
  const std::size_t n = scores.cols();
  std::vector<bool> row_used(m, false);
  std::vector<bool> col_used(n, false);
  AssignmentResult result;

  while (true) {
    bool found = false;
    std::size_t best_i = 0;
    std::size_t best_j = 0;
    double best = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (row_used[i]) {
        continue;
      }
      for (std::size_t j = 0; j < n; ++j) {
        if (col_used[j]) {
          continue;
        }
        const double v = scores(i, j);
        if (!found || v > best) {
          found = true;
          best = v;
          best_i = i;
          best_j = j;
        }
      }
    }
    if (!found || !(best >= threshold)) {
      break;
    }
    row_used[best_i] = true;
    col_used[best_j] = true;
    result.matches.push_back({best_i, best_j, best});
  }

  for (std::size_t i = 0; i < m; ++i) {
    if (!row_used[i]) {
      result.unmatched_observations.push_back(i);
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (!col_used[j]) {
      result.unmatched_tracks.push_back(j);
    }
  }
  return result;
}

}  // namespace cltrack
