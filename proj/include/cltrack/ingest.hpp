#pragma once

#include <algorithm>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cltrack/association.hpp"
#include "cltrack/errors.hpp"
#include "cltrack/geometry.hpp"
#include "cltrack/text.hpp"

namespace cltrack
{

struct Detection2D
{
  int frame = 0;
  Box2D box;
  double score = 0.0;
  std::string category;
};

struct Detection3D
{
  int frame = 0;
  Box3D box;
  double score = 0.0;
  std::string category;
};

/// Per-frame detection lists indexed by frame; frames without detections are empty.
template <typename Detection>
using FrameDetections = std::vector<std::vector<Detection>>;

enum class Source { camera_only, lidar_only, fused };

inline const char * to_string(Source s)
{
  switch (s) {
    case Source::camera_only: return "camera-only";
    case Source::lidar_only: return "lidar-only";
    case Source::fused: return "fused";
  }
  return "?";
}

/// One unified object of a frame. `det2d_index` / `det3d_index` name the
/// contributing detections within the frame's input lists.
struct Observation
{
  std::optional<Box2D> box2d;
  std::optional<Box3D> box3d;
  double score = 0.0;
  std::string category;
  Source source = Source::camera_only;
  std::optional<std::size_t> det2d_index;
  std::optional<std::size_t> det3d_index;
};

namespace detail
{

template <typename Detection, typename LineParser>
FrameDetections<Detection> parse_frames(std::istream & in, LineParser && parse_line)
{
  FrameDetections<Detection> frames;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (text::is_ignorable(raw)) {
      continue;
    }
    Detection det = parse_line(text::split_fields(raw), line_no);
    if (static_cast<std::size_t>(det.frame) >= frames.size()) {
      frames.resize(static_cast<std::size_t>(det.frame) + 1);
    }
    frames[static_cast<std::size_t>(det.frame)].push_back(std::move(det));
  }
  return frames;
}

inline int parse_frame(std::string_view field, std::size_t line)
{
  const auto frame = text::to_int<int>(field);
  if (!frame) {
    throw ParseError("bad frame index '" + std::string(field) + "'", line);
  }
  if (*frame < 0) {
    throw ParseError("negative frame index " + std::to_string(*frame), line);
  }
  return *frame;
}

inline double parse_number(std::string_view field, std::size_t line)
{
  const auto v = text::to_double(field);
  if (!v || !std::isfinite(*v)) {
    throw ParseError("not a finite number: '" + std::string(field) + "'", line);
  }
  return *v;
}

}  // namespace detail

/// Format: `frame category score left top right bottom` per line.
inline FrameDetections<Detection2D> parse_detections_2d(std::istream & in)
{
  return detail::parse_frames<Detection2D>(
    in, [](const std::vector<std::string_view> & f, std::size_t line) {
      if (f.size() != 7) {
        throw ParseError(
          "2D detection needs 7 fields (frame category score left top right bottom), got " +
            std::to_string(f.size()),
          line);
      }
      Detection2D d;
      d.frame = detail::parse_frame(f[0], line);
      d.category = std::string(f[1]);
      d.score = detail::parse_number(f[2], line);
      d.box = {
        detail::parse_number(f[3], line), detail::parse_number(f[4], line),
        detail::parse_number(f[5], line), detail::parse_number(f[6], line)};
      if (!d.box.valid()) {
        throw ParseError("2D box must satisfy left < right and top < bottom", line);
      }
      return d;
    });
}

/// Format: `frame category score h w l x y z yaw` per line, camera rectified
/// coordinates. (x, y, z) is the bottom-face center as in KITTI labels; it is
/// stored as the geometric center (y shifted up by h/2).
inline FrameDetections<Detection3D> parse_detections_3d(std::istream & in)
{
  return detail::parse_frames<Detection3D>(
    in, [](const std::vector<std::string_view> & f, std::size_t line) {
      if (f.size() != 10) {
        throw ParseError(
          "3D detection needs 10 fields (frame category score h w l x y z yaw), got " +
            std::to_string(f.size()),
          line);
      }
      Detection3D d;
      d.frame = detail::parse_frame(f[0], line);
      d.category = std::string(f[1]);
      d.score = detail::parse_number(f[2], line);
      Box3D & b = d.box;
      b.height = detail::parse_number(f[3], line);
      b.width = detail::parse_number(f[4], line);
      b.length = detail::parse_number(f[5], line);
      b.center_x = detail::parse_number(f[6], line);
      b.center_y = detail::parse_number(f[7], line) - 0.5 * b.height;
      b.center_z = detail::parse_number(f[8], line);
      b.yaw = wrap_angle(detail::parse_number(f[9], line));
      if (!b.valid()) {
        throw ParseError("3D box dimensions must be positive", line);
      }
      return d;
    });
}

/// Pairs 3D detections (projected through `calib`) with 2D detections of the
/// same category by greedy best IoU, each detection used at most once, pairs
/// below `iou_gate` rejected. Output order: one observation per 2D detection
/// in input order (fused when paired), then the unpaired 3D detections.
inline std::vector<Observation> unify(
  std::span<const Detection2D> frame_2d, std::span<const Detection3D> frame_3d,
  const Calibration & calib, double iou_gate, std::optional<ImageSize> image = std::nullopt)
{
  AssociationMatrix iou(frame_3d.size(), frame_2d.size(), 0.0);
  for (std::size_t i = 0; i < frame_3d.size(); ++i) {
    const auto projected = project_box3d(frame_3d[i].box, calib, image);
    if (!projected) {
      continue;
    }
    for (std::size_t j = 0; j < frame_2d.size(); ++j) {
      if (frame_3d[i].category != frame_2d[j].category) {
        continue;
      }
      const double v = iou_2d(*projected, frame_2d[j].box);
      iou(i, j) = v >= iou_gate ? v : 0.0;
    }
  }
  const AssignmentResult pairs = greedy_assign(iou, iou_gate);

  std::vector<std::optional<std::size_t>> partner_of_2d(frame_2d.size());
  for (const auto & m : pairs.matches) {
    partner_of_2d[m.track] = m.observation;
  }

  std::vector<Observation> out;
  out.reserve(frame_2d.size() + pairs.unmatched_observations.size());
  for (std::size_t j = 0; j < frame_2d.size(); ++j) {
    Observation obs;
    obs.box2d = frame_2d[j].box;
    obs.score = frame_2d[j].score;
    obs.category = frame_2d[j].category;
    obs.det2d_index = j;
    obs.source = Source::camera_only;
    if (const auto i = partner_of_2d[j]) {
      obs.box3d = frame_3d[*i].box;
      obs.score = std::max(obs.score, frame_3d[*i].score);
      obs.det3d_index = *i;
      obs.source = Source::fused;
    }
    out.push_back(std::move(obs));
  }
  for (const std::size_t i : pairs.unmatched_observations) {
    Observation obs;
    obs.box3d = frame_3d[i].box;
    obs.score = frame_3d[i].score;
    obs.category = frame_3d[i].category;
    obs.det3d_index = i;
    obs.source = Source::lidar_only;
    out.push_back(std::move(obs));
  }
  return out;
}

/// Mono-detector mode: LiDAR-only observations without a 2D box gain one by
/// projection (source stays lidar-only). Camera-only observations pass through.
inline std::vector<Observation> mono_detector_expand(
  std::vector<Observation> observations, const Calibration & calib,
  std::optional<ImageSize> image = std::nullopt)
{
  for (auto & obs : observations) {
    if (obs.source == Source::lidar_only && obs.box3d && !obs.box2d) {
      obs.box2d = project_box3d(*obs.box3d, calib, image);
    }
  }
  return observations;
}

}  // namespace cltrack
