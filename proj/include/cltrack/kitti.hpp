#pragma once

#include <algorithm>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "cltrack/errors.hpp"
#include "cltrack/geometry.hpp"
#include "cltrack/memory.hpp"
#include "cltrack/text.hpp"

namespace cltrack
{

/// One reported object of one frame.
struct TrackEntry
{
  TrackId id = 0;
  std::string category;
  Box2D box2d;
  std::optional<Box3D> box3d;
  double score = 1.0;
  double truncated = -1.0;  ///< ground truth only; -1 when unknown
  int occluded = -1;        ///< ground truth only; -1 when unknown

  bool operator==(const TrackEntry &) const = default;
};

struct FrameResult
{
  int frame = 0;
  std::vector<TrackEntry> entries;

  bool operator==(const FrameResult &) const = default;
};

namespace kitti
{

inline constexpr double kMissingDimension = -1.0;
inline constexpr double kMissingLocation = -1000.0;
inline constexpr double kUnknownAngle = -10.0;

}  // namespace kitti

/// KITTI tracking format, one line per entry:
///   frame id type truncated occluded alpha left top right bottom h w l x y z yaw score
/// (x, y, z) is the bottom-face center. Entries without a 3D box get -1 dims,
/// -1000 location and -10 yaw. Lines are sorted by frame, then id.
inline void write_kitti(std::ostream & out, std::span<const FrameResult> results)
{
  std::vector<std::pair<int, const TrackEntry *>> rows;
  for (const auto & fr : results) {
    for (const auto & e : fr.entries) {
      rows.emplace_back(fr.frame, &e);
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto & a, const auto & b) {
    return a.first != b.first ? a.first < b.first : a.second->id < b.second->id;
  });

  using text::fixed6;
  for (const auto & [frame, e] : rows) {
    std::string line = std::to_string(frame) + ' ' + std::to_string(e->id) + ' ' + e->category +
                       ' ' + fixed6(e->truncated) + ' ' + std::to_string(e->occluded) + ' ' +
                       fixed6(kitti::kUnknownAngle) + ' ' + fixed6(e->box2d.left) + ' ' +
                       fixed6(e->box2d.top) + ' ' + fixed6(e->box2d.right) + ' ' +
                       fixed6(e->box2d.bottom) + ' ';
    if (e->box3d) {
      const Box3D & b = *e->box3d;
      line += fixed6(b.height) + ' ' + fixed6(b.width) + ' ' + fixed6(b.length) + ' ' +
              fixed6(b.center_x) + ' ' + fixed6(b.center_y + 0.5 * b.height) + ' ' +
              fixed6(b.center_z) + ' ' + fixed6(b.yaw);
    } else {
      line += fixed6(kitti::kMissingDimension) + ' ' + fixed6(kitti::kMissingDimension) + ' ' +
              fixed6(kitti::kMissingDimension) + ' ' + fixed6(kitti::kMissingLocation) + ' ' +
              fixed6(kitti::kMissingLocation) + ' ' + fixed6(kitti::kMissingLocation) + ' ' +
              fixed6(kitti::kUnknownAngle);
    }
    line += ' ' + fixed6(e->score) + '\n';
    out << line;
  }
}

/// Reads KITTI tracking results or labels (17 fields, or 18 with score).
/// `DontCare` rows and rows with negative id are skipped. The result holds one
/// FrameResult per frame from 0 to the largest frame seen.
inline std::vector<FrameResult> parse_kitti(std::istream & in)
{
  std::vector<FrameResult> frames;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (text::is_ignorable(raw)) {
      continue;
    }
    const auto f = text::split_fields(raw);
    if (f.size() != 17 && f.size() != 18) {
      throw ParseError("KITTI row needs 17 or 18 fields, got " + std::to_string(f.size()), line_no);
    }
    auto number = [&](std::size_t k) {
      const auto v = text::to_double(f[k]);
      if (!v) {
        throw ParseError("not a number: '" + std::string(f[k]) + "'", line_no);
      }
      return *v;
    };
    const auto frame = text::to_int<int>(f[0]);
    const auto id = text::to_int<TrackId>(f[1]);
    if (!frame || *frame < 0) {
      throw ParseError("bad frame index '" + std::string(f[0]) + "'", line_no);
    }
    if (!id) {
      throw ParseError("bad track id '" + std::string(f[1]) + "'", line_no);
    }
    if (static_cast<std::size_t>(*frame) >= frames.size()) {
      const auto old = frames.size();
      frames.resize(static_cast<std::size_t>(*frame) + 1);
      for (auto k = old; k < frames.size(); ++k) {
        frames[k].frame = static_cast<int>(k);
      }
    }
    if (f[2] == "DontCare" || *id < 0) {
      continue;
    }

    TrackEntry e;
    e.id = *id;
    e.category = std::string(f[2]);
    e.truncated = number(3);
    const auto occluded = text::to_int<int>(f[4]);
    if (!occluded) {
      throw ParseError("bad occlusion flag '" + std::string(f[4]) + "'", line_no);
    }
    e.occluded = *occluded;
    e.box2d = {number(6), number(7), number(8), number(9)};
    if (!e.box2d.valid()) {
      throw ParseError("2D box must satisfy left < right and top < bottom", line_no);
    }
    const double h = number(10);
    const double w = number(11);
    const double l = number(12);
    const double x = number(13);
    const double y = number(14);
    const double z = number(15);
    if (h > 0.0 && w > 0.0 && l > 0.0 && x > kitti::kMissingLocation + 1.0) {
      e.box3d = Box3D{x, y - 0.5 * h, z, h, w, l, wrap_angle(number(16))};
    }
    e.score = f.size() == 18 ? number(17) : 1.0;
    frames[static_cast<std::size_t>(*frame)].entries.push_back(std::move(e));
  }
  return frames;
}

}  // namespace cltrack
