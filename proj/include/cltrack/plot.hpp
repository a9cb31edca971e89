#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "cltrack/errors.hpp"
#include "cltrack/kitti.hpp"

namespace cltrack::plot
{

/// Stable, well-separated color per track id.
inline std::string color_for(TrackId id)
{
  const double hue = std::fmod(static_cast<double>(id) * 137.508, 360.0);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "hsl(%.1f,70%%,45%%)", hue);
  return buf;
}

inline void write_box(std::ostream & out, const Box2D & b, const std::string & stroke, bool dashed)
{
  char buf[256];
  std::snprintf(
    buf, sizeof(buf),
    "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"none\" stroke=\"%s\" "
    "stroke-width=\"2\"%s/>\n",
    b.left, b.top, b.width(), b.height(), stroke.c_str(), dashed ? " stroke-dasharray=\"6,4\"" : "");
  out << buf;
}

struct PlotOptions
{
  ImageSize image{1242, 375};
};

/// Writes frame_NNNNNN.svg overlays (hypotheses colored by id, ground truth
/// dashed gray) and trajectories.svg (bottom-center path of every hypothesis
/// id). Returns the number of files written.
inline std::size_t write_plots(
  const std::filesystem::path & dir, std::span<const FrameResult> hyp,
  std::span<const FrameResult> gt = {}, const PlotOptions & options = {})
{
  std::filesystem::create_directories(dir);
  const std::size_t frames = std::max(hyp.size(), gt.size());
  const int w = options.image.width;
  const int h = options.image.height;
  auto open = [&dir](const std::string & name) {
    std::ofstream out(dir / name);
    if (!out) throw DataError("cannot write " + (dir / name).string());
    return out;
  };
  auto header = [w, h](std::ostream & out) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
        << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\" stroke=\"black\"/>\n";
  };

  std::size_t written = 0;
  std::map<TrackId, std::vector<std::pair<double, double>>> paths;
  for (std::size_t f = 0; f < frames; ++f) {
    char name[64];
    std::snprintf(name, sizeof(name), "frame_%06zu.svg", f);
    auto out = open(name);
    header(out);
    if (f < gt.size()) {
      for (const auto & e : gt[f].entries) write_box(out, e.box2d, "#888888", true);
    }
    if (f < hyp.size()) {
      for (const auto & e : hyp[f].entries) {
        const std::string color = color_for(e.id);
        write_box(out, e.box2d, color, false);
        char label[160];
        std::snprintf(
          label, sizeof(label),
          "<text x=\"%.2f\" y=\"%.2f\" fill=\"%s\" font-size=\"14\">%lld</text>\n", e.box2d.left,
          e.box2d.top - 3.0, color.c_str(), static_cast<long long>(e.id));
        out << label;
        paths[e.id].emplace_back(0.5 * (e.box2d.left + e.box2d.right), e.box2d.bottom);
      }
    }
    out << "<text x=\"8\" y=\"20\" font-size=\"16\">frame " << f << "</text>\n</svg>\n";
    ++written;
  }

  auto out = open("trajectories.svg");
  header(out);
  for (const auto & [id, points] : paths) {
    out << "<polyline fill=\"none\" stroke=\"" << color_for(id) << "\" stroke-width=\"2\" points=\"";
    for (const auto & [x, y] : points) {
      char buf[48];
      std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", x, y);
      out << buf;
    }
    out << "\"/>\n";
  }
  out << "</svg>\n";
  return written + 1;
}

}  // namespace cltrack::plot
