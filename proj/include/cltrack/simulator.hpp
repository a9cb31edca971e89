#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cltrack/errors.hpp"
#include "cltrack/geometry.hpp"
#include "cltrack/ingest.hpp"
#include "cltrack/keyvalue.hpp"
#include "cltrack/kitti.hpp"
#include "cltrack/text.hpp"

namespace cltrack::sim
{

/// Acceleration in effect from `start_frame` until the next segment starts.
struct AccelSegment
{
  int start_frame = 0;
  Eigen::Vector3d acceleration = Eigen::Vector3d::Zero();
};

struct ScenarioObject
{
  std::string category = "Car";
  int spawn = 0;
  int despawn = 0;  ///< exclusive
  Eigen::Vector3d position = Eigen::Vector3d::Zero();  ///< geometric center at spawn, meters
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();  ///< meters per frame
  std::vector<AccelSegment> schedule;                  ///< sorted by start_frame
  double height = 1.5;
  double width = 1.6;
  double length = 3.9;
  double yaw = 0.0;
};

/// While active, objects whose center lies inside the bird's-eye rectangle
/// produce no detections.
struct Occluder
{
  int start = 0;
  int end = 0;  ///< exclusive
  double x_min = 0.0;
  double z_min = 0.0;
  double x_max = 0.0;
  double z_max = 0.0;

  bool covers(int frame, const Eigen::Vector3d & p) const
  {
    return frame >= start && frame < end && p.x() >= x_min && p.x() <= x_max &&
           p.z() >= z_min && p.z() <= z_max;
  }
};

struct Scenario
{
  int length = 0;
  Calibration calib = Calibration::pinhole(721.5377, 609.5593, 172.854);
  ImageSize image{1242, 375};
  std::vector<ScenarioObject> objects;
  std::vector<Occluder> occluders;

  void validate() const
  {
    if (length <= 0) throw ConfigError("scenario length must be positive");
    if (image.width <= 0 || image.height <= 0) throw ConfigError("image dimensions must be positive");
    if (!calib.valid()) throw ConfigError("scenario calibration is invalid");
    for (std::size_t k = 0; k < objects.size(); ++k) {
      const auto & o = objects[k];
      const std::string name = "object " + std::to_string(k);
      if (!(o.spawn >= 0 && o.spawn < o.despawn && o.despawn <= length)) {
        throw ConfigError(name + ": need 0 <= spawn < despawn <= length");
      }
      if (!(o.height > 0.0 && o.width > 0.0 && o.length > 0.0)) {
        throw ConfigError(name + ": dimensions must be positive");
      }
      for (std::size_t s = 1; s < o.schedule.size(); ++s) {
        if (o.schedule[s].start_frame <= o.schedule[s - 1].start_frame) {
          throw ConfigError(name + ": acceleration segments must have increasing start frames");
        }
      }
    }
    for (std::size_t k = 0; k < occluders.size(); ++k) {
      const auto & o = occluders[k];
      if (!(o.start >= 0 && o.start < o.end && o.end <= length)) {
        throw ConfigError("occluder " + std::to_string(k) + ": frames must lie within [0, length)");
      }
      if (!(o.x_min <= o.x_max && o.z_min <= o.z_max)) {
        throw ConfigError("occluder " + std::to_string(k) + ": empty region");
      }
    }
  }
};

/// Parses the flat scenario format:
///   length = 200
///   image_width = 1242            image_height = 375
///   calib.P2 = <12 numbers>       calib.R_rect = <9>   calib.Tr_velo_cam = <12>
///   object.N.category = Car       object.N.spawn = 0   object.N.despawn = 200
///   object.N.position = x y z     object.N.velocity = vx vy vz
///   object.N.size = h w l         object.N.yaw = 0
///   object.N.accel = frame ax ay az; frame ax ay az
///   occluder.N.frames = start end
///   occluder.N.region = x_min z_min x_max z_max
inline Scenario parse_scenario(std::istream & in);

/// Text form accepted by parse_scenario.
inline std::string format_scenario(const Scenario & s);

/// Ground truth state of one object at one frame.
struct ObjectState
{
  TrackId id = 0;  ///< object index + 1
  std::string category;
  Box3D box;
  std::optional<Box2D> box2d;  ///< absent when outside the image or behind the camera
  bool occluded = false;
};

struct GroundTruth
{
  int length = 0;
  Calibration calib;
  ImageSize image;
  std::vector<std::vector<ObjectState>> frames;

  /// Camera-visible objects in the KITTI result layout (occluded flag 2 when
  /// an occluder hides the object, else 0).
  std::vector<FrameResult> results() const
  {
    std::vector<FrameResult> out(frames.size());
    for (std::size_t f = 0; f < frames.size(); ++f) {
      out[f].frame = static_cast<int>(f);
      for (const auto & s : frames[f]) {
        if (!s.box2d) continue;
        out[f].entries.push_back(TrackEntry{
          .id = s.id,
          .category = s.category,
          .box2d = s.box2d.value(),
          .box3d = s.box,
          .score = 1.0,
          .truncated = 0.0,
          .occluded = s.occluded ? 2 : 0,
        });
      }
    }
    return out;
  }
};

/// Center of `object` at `frame`, integrating the piecewise-constant
/// acceleration in closed form segment by segment.
inline Eigen::Vector3d object_position(const ScenarioObject & object, int frame)
{
  Eigen::Vector3d p = object.position;
  Eigen::Vector3d v = object.velocity;
  int t = object.spawn;
  Eigen::Vector3d a = Eigen::Vector3d::Zero();
  for (const auto & seg : object.schedule) {
    if (seg.start_frame > t) {
      const double dt = static_cast<double>(std::min(seg.start_frame, frame) - t);
      p += v * dt + 0.5 * a * dt * dt;
      v += a * dt;
      t = std::min(seg.start_frame, frame);
    }
    if (t >= frame) {
      return p;
    }
    a = seg.acceleration;
  }
  const double dt = static_cast<double>(frame - t);
  return p + v * dt + 0.5 * a * dt * dt;
}

inline GroundTruth generate_ground_truth(const Scenario & scenario)
{
  scenario.validate();
  GroundTruth gt;
  gt.length = scenario.length;
  gt.calib = scenario.calib;
  gt.image = scenario.image;
  gt.frames.resize(static_cast<std::size_t>(scenario.length));
  for (int f = 0; f < scenario.length; ++f) {
    for (std::size_t k = 0; k < scenario.objects.size(); ++k) {
      const auto & o = scenario.objects[k];
      if (f < o.spawn || f >= o.despawn) continue;
      const Eigen::Vector3d c = object_position(o, f);
      ObjectState s;
      s.id = static_cast<TrackId>(k + 1);
      s.category = o.category;
      s.box = Box3D{c.x(), c.y(), c.z(), o.height, o.width, o.length, wrap_angle(o.yaw)};
      s.box2d = project_box3d(s.box, scenario.calib, scenario.image);
      for (const auto & occ : scenario.occluders) {
        s.occluded = s.occluded || occ.covers(f, c);
      }
      gt.frames[static_cast<std::size_t>(f)].push_back(std::move(s));
    }
  }
  return gt;
}

struct DistortionSpec
{
  double dropout2d = 0.0;
  double dropout3d = 0.0;
  double jitter2d = 0.0;  ///< pixels, std of each corner coordinate
  double jitter3d = 0.0;  ///< meters, std of each center coordinate
  std::uint64_t seed = 0;

  void validate() const
  {
    auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!prob(dropout2d) || !prob(dropout3d)) throw ConfigError("dropout must lie in [0, 1]");
    if (!(jitter2d >= 0.0) || !(jitter3d >= 0.0)) throw ConfigError("jitter must be non-negative");
  }
};

/// Portable random stream: std::mt19937_64 (its output sequence is fixed by
/// the C++ standard), 53-bit uniforms, Box-Muller normals (cosine branch).
class Random
{
public:
  explicit Random(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal()
  {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

private:
  std::mt19937_64 engine_;
};

struct DetectionSet
{
  FrameDetections<Detection2D> det2d;
  FrameDetections<Detection3D> det3d;
};

/// Samples detections from ground truth. Every object-frame consumes the
/// same number of random draws in a fixed order (drop 2D, drop 3D, four 2D
/// normals, three 3D normals) so outcomes for one object-frame do not shift
/// with other settings. Occluded object-frames emit nothing.
inline DetectionSet degrade(const GroundTruth & gt, const DistortionSpec & spec)
{
  spec.validate();
  Random rng(spec.seed);
  DetectionSet out;
  out.det2d.resize(gt.frames.size());
  out.det3d.resize(gt.frames.size());
  for (std::size_t f = 0; f < gt.frames.size(); ++f) {
    for (const auto & s : gt.frames[f]) {
      const bool keep2d = rng.uniform() >= spec.dropout2d;
      const bool keep3d = rng.uniform() >= spec.dropout3d;
      double n2[4];
      double n3[3];
      for (double & v : n2) v = rng.normal();
      for (double & v : n3) v = rng.normal();
      if (s.occluded) continue;

      if (keep2d && s.box2d) {
        Detection2D d;
        d.frame = static_cast<int>(f);
        d.box = *s.box2d;
        if (spec.jitter2d > 0.0) {
          // Noisy corners are re-ordered and kept at least one pixel apart.
          const Box2D & b = *s.box2d;
          const double x0 = b.left + spec.jitter2d * n2[0];
          const double y0 = b.top + spec.jitter2d * n2[1];
          const double x1 = b.right + spec.jitter2d * n2[2];
          const double y1 = b.bottom + spec.jitter2d * n2[3];
          const double l = std::min(x0, x1);
          const double t = std::min(y0, y1);
          d.box = {l, t, std::max(std::max(x0, x1), l + 1.0), std::max(std::max(y0, y1), t + 1.0)};
        }
        d.score = 1.0;
        d.category = s.category;
        out.det2d[f].push_back(std::move(d));
      }
      if (keep3d) {
        Detection3D d;
        d.frame = static_cast<int>(f);
        d.box = s.box;
        d.box.center_x += spec.jitter3d * n3[0];
        d.box.center_y += spec.jitter3d * n3[1];
        d.box.center_z += spec.jitter3d * n3[2];
        d.score = 1.0;
        d.category = s.category;
        out.det3d[f].push_back(std::move(d));
      }
    }
  }
  return out;
}

/// Ingest-format 2D detection text.
inline void write_detections_2d(std::ostream & out, const FrameDetections<Detection2D> & dets)
{
  using text::fixed6;
  for (const auto & frame : dets) {
    for (const auto & d : frame) {
      out << d.frame << ' ' << d.category << ' ' << fixed6(d.score) << ' ' << fixed6(d.box.left) << ' '
          << fixed6(d.box.top) << ' ' << fixed6(d.box.right) << ' ' << fixed6(d.box.bottom) << '\n';
    }
  }
}

/// Ingest-format 3D detection text; y is written as the bottom-face center.
inline void write_detections_3d(std::ostream & out, const FrameDetections<Detection3D> & dets)
{
  using text::fixed6;
  for (const auto & frame : dets) {
    for (const auto & d : frame) {
      const Box3D & b = d.box;
      out << d.frame << ' ' << d.category << ' ' << fixed6(d.score) << ' ' << fixed6(b.height) << ' '
          << fixed6(b.width) << ' ' << fixed6(b.length) << ' ' << fixed6(b.center_x) << ' '
          << fixed6(b.center_y + 0.5 * b.height) << ' ' << fixed6(b.center_z) << ' ' << fixed6(b.yaw)
          << '\n';
    }
  }
}

namespace detail
{

inline std::vector<double> numbers(const std::string & value, const std::string & key)
{
  std::vector<double> out;
  for (const auto field : text::split_fields(value)) {
    const auto v = text::to_double(field);
    if (!v) throw ConfigError("'" + key + "': not a number '" + std::string(field) + "'");
    out.push_back(*v);
  }
  return out;
}

inline std::vector<double> numbers(const std::string & value, const std::string & key, std::size_t count)
{
  auto out = numbers(value, key);
  if (out.size() != count) {
    throw ConfigError("'" + key + "' expects " + std::to_string(count) + " numbers");
  }
  return out;
}

inline int integer(const std::string & value, const std::string & key)
{
  const auto v = text::to_int<int>(text::trim(value));
  if (!v) throw ConfigError("'" + key + "' expects an integer");
  return *v;
}

/// Splits `group.N.field` into (N, field).
inline std::pair<std::size_t, std::string> indexed_key(const std::string & key, std::size_t prefix_len)
{
  const auto dot = key.find('.', prefix_len);
  if (dot == std::string::npos) throw ConfigError("malformed key '" + key + "'");
  const auto index = text::to_int<std::size_t>(std::string_view(key).substr(prefix_len, dot - prefix_len));
  if (!index) throw ConfigError("malformed index in '" + key + "'");
  return {*index, key.substr(dot + 1)};
}

inline std::string join(const Eigen::Vector3d & v)
{
  return text::fixed6(v.x()) + ' ' + text::fixed6(v.y()) + ' ' + text::fixed6(v.z());
}

}  // namespace detail

inline Scenario parse_scenario(std::istream & in)
{
  const KeyValueFile kv = KeyValueFile::parse(in);
  Scenario s;
  std::map<std::size_t, ScenarioObject> objects;
  std::map<std::size_t, Occluder> occluders;
  for (const auto & [key, entry] : kv.entries()) {
    const std::string & value = entry.value;
    try {
      if (key == "length") {
        s.length = detail::integer(value, key);
      } else if (key == "image_width") {
        s.image.width = detail::integer(value, key);
      } else if (key == "image_height") {
        s.image.height = detail::integer(value, key);
      } else if (key == "calib.P2") {
        const auto v = detail::numbers(value, key, 12);
        s.calib.projection = Eigen::Map<const Eigen::Matrix<double, 3, 4, Eigen::RowMajor>>(v.data());
      } else if (key == "calib.R_rect") {
        const auto v = detail::numbers(value, key, 9);
        s.calib.rectification = Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(v.data());
      } else if (key == "calib.Tr_velo_cam") {
        const auto v = detail::numbers(value, key, 12);
        s.calib.lidar_to_camera = Eigen::Map<const Eigen::Matrix<double, 3, 4, Eigen::RowMajor>>(v.data());
      } else if (key.rfind("object.", 0) == 0) {
        const auto [index, field] = detail::indexed_key(key, 7);
        ScenarioObject & o = objects[index];
        if (field == "category") {
          o.category = std::string(text::trim(value));
        } else if (field == "spawn") {
          o.spawn = detail::integer(value, key);
        } else if (field == "despawn") {
          o.despawn = detail::integer(value, key);
        } else if (field == "position") {
          const auto v = detail::numbers(value, key, 3);
          o.position = {v[0], v[1], v[2]};
        } else if (field == "velocity") {
          const auto v = detail::numbers(value, key, 3);
          o.velocity = {v[0], v[1], v[2]};
        } else if (field == "size") {
          const auto v = detail::numbers(value, key, 3);
          o.height = v[0];
          o.width = v[1];
          o.length = v[2];
        } else if (field == "yaw") {
          o.yaw = detail::numbers(value, key, 1)[0];
        } else if (field == "accel") {
          std::stringstream segments(value);
          std::string segment;
          while (std::getline(segments, segment, ';')) {
            if (text::trim(segment).empty()) continue;
            const auto v = detail::numbers(segment, key, 4);
            o.schedule.push_back({static_cast<int>(v[0]), Eigen::Vector3d(v[1], v[2], v[3])});
          }
        } else {
          throw ConfigError("unknown object field '" + field + "'");
        }
      } else if (key.rfind("occluder.", 0) == 0) {
        const auto [index, field] = detail::indexed_key(key, 9);
        Occluder & o = occluders[index];
        if (field == "frames") {
          const auto v = detail::numbers(value, key, 2);
          o.start = static_cast<int>(v[0]);
          o.end = static_cast<int>(v[1]);
        } else if (field == "region") {
          const auto v = detail::numbers(value, key, 4);
          o.x_min = v[0];
          o.z_min = v[1];
          o.x_max = v[2];
          o.z_max = v[3];
        } else {
          throw ConfigError("unknown occluder field '" + field + "'");
        }
      } else {
        throw ConfigError("unknown scenario key '" + key + "'");
      }
    } catch (const ConfigError & e) {
      throw ConfigError("line " + std::to_string(entry.line) + ": " + e.what());
    }
  }
  for (auto & [index, o] : objects) s.objects.push_back(std::move(o));
  for (auto & [index, o] : occluders) s.occluders.push_back(o);
  s.validate();
  return s;
}

inline std::string format_scenario(const Scenario & s)
{
  using text::fixed6;
  std::ostringstream os;
  auto matrix = [&os](const char * key, const auto & m) {
    os << key << " =";
    for (int r = 0; r < m.rows(); ++r) {
      for (int c = 0; c < m.cols(); ++c) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), " %.12g", m(r, c));
        os << buf;
      }
    }
    os << '\n';
  };
  os << "length = " << s.length << '\n'
     << "image_width = " << s.image.width << '\n'
     << "image_height = " << s.image.height << '\n';
  matrix("calib.P2", s.calib.projection);
  matrix("calib.R_rect", s.calib.rectification);
  matrix("calib.Tr_velo_cam", s.calib.lidar_to_camera);
  for (std::size_t k = 0; k < s.objects.size(); ++k) {
    const auto & o = s.objects[k];
    const std::string p = "object." + std::to_string(k) + ".";
    os << p << "category = " << o.category << '\n'
       << p << "spawn = " << o.spawn << '\n'
       << p << "despawn = " << o.despawn << '\n'
       << p << "position = " << detail::join(o.position) << '\n'
       << p << "velocity = " << detail::join(o.velocity) << '\n'
       << p << "size = " << fixed6(o.height) << ' ' << fixed6(o.width) << ' ' << fixed6(o.length) << '\n'
       << p << "yaw = " << fixed6(o.yaw) << '\n';
    if (!o.schedule.empty()) {
      os << p << "accel =";
      for (std::size_t k2 = 0; k2 < o.schedule.size(); ++k2) {
        os << (k2 ? "; " : " ") << o.schedule[k2].start_frame << ' ' << detail::join(o.schedule[k2].acceleration);
      }
      os << '\n';
    }
  }
  for (std::size_t k = 0; k < s.occluders.size(); ++k) {
    const auto & o = s.occluders[k];
    const std::string p = "occluder." + std::to_string(k) + ".";
    os << p << "frames = " << o.start << ' ' << o.end << '\n'
       << p << "region = " << fixed6(o.x_min) << ' ' << fixed6(o.z_min) << ' ' << fixed6(o.x_max) << ' '
       << fixed6(o.z_max) << '\n';
  }
  return os.str();
}

/// Parameters of `random_scenario`.
struct RandomScenarioOptions
{
  int objects = 6;
  int length = 200;
  /// Fraction of objects that drive out of the image and come back.
  double exit_fraction = 0.34;
};

/// Cars on separate depth lanes (6 m apart, from 12 m) with small
/// piecewise-constant accelerations. The chosen share of them start near the
/// right image edge, drive fully out of view for roughly 20 frames, come back
/// and stop. All objects live for the whole sequence.
inline Scenario random_scenario(const RandomScenarioOptions & options, std::uint64_t seed)
{
  Random rng(seed);
  Scenario s;
  s.length = options.length;
  const double focal = s.calib.projection(0, 0);
  const double cx = s.calib.projection(0, 2);
  const double right_ratio = (s.image.width - cx) / focal;
  for (int k = 0; k < options.objects; ++k) {
    ScenarioObject o;
    o.category = "Car";
    o.spawn = 0;
    o.despawn = options.length;
    o.height = 1.4 + 0.3 * rng.uniform();
    o.width = 1.6 + 0.2 * rng.uniform();
    o.length = 3.6 + 0.8 * rng.uniform();
    o.yaw = 0.0;
    const double depth = 12.0 + 6.0 * k;
    o.position = {(rng.uniform() - 0.5) * depth * cx / focal, 1.65 - 0.5 * o.height, depth};
    const bool exits = rng.uniform() < options.exit_fraction;
    if (exits) {
      // Peak excursion v^2 / 2a = 4.41 m against about 3.5 m needed to leave
      // the image; back at the start after 2v/a frames, then braked to rest.
      const double v = 0.42;
      const double a = 0.02;
      const int back = static_cast<int>(std::lround(2.0 * v / a));
      o.position.x() = right_ratio * depth - 0.5;
      o.velocity = {v, 0.0, 0.0};
      o.schedule.push_back({0, Eigen::Vector3d(-a, 0.0, 0.0)});
      o.schedule.push_back({back, Eigen::Vector3d(a, 0.0, 0.0)});
      o.schedule.push_back({back + back / 2, Eigen::Vector3d::Zero()});
    } else {
      o.velocity = {(rng.uniform() - 0.5) * 0.04, 0.0, (rng.uniform() - 0.5) * 0.02};
      const int segments = 1 + static_cast<int>(rng.uniform() * 3.0);
      for (int seg = 0; seg < segments; ++seg) {
        const int start = seg * options.length / segments;
        o.schedule.push_back({start, Eigen::Vector3d((rng.uniform() - 0.5) * 0.0004, 0.0, 0.0)});
      }
    }
    s.objects.push_back(std::move(o));
  }
  s.validate();
  return s;
}

}  // namespace cltrack::sim
