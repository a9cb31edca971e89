#pragma once

#include <algorithm>
#include <chrono>
#include <fstream>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cltrack/association.hpp"
#include "cltrack/config.hpp"
#include "cltrack/errors.hpp"
#include "cltrack/geometry.hpp"
#include "cltrack/ingest.hpp"
#include "cltrack/kitti.hpp"
#include "cltrack/memory.hpp"

namespace cltrack
{

/// The matrices one frame's assignment was computed from. `camera` and `lidar`
/// are empty when the association mode does not build them.
struct FrameMatrices
{
  int frame = 0;
  AssociationMatrix camera;
  AssociationMatrix lidar;
  AssociationMatrix scores;
  AssignmentResult assignment;
};

/// Per-sequence tracker: association against the memory's predictions,
/// filter updates, aging and reporting.
class Tracker
{
public:
  using MatrixObserver = std::function<void(const FrameMatrices &)>;

  explicit Tracker(TrackerConfig config, Calibration calib = Calibration::pinhole(1.0, 0.0, 0.0))
  : config_(std::move(config)), calib_(std::move(calib)), store_(config_.noise2d, config_.noise3d)
  {
    config_.validate();
  }

  /// Called with every frame's matrices, before integration.
  void set_matrix_observer(MatrixObserver observer) { observer_ = std::move(observer); }

  /// Processes the next frame's unified observations.
  FrameResult step(std::span<const Observation> observations)
  {
    const int frame = frame_++;
    const auto & tracks = store_.tracks();

    FrameMatrices fm;
    fm.frame = frame;
    const bool need_camera = config_.mode != AssociationMode::lidar;
    const bool need_lidar = config_.mode != AssociationMode::camera;
    if (need_camera) {
      std::vector<std::optional<Box2D>> rows(observations.size());
      std::vector<std::optional<Box2D>> cols(tracks.size());
      for (std::size_t i = 0; i < observations.size(); ++i) rows[i] = observations[i].box2d;
      for (std::size_t j = 0; j < tracks.size(); ++j) cols[j] = tracks[j].predicted2d();
      fm.camera = build_camera_matrix(rows, cols, config_.a_c);
    }
    if (need_lidar) {
      std::vector<std::optional<Box3D>> rows(observations.size());
      std::vector<std::optional<Box3D>> cols(tracks.size());
      for (std::size_t i = 0; i < observations.size(); ++i) rows[i] = observations[i].box3d;
      for (std::size_t j = 0; j < tracks.size(); ++j) cols[j] = tracks[j].predicted3d();
      fm.lidar = build_lidar_matrix(rows, cols, config_.a_l);
    }
    switch (config_.mode) {
      case AssociationMode::fused:
        fm.scores = fuse(fm.camera, fm.lidar, config_.alpha_c, config_.alpha_l);
        break;
      case AssociationMode::camera:
        fm.scores = fm.camera;
        break;
      case AssociationMode::lidar:
        fm.scores = complement(fm.lidar);
        break;
    }
    fm.assignment = greedy_assign(fm.scores, config_.a_f);
    if (observer_) {
      observer_(fm);
    }

    store_.integrate(fm.assignment, observations, frame);
    store_.prune(config_.epsilon);
    return report(frame);
  }

  const TrackStore & store() const { return store_; }
  const TrackerConfig & config() const { return config_; }
  const Calibration & calibration() const { return calib_; }
  int frames_processed() const { return frame_; }

private:
  /// Tracks observed this frame with enough hits. The 2D box is the camera
  /// estimate when the camera saw the track, otherwise the projection of the
  /// 3D estimate; tracks with neither (off-image) are not reported.
  FrameResult report(int frame) const
  {
    FrameResult out;
    out.frame = frame;
    for (const Track & t : store_.tracks()) {
      if (age_of(t) != 0 || t.hit_count < config_.min_hits_to_report) {
        continue;
      }
      std::optional<Box2D> box2d;
      if (t.state2d && t.frames_since_seen_2d == 0) {
        box2d = t.estimate2d;
      } else if (t.estimate3d) {
        box2d = project_box3d(*t.estimate3d, calib_, config_.image);
      }
      if (!box2d) {
        continue;
      }
      TrackEntry e;
      e.id = t.id;
      e.category = t.category;
      e.box2d = *box2d;
      e.box3d = t.estimate3d;
      e.score = t.last_score;
      out.entries.push_back(std::move(e));
    }
    std::sort(out.entries.begin(), out.entries.end(), [](const auto & a, const auto & b) {
      return a.id < b.id;
    });
    return out;
  }

  TrackerConfig config_;
  Calibration calib_;
  TrackStore store_;
  MatrixObserver observer_;
  int frame_ = 0;
};

/// Which detector files feed the tracker.
enum class SensorMode {
  both,     ///< 2D and 3D detections, unified per frame
  mono_2d,  ///< 2D detections only
  mono_3d,  ///< 3D detections only, 2D boxes derived by projection
};

struct SequenceInput
{
  std::string name;
  FrameDetections<Detection2D> det2d;
  FrameDetections<Detection3D> det3d;
  Calibration calib;
  SensorMode sensors = SensorMode::both;
  /// Frames to run; at least one past the last detection when unset.
  std::optional<int> frame_count;
};

struct RunManifest
{
  std::string sequence;
  std::string config;
  std::vector<double> frame_seconds;
  int total_frames = 0;
  std::int64_t tracks_created = 0;

  double total_seconds() const
  {
    double sum = 0.0;
    for (double s : frame_seconds) sum += s;
    return sum;
  }

  nlohmann::json to_json() const
  {
    return {
      {"sequence", sequence},
      {"config", config},
      {"total_frames", total_frames},
      {"tracks_created", tracks_created},
      {"total_seconds", total_seconds()},
      {"frame_seconds", frame_seconds},
    };
  }
};

struct SequenceOutput
{
  std::vector<FrameResult> results;
  RunManifest manifest;
};

/// Unified observations of one frame under the given sensor mode.
inline std::vector<Observation> frame_observations(
  std::span<const Detection2D> det2d, std::span<const Detection3D> det3d, const Calibration & calib,
  const TrackerConfig & config, SensorMode sensors)
{
  switch (sensors) {
    case SensorMode::mono_2d:
      return unify(det2d, {}, calib, config.effective_unify_gate(), config.image);
    case SensorMode::mono_3d:
      return mono_detector_expand(
        unify({}, det3d, calib, config.effective_unify_gate(), config.image), calib, config.image);
    case SensorMode::both:
      break;
  }
  return unify(det2d, det3d, calib, config.effective_unify_gate(), config.image);
}

/// Runs a whole sequence. Timings cover unification and tracking only.
inline SequenceOutput run_sequence(
  const SequenceInput & input, const TrackerConfig & config,
  Tracker::MatrixObserver observer = {})
{
  int frames = std::max(input.det2d.size(), input.det3d.size());
  if (input.sensors == SensorMode::mono_2d) frames = static_cast<int>(input.det2d.size());
  if (input.sensors == SensorMode::mono_3d) frames = static_cast<int>(input.det3d.size());
  if (input.frame_count) {
    frames = *input.frame_count;
  }

  Tracker tracker(config, input.calib);
  if (observer) {
    tracker.set_matrix_observer(std::move(observer));
  }
  SequenceOutput out;
  out.results.reserve(static_cast<std::size_t>(frames));
  out.manifest.frame_seconds.reserve(static_cast<std::size_t>(frames));

  auto at = [](const auto & per_frame, int f) {
    using Item = typename std::decay_t<decltype(per_frame)>::value_type::value_type;
    return static_cast<std::size_t>(f) < per_frame.size()
             ? std::span<const Item>(per_frame[static_cast<std::size_t>(f)])
             : std::span<const Item>();
  };

  for (int f = 0; f < frames; ++f) {
    const auto start = std::chrono::steady_clock::now();
    const auto observations =
      frame_observations(at(input.det2d, f), at(input.det3d, f), input.calib, config, input.sensors);
    out.results.push_back(tracker.step(observations));
    const auto stop = std::chrono::steady_clock::now();
    out.manifest.frame_seconds.push_back(std::chrono::duration<double>(stop - start).count());
  }

  out.manifest.sequence = input.name;
  out.manifest.config = config.to_text();
  out.manifest.total_frames = frames;
  out.manifest.tracks_created = tracker.store().tracks_created();
  return out;
}

namespace detail
{

template <typename Parser>
auto parse_file(const std::string & path, Parser && parser)
{
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open " + path);
  }
  try {
    return parser(in);
  } catch (const ParseError & e) {
    throw ParseError(path + ": " + e.what(), 0);
  }
}

}  // namespace detail

struct SequenceFiles
{
  std::string det2d;  ///< may be empty in mono_3d mode
  std::string det3d;  ///< may be empty in mono_2d mode
  std::string calib;
};

/// Loads detection and calibration files; parse errors name file and line.
inline SequenceInput load_sequence(const SequenceFiles & files, SensorMode sensors)
{
  SequenceInput input;
  input.sensors = sensors;
  input.name = files.det2d.empty() ? files.det3d : files.det2d;
  if (sensors != SensorMode::mono_3d) {
    input.det2d = detail::parse_file(files.det2d, [](std::istream & in) { return parse_detections_2d(in); });
  }
  if (sensors != SensorMode::mono_2d) {
    input.det3d = detail::parse_file(files.det3d, [](std::istream & in) { return parse_detections_3d(in); });
  }
  input.calib = detail::parse_file(files.calib, [](std::istream & in) { return parse_calibration(in); });
  return input;
}

}  // namespace cltrack
