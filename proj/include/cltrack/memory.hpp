#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cltrack/association.hpp"
#include "cltrack/errors.hpp"
#include "cltrack/filter.hpp"
#include "cltrack/ingest.hpp"

namespace cltrack
{

using TrackId = std::int64_t;

/// A remembered object. States hold the prediction for the next frame;
/// `estimate2d` / `estimate3d` hold the estimate for the frame last integrated
/// (posterior when that sensor observed it, prior otherwise).
struct Track
{
  TrackId id = 0;
  std::optional<BoxState2D> state2d;
  std::optional<BoxState3D> state3d;
  int frames_since_seen_2d = 0;
  int frames_since_seen_3d = 0;
  std::string category;
  int hit_count = 0;
  double last_score = 0.0;
  int created_frame = 0;

  std::optional<Box2D> estimate2d;
  std::optional<Box3D> estimate3d;

  std::optional<Box2D> predicted2d() const
  {
    return state2d ? std::optional<Box2D>(state2d->box()) : std::nullopt;
  }

  std::optional<Box3D> predicted3d() const
  {
    return state3d ? std::optional<Box3D>(state3d->box()) : std::nullopt;
  }
};

/// Frames since the track was last observed by any sensor it has a state for.
/// A sensor without state does not count, so a single-state track ages by
/// that sensor alone.
inline int age_of(const Track & track)
{
  int age = std::numeric_limits<int>::max();
  if (track.state2d) {
    age = std::min(age, track.frames_since_seen_2d);
  }
  if (track.state3d) {
    age = std::min(age, track.frames_since_seen_3d);
  }
  return age;
}

/// The track memory of one sequence. Single writer.
class TrackStore
{
public:
  TrackStore() = default;
  TrackStore(NoiseModel noise2d, NoiseModel noise3d) : noise2d_(noise2d), noise3d_(noise3d) {}

  const std::vector<Track> & tracks() const { return tracks_; }
  std::size_t size() const { return tracks_.size(); }

  /// Number of ids issued so far.
  std::int64_t tracks_created() const { return next_id_ - 1; }

  /// Applies one frame's association:
  ///   matched tracks update every state the observation measures (creating a
  ///     state the track lacked), then predict all states;
  ///   unmatched observations become new tracks, initialized and predicted;
  ///   unmatched tracks predict all states.
  /// Seen-counters reset for observing sensors and increment otherwise.
  void integrate(
    const AssignmentResult & assignment, std::span<const Observation> observations, int frame)
  {
    check_assignment(assignment, observations.size());

    for (const Match & m : assignment.matches) {
      observe(tracks_[m.track], observations[m.observation]);
    }
    for (const std::size_t j : assignment.unmatched_tracks) {
      coast(tracks_[j]);
    }
    for (const std::size_t i : assignment.unmatched_observations) {
      tracks_.push_back(create(observations[i], frame));
    }
  }

  /// Drops tracks whose age exceeds `epsilon`. Returns how many were dropped.
  std::size_t prune(int epsilon)
  {
    if (epsilon < 1) {
      throw ConfigError("epsilon must be at least 1");
    }
    const auto before = tracks_.size();
    std::erase_if(tracks_, [epsilon](const Track & t) { return age_of(t) > epsilon; });
    return before - tracks_.size();
  }

private:
  void check_assignment(const AssignmentResult & a, std::size_t observation_count) const
  {
    std::vector<bool> obs_seen(observation_count, false);
    std::vector<bool> track_seen(tracks_.size(), false);
    auto mark = [](std::vector<bool> & seen, std::size_t index, const char * what) {
      if (index >= seen.size() || seen[index]) {
        throw ContractViolation(
          std::string("integrate: stale or duplicate ") + what + " index " + std::to_string(index));
      }
      seen[index] = true;
    };
    for (const Match & m : a.matches) {
      mark(obs_seen, m.observation, "observation");
      mark(track_seen, m.track, "track");
    }
    for (const auto i : a.unmatched_observations) mark(obs_seen, i, "observation");
    for (const auto j : a.unmatched_tracks) mark(track_seen, j, "track");
    if (std::find(obs_seen.begin(), obs_seen.end(), false) != obs_seen.end() ||
        std::find(track_seen.begin(), track_seen.end(), false) != track_seen.end()) {
      throw ContractViolation("integrate: assignment does not cover this frame's snapshot");
    }
  }

  void observe(Track & t, const Observation & obs)
  {
    if (obs.box2d) {
      if (t.state2d) {
        t.state2d->update(*obs.box2d);
      } else {
        t.state2d = BoxState2D::init(*obs.box2d, noise2d_);
      }
      t.frames_since_seen_2d = 0;
    } else {
      ++t.frames_since_seen_2d;
    }
    if (obs.box3d) {
      if (t.state3d) {
        t.state3d->update(*obs.box3d);
      } else {
        t.state3d = BoxState3D::init(*obs.box3d, noise3d_);
      }
      t.frames_since_seen_3d = 0;
    } else {
      ++t.frames_since_seen_3d;
    }
    ++t.hit_count;
    t.last_score = obs.score;
    advance(t);
  }

  static void coast(Track & t)
  {
    ++t.frames_since_seen_2d;
    ++t.frames_since_seen_3d;
    advance(t);
  }

  Track create(const Observation & obs, int frame)
  {
    Track t;
    t.id = next_id_++;
    t.category = obs.category;
    t.created_frame = frame;
    t.last_score = obs.score;
    t.hit_count = 1;
    if (obs.box2d) {
      t.state2d = BoxState2D::init(*obs.box2d, noise2d_);
    } else {
      t.frames_since_seen_2d = 1;
    }
    if (obs.box3d) {
      t.state3d = BoxState3D::init(*obs.box3d, noise3d_);
    } else {
      t.frames_since_seen_3d = 1;
    }
    advance(t);
    return t;
  }

  /// Records the current-frame estimates, then predicts to the next frame.
  static void advance(Track & t)
  {
    t.estimate2d = t.predicted2d();
    t.estimate3d = t.predicted3d();
    if (t.state2d) t.state2d->predict();
    if (t.state3d) t.state3d->predict();
  }

  std::vector<Track> tracks_;
  TrackId next_id_ = 1;
  NoiseModel noise2d_{1.0, 0.1, 1000.0};
  NoiseModel noise3d_{0.01, 0.1, 1000.0};
};

}  // namespace cltrack
