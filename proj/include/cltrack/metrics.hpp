#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cltrack/errors.hpp"
#include "cltrack/geometry.hpp"
#include "cltrack/hungarian.hpp"
#include "cltrack/kitti.hpp"

namespace cltrack
{

struct MotScore
{
  double mota = 1.0;
  double motp = 0.0;  ///< mean IoU of matched pairs; 0 without matches
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t idsw = 0;
  std::int64_t frag = 0;
  std::int64_t mt = 0;
  std::int64_t ml = 0;
  std::int64_t gt_tracks = 0;
  std::int64_t gt_total = 0;
};

struct EvalOptions
{
  double iou_gate = 0.5;
  /// When set, only entries of this category are evaluated on both sides.
  std::optional<std::string> category;
};

namespace detail
{

struct GtTrackStats
{
  std::int64_t present = 0;
  std::int64_t matched = 0;
  std::optional<TrackId> last_hyp;
  bool tracked = false;      // matched at its latest present frame
  bool interrupted = false;  // lost after having been tracked
  std::int64_t frags = 0;
};

}  // namespace detail

/// CLEAR-MOT over 2D boxes. Per frame, correspondences from the previous
/// frame are kept while their IoU stays at or above the gate; the remaining
/// objects are matched by maximum-cardinality, maximum-IoU assignment.
/// IDSW counts a ground-truth track whose hypothesis id differs from its last
/// matched one. MT / ML: coverage >= 80% / <= 20%. Frag counts each time a
/// track is matched again after being lost.
inline MotScore evaluate(
  std::span<const FrameResult> gt, std::span<const FrameResult> hyp, const EvalOptions & options = {})
{
  for (std::size_t f = gt.size(); f < hyp.size(); ++f) {
    if (!hyp[f].entries.empty()) {
      throw DataError(
        "hypothesis has detections at frame " + std::to_string(f) + " beyond the " +
        std::to_string(gt.size()) + "-frame ground truth");
    }
  }
  auto selected = [&options](const TrackEntry & e) {
    return !options.category || e.category == *options.category;
  };

  MotScore score;
  double iou_sum = 0.0;
  std::map<TrackId, detail::GtTrackStats> stats;
  std::map<TrackId, TrackId> previous;  // gt id -> hyp id matched in the previous frame

  for (std::size_t f = 0; f < gt.size(); ++f) {
    std::vector<const TrackEntry *> gts;
    std::vector<const TrackEntry *> hyps;
    for (const auto & e : gt[f].entries) {
      if (selected(e)) gts.push_back(&e);
    }
    if (f < hyp.size()) {
      for (const auto & e : hyp[f].entries) {
        if (selected(e)) hyps.push_back(&e);
      }
    }
    const std::size_t m = gts.size();
    const std::size_t n = hyps.size();
    std::vector<double> iou(m * n, 0.0);
    std::vector<bool> allowed(m * n, false);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        iou[i * n + j] = iou_2d(gts[i]->box2d, hyps[j]->box2d);
        allowed[i * n + j] = iou[i * n + j] >= options.iou_gate;
      }
    }

    std::vector<std::optional<std::size_t>> match(m);
    std::vector<bool> hyp_used(n, false);
    for (std::size_t i = 0; i < m; ++i) {
      const auto prev = previous.find(gts[i]->id);
      if (prev == previous.end()) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (!hyp_used[j] && hyps[j]->id == prev->second && allowed[i * n + j]) {
          match[i] = j;
          hyp_used[j] = true;
          break;
        }
      }
    }

    std::vector<std::size_t> free_gt;
    std::vector<std::size_t> free_hyp;
    for (std::size_t i = 0; i < m; ++i) {
      if (!match[i]) free_gt.push_back(i);
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (!hyp_used[j]) free_hyp.push_back(j);
    }
    std::vector<double> sub_sim(free_gt.size() * free_hyp.size());
    std::vector<bool> sub_allowed(sub_sim.size());
    for (std::size_t a = 0; a < free_gt.size(); ++a) {
      for (std::size_t b = 0; b < free_hyp.size(); ++b) {
        const std::size_t k = free_gt[a] * n + free_hyp[b];
        sub_sim[a * free_hyp.size() + b] = iou[k];
        sub_allowed[a * free_hyp.size() + b] = allowed[k];
      }
    }
    const auto sub = max_weight_matching(sub_sim, sub_allowed, free_gt.size(), free_hyp.size());
    for (std::size_t a = 0; a < free_gt.size(); ++a) {
      if (sub[a]) {
        match[free_gt[a]] = free_hyp[*sub[a]];
        hyp_used[free_hyp[*sub[a]]] = true;
      }
    }

    previous.clear();
    std::int64_t matched_now = 0;
    for (std::size_t i = 0; i < m; ++i) {
      auto & st = stats[gts[i]->id];
      ++st.present;
      if (!match[i]) {
        ++score.fn;
        if (st.tracked) {
          st.tracked = false;
          st.interrupted = true;
        }
        continue;
      }
      const TrackEntry & h = *hyps[*match[i]];
      ++matched_now;
      ++st.matched;
      iou_sum += iou[i * n + *match[i]];
      if (st.last_hyp && *st.last_hyp != h.id) {
        ++score.idsw;
      }
      if (st.interrupted) {
        ++st.frags;
        st.interrupted = false;
      }
      st.tracked = true;
      st.last_hyp = h.id;
      previous[gts[i]->id] = h.id;
    }
    score.tp += matched_now;
    score.fp += static_cast<std::int64_t>(n) - matched_now;
    score.gt_total += static_cast<std::int64_t>(m);
  }

  for (const auto & [id, st] : stats) {
    ++score.gt_tracks;
    score.frag += st.frags;
    const double coverage = st.present > 0 ? static_cast<double>(st.matched) / st.present : 0.0;
    if (coverage >= 0.8) ++score.mt;
    if (coverage <= 0.2) ++score.ml;
  }
  if (score.gt_total > 0) {
    score.mota = 1.0 - static_cast<double>(score.fp + score.fn + score.idsw) /
                         static_cast<double>(score.gt_total);
  } else {
    score.mota = score.fp == 0 ? 1.0 : -std::numeric_limits<double>::infinity();
  }
  score.motp = score.tp > 0 ? iou_sum / static_cast<double>(score.tp) : 0.0;
  return score;
}

}  // namespace cltrack
