#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cltrack/metrics.hpp"
#include "cltrack/pipeline.hpp"
#include "cltrack/simulator.hpp"
#include "oracles.hpp"

using namespace cltrack;

namespace
{

TrackEntry entry(TrackId id, Box2D b, std::string category = "Car")
{
  TrackEntry e;
  e.id = id;
  e.category = std::move(category);
  e.box2d = b;
  return e;
}

std::vector<FrameResult> frames(std::size_t n)
{
  std::vector<FrameResult> out(n);
  for (std::size_t f = 0; f < n; ++f) out[f].frame = static_cast<int>(f);
  return out;
}

Box2D moving(int f) { return {10.0 * f, 0, 10.0 * f + 50, 40}; }

std::vector<FrameResult> simulated_gt(std::uint64_t seed, int length = 150)
{
  sim::RandomScenarioOptions options;
  options.length = length;
  return sim::generate_ground_truth(sim::random_scenario(options, seed)).results();
}

}  // namespace

TEST(SolveAssignment, MatchesBruteForce)
{
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (std::size_t n = 1; n <= 6; ++n) {
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> cost(n * n);
      for (auto & c : cost) c = u(rng);
      const auto a = solve_assignment(cost, n);
      double got = 0.0;
      for (std::size_t i = 0; i < n; ++i) got += cost[i * n + a[i]];
      std::vector<std::size_t> perm(n);
      std::iota(perm.begin(), perm.end(), 0);
      double best = 1e300;
      do {
        double t = 0.0;
        for (std::size_t i = 0; i < n; ++i) t += cost[i * n + perm[i]];
        best = std::min(best, t);
      } while (std::next_permutation(perm.begin(), perm.end()));
      EXPECT_NEAR(got, best, 1e-9);
      std::vector<std::size_t> sorted = a;
      std::sort(sorted.begin(), sorted.end());
      for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(sorted[i], i);
    }
  }
}

TEST(MaxWeightMatching, CardinalityThenWeightAgainstOracle)
{
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::bernoulli_distribution allow(0.5);
  for (std::size_t rows = 0; rows <= 5; ++rows) {
    for (std::size_t cols = 0; cols <= 5; ++cols) {
      for (int trial = 0; trial < 40; ++trial) {
        std::vector<double> sim(rows * cols);
        std::vector<bool> allowed(rows * cols);
        for (std::size_t k = 0; k < sim.size(); ++k) {
          sim[k] = u(rng);
          allowed[k] = allow(rng);
        }
        const auto got = max_weight_matching(sim, allowed, rows, cols);
        ASSERT_EQ(got.size(), rows);
        std::size_t count = 0;
        double total = 0.0;
        std::vector<bool> used(cols, false);
        for (std::size_t i = 0; i < rows; ++i) {
          if (!got[i]) continue;
          ASSERT_LT(*got[i], cols);
          ASSERT_TRUE(allowed[i * cols + *got[i]]);
          ASSERT_FALSE(used[*got[i]]);
          used[*got[i]] = true;
          ++count;
          total += sim[i * cols + *got[i]];
        }
        const auto best = oracle::best_matching(sim, allowed, rows, cols);
        EXPECT_EQ(count, best.first);
        EXPECT_NEAR(total, best.second, 1e-9);
      }
    }
  }
}

TEST(Evaluate, PerfectHypothesis)
{
  auto gt = frames(10);
  for (int f = 0; f < 10; ++f) {
    gt[f].entries = {entry(1, moving(f)), entry(2, {500, 100, 560, 150})};
  }
  const auto s = evaluate(gt, gt);
  EXPECT_EQ(s.mota, 1.0);
  EXPECT_EQ(s.motp, 1.0);
  EXPECT_EQ(s.fp, 0);
  EXPECT_EQ(s.fn, 0);
  EXPECT_EQ(s.idsw, 0);
  EXPECT_EQ(s.frag, 0);
  EXPECT_EQ(s.mt, 2);
  EXPECT_EQ(s.ml, 0);
  EXPECT_EQ(s.gt_total, 20);
  EXPECT_EQ(s.gt_tracks, 2);
}

TEST(Evaluate, EmptyHypothesis)
{
  auto gt = frames(4);
  for (int f = 0; f < 4; ++f) gt[f].entries = {entry(1, moving(f))};
  const auto s = evaluate(gt, {});
  EXPECT_EQ(s.mota, 0.0);
  EXPECT_EQ(s.fp, 0);
  EXPECT_EQ(s.idsw, 0);
  EXPECT_EQ(s.fn, 4);
  EXPECT_EQ(s.ml, 1);
  EXPECT_EQ(s.mt, 0);
}

TEST(Evaluate, SingleIdChange)
{
  auto gt = frames(10);
  auto hyp = frames(10);
  for (int f = 0; f < 10; ++f) {
    gt[f].entries = {entry(1, moving(f))};
    hyp[f].entries = {entry(f < 5 ? 1 : 2, moving(f))};
  }
  const auto s = evaluate(gt, hyp);
  EXPECT_EQ(s.idsw, 1);
  EXPECT_DOUBLE_EQ(s.mota, 0.9);
  EXPECT_EQ(s.frag, 0);
  EXPECT_EQ(s.fp, 0);
  EXPECT_EQ(s.fn, 0);
}

TEST(Evaluate, GapCountsFragmentAndSwitchAfterGap)
{
  auto gt = frames(10);
  auto hyp = frames(10);
  for (int f = 0; f < 10; ++f) {
    gt[f].entries = {entry(1, moving(f))};
    if (f < 3 || f > 5) hyp[f].entries = {entry(f < 3 ? 7 : 8, moving(f))};
  }
  const auto s = evaluate(gt, hyp);
  EXPECT_EQ(s.fn, 3);
  EXPECT_EQ(s.frag, 1);
  EXPECT_EQ(s.idsw, 1);  // compared with the last matched id, across the gap
  EXPECT_DOUBLE_EQ(s.mota, 1.0 - 4.0 / 10.0);
  EXPECT_EQ(s.mt, 0);  // coverage 0.7
  EXPECT_EQ(s.ml, 0);
}

TEST(Evaluate, PersistentCorrespondenceBeatsBetterIou)
{
  // Frame 1: hypothesis 5 (the established one) still passes the gate, so it
  // keeps the match even though hypothesis 6 overlaps better.
  auto gt = frames(2);
  auto hyp = frames(2);
  gt[0].entries = {entry(1, {0, 0, 100, 100})};
  gt[1].entries = {entry(1, {0, 0, 100, 100})};
  hyp[0].entries = {entry(5, {0, 0, 100, 100})};
  hyp[1].entries = {entry(5, {30, 0, 130, 100}), entry(6, {1, 0, 101, 100})};
  const auto s = evaluate(gt, hyp);
  EXPECT_EQ(s.idsw, 0);
  EXPECT_EQ(s.fp, 1);
  EXPECT_EQ(s.tp, 2);
}

TEST(Evaluate, GateAndCategoryFilter)
{
  auto gt = frames(1);
  auto hyp = frames(1);
  gt[0].entries = {entry(1, {0, 0, 100, 100}), entry(2, {200, 0, 240, 80}, "Pedestrian")};
  hyp[0].entries = {entry(1, {40, 0, 140, 100}), entry(2, {200, 0, 240, 80}, "Pedestrian")};
  // IoU of the cars is 60 / 140 < 0.5
  const auto all = evaluate(gt, hyp);
  EXPECT_EQ(all.tp, 1);
  EXPECT_EQ(all.fp, 1);
  EXPECT_EQ(all.fn, 1);
  EXPECT_EQ(evaluate(gt, hyp, {0.4, std::nullopt}).tp, 2);
  const auto cars = evaluate(gt, hyp, {0.5, std::string("Car")});
  EXPECT_EQ(cars.gt_total, 1);
  EXPECT_EQ(cars.tp, 0);
  EXPECT_EQ(cars.mota, -1.0);
}

TEST(Evaluate, EmptyGroundTruthConvention)
{
  EXPECT_EQ(evaluate({}, {}).mota, 1.0);
  auto gt = frames(1);
  auto hyp = frames(1);
  hyp[0].entries = {entry(1, {0, 0, 1, 1})};
  EXPECT_TRUE(std::isinf(evaluate(gt, hyp).mota));
}

TEST(Evaluate, HypothesisBeyondGroundTruthIsDataError)
{
  auto gt = frames(2);
  auto hyp = frames(4);
  hyp[3].entries = {entry(1, {0, 0, 1, 1})};
  EXPECT_THROW(evaluate(gt, hyp), DataError);
  hyp[3].entries.clear();
  EXPECT_NO_THROW(evaluate(gt, hyp));
}

TEST(EvaluateProperties, SelfEvaluationIsPerfect)
{
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto gt = simulated_gt(seed);
    const auto s = evaluate(gt, gt);
    EXPECT_EQ(s.mota, 1.0);
    EXPECT_EQ(s.idsw, 0);
    EXPECT_EQ(s.frag, 0);
    EXPECT_EQ(s.fp, 0);
    EXPECT_EQ(s.fn, 0);
  }
}

TEST(EvaluateProperties, InvariantUnderHypothesisRelabeling)
{
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    sim::RandomScenarioOptions options;
    options.length = 150;
    const auto scenario = sim::random_scenario(options, seed);
    const auto gt = sim::generate_ground_truth(scenario);
    const auto dets = sim::degrade(gt, {0.3, 0.3, 2.0, 0.1, seed});
    SequenceInput input;
    input.det2d = dets.det2d;
    input.det3d = dets.det3d;
    input.calib = scenario.calib;
    input.frame_count = scenario.length;
    TrackerConfig config;
    config.image = scenario.image;
    const auto hyp = run_sequence(input, config).results;
    auto relabeled = hyp;
    for (auto & fr : relabeled) {
      for (auto & e : fr.entries) e.id = 1000 + 7 * e.id;
    }
    const auto a = evaluate(gt.results(), hyp);
    const auto b = evaluate(gt.results(), relabeled);
    EXPECT_EQ(a.mota, b.mota);
    EXPECT_EQ(a.idsw, b.idsw);
    EXPECT_EQ(a.frag, b.frag);
    EXPECT_EQ(a.fp, b.fp);
    EXPECT_EQ(a.mt, b.mt);
  }
}

TEST(EvaluateProperties, MotaDecreasesWithDropout)
{
  // Over seeds, MOTA at a higher dropout should not exceed MOTA at a lower one
  // for at least 95% of (seed, level pair) comparisons.
  const std::vector<double> levels{0.0, 0.2, 0.4, 0.6, 0.8};
  int ordered = 0;
  int total = 0;
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    sim::RandomScenarioOptions options;
    options.length = 150;
    const auto scenario = sim::random_scenario(options, seed);
    const auto gt = sim::generate_ground_truth(scenario);
    std::vector<double> mota;
    for (double p : levels) {
      const auto dets = sim::degrade(gt, {p, p, 1.0, 0.05, seed});
      SequenceInput input;
      input.det2d = dets.det2d;
      input.det3d = dets.det3d;
      input.calib = scenario.calib;
      input.frame_count = scenario.length;
      TrackerConfig config;
      config.image = scenario.image;
      mota.push_back(evaluate(gt.results(), run_sequence(input, config).results).mota);
    }
    for (std::size_t k = 0; k + 1 < mota.size(); ++k) {
      ++total;
      if (mota[k + 1] <= mota[k]) ++ordered;
    }
  }
  EXPECT_GE(ordered, static_cast<int>(std::ceil(0.95 * total))) << ordered << " of " << total;
}
