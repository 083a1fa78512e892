#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "bytemot/bytemot.hpp"

using namespace bytemot;

namespace {

TrackRecord<Box2D> rec(int frame, std::int64_t id, double x, double score = 1.0) {
  return {frame, id, Box2D::from_tlwh(x, 0, 50, 100), score, 0};
}

// One gt object per slot, spaced far apart.
TrackOutput<Box2D> slots_gt(int n) {
  TrackOutput<Box2D> gt;
  for (int i = 0; i < n; ++i) gt.records.push_back(rec(1, i + 1, 1000.0 * i));
  return gt;
}

struct Scored {
  double score;
  int target;  // gt slot this prediction hits, -1 for a miss far away
};

TrackOutput<Box2D> slots_pred(const std::vector<Scored>& ps) {
  TrackOutput<Box2D> pred;
  std::int64_t id = 1;
  for (const auto& p : ps) {
    const double x = p.target >= 0 ? 1000.0 * p.target + 2.0 : 1e6 + 1000.0 * static_cast<double>(id);
    pred.records.push_back(rec(1, id++, x, p.score));
  }
  return pred;
}

// Table-driven AMOTA: enumerate thresholds, count TP/FP/FN by construction,
// pick the smallest recall >= r at each grid point, average clamped sMOTA.
double amota_table(int n_gt, const std::vector<Scored>& ps, int points = 40) {
  std::vector<double> thresholds;
  for (const auto& p : ps) thresholds.push_back(p.score);
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  struct Row { double recall; int tp, fp, fn; };
  std::vector<Row> rows;
  for (double t : thresholds) {
    int tp = 0, fp = 0;
    for (const auto& p : ps) {
      if (p.score < t) continue;
      (p.target >= 0 ? tp : fp) += 1;
    }
    rows.push_back({static_cast<double>(tp) / n_gt, tp, fp, n_gt - tp});
  }
  double sum = 0.0;
  for (int k = 1; k <= points; ++k) {
    const double r = static_cast<double>(k) / points;
    const Row* pick = nullptr;
    for (const auto& row : rows) {
      if (row.recall + 1e-12 >= r && (!pick || row.recall < pick->recall)) pick = &row;
    }
    if (!pick) continue;
    const double raw = 1.0 - (pick->fp + pick->fn - (1.0 - r) * n_gt) / (r * n_gt);
    sum += std::min(1.0, std::max(0.0, raw));
  }
  return sum / points;
}

}  // namespace

TEST(ClearMot, IdenticalOutputHasNoErrors) {
  const auto sc = generate_scenario<Box2D>(benchmark_suite(1, 3)[0], 3);
  const auto c = clear_mot(sc.gt, sc.gt);
  EXPECT_EQ(c.mota, 1.0);
  EXPECT_EQ(c.fp, 0);
  EXPECT_EQ(c.fn, 0);
  EXPECT_EQ(c.ids, 0);
  EXPECT_EQ(c.tp, c.gt);
}

TEST(ClearMot, ScriptedCaseGivesPointSix) {
  TrackOutput<Box2D> gt, pred;
  for (int f = 1; f <= 10; ++f) gt.records.push_back(rec(f, 1, 10.0 * f));
  for (int f = 1; f <= 10; ++f) {
    if (f == 4 || f == 5) continue;               // 2 misses
    pred.records.push_back(rec(f, f <= 3 ? 7 : 8, 10.0 * f));  // switch at frame 6
  }
  pred.records.push_back(rec(7, 9, 5000.0));     // 1 spurious box
  pred.sort();
  const auto c = clear_mot(gt, pred);
  EXPECT_EQ(c.fn, 2);
  EXPECT_EQ(c.fp, 1);
  EXPECT_EQ(c.ids, 1);
  EXPECT_EQ(c.gt, 10);
  EXPECT_EQ(c.mota, 1.0 - (1.0 + 1.0 + 2.0) / 10.0);
  EXPECT_EQ(to_key_value(c).substr(0, 10), "MOTA=0.600");
}

TEST(ClearMot, EmptyPredictionsScoreZero) {
  const auto gt = slots_gt(6);
  const auto c = clear_mot(gt, TrackOutput<Box2D>{});
  EXPECT_EQ(c.fn, 6);
  EXPECT_EQ(c.mota, 0.0);
}

TEST(ClearMot, EmptyGroundTruthIsUndefined) {
  const auto c = clear_mot(TrackOutput<Box2D>{}, slots_gt(2));
  EXPECT_FALSE(c.mota_defined);
  EXPECT_EQ(c.fp, 2);
  EXPECT_THROW(mota_from_counts(0, 0, 0, 0), std::invalid_argument);
}

TEST(ClearMot, MatchingStaysWithinClass) {
  auto gt = slots_gt(1);
  auto pred = slots_gt(1);
  pred.records[0].class_id = 3;
  const auto c = clear_mot(gt, pred);
  EXPECT_EQ(c.tp, 0);
  EXPECT_EQ(c.fp, 1);
  EXPECT_EQ(c.fn, 1);
}

TEST(ClearMot, ThreeDGateIsCenterDistance) {
  TrackOutput<Box3D> gt, near, far;
  gt.records.push_back({1, 1, Box3D{0, 0, 0, 0, 4, 2, 1.5}, 1.0, 2});
  near.records.push_back({1, 1, Box3D{1.5, 0.5, 0, 1.0, 4, 2, 1.5}, 1.0, 2});
  far.records.push_back({1, 1, Box3D{2.5, 0, 0, 0, 4, 2, 1.5}, 1.0, 2});
  EXPECT_EQ(clear_mot(gt, near).tp, 1);
  EXPECT_EQ(clear_mot(gt, far).tp, 0);
}

TEST(ClearMot, MoreErrorsNeverRaiseMota) {
  std::mt19937_64 rng(61);
  std::uniform_int_distribution<int> n(0, 40);
  for (int t = 0; t < 200; ++t) {
    const int ids = n(rng), fp = n(rng), fn = n(rng), gt = 1 + n(rng);
    const double m = mota_from_counts(ids, fp, fn, gt);
    EXPECT_LE(mota_from_counts(ids + 1, fp, fn, gt), m);
    EXPECT_LE(mota_from_counts(ids, fp + 1, fn, gt), m);
    EXPECT_LE(mota_from_counts(ids, fp, fn + 1, gt), m);
  }
}

TEST(Idf1, IdenticalIsOne) {
  const auto sc = generate_scenario<Box2D>(crossing_scenario(), 1);
  EXPECT_EQ(idf1(sc.gt, sc.gt), 1.0);
}

TEST(Idf1, EvenSplitIsHalf) {
  TrackOutput<Box2D> gt, pred;
  for (int f = 1; f <= 10; ++f) {
    gt.records.push_back(rec(f, 1, 10.0 * f));
    pred.records.push_back(rec(f, f <= 5 ? 1 : 2, 10.0 * f));
  }
  // Either mapping (gt 1 -> pred 1 or pred 2) yields IDTP 5, IDFP 5, IDFN 5.
  const auto r = identity_scores(gt, pred);
  EXPECT_EQ(r.idtp, 5);
  EXPECT_EQ(r.idfp, 5);
  EXPECT_EQ(r.idfn, 5);
  EXPECT_EQ(r.idf1, 2.0 * 5 / (2.0 * 5 + 5 + 5));
}

TEST(Idf1, EmptyPredictionsScoreZero) {
  EXPECT_EQ(idf1(slots_gt(3), TrackOutput<Box2D>{}), 0.0);
}

TEST(Smota, PerfectTrackingAtAnyRecall) {
  for (double r : {0.1, 0.5, 1.0}) EXPECT_EQ(smota_from_counts(0, 0, 0, 100, r), 1.0);
  const auto gt = slots_gt(4);
  EXPECT_EQ(smota_r(gt, gt, 1.0), 1.0);
}

TEST(Smota, RecallExactlyRHasNoPenalty) {
  EXPECT_EQ(smota_from_counts(0, 0, 50, 100, 0.5), 1.0);
}

TEST(Smota, ExcessPenaltyClampsToZero) {
  EXPECT_EQ(smota_from_counts(10, 60, 50, 100, 0.5), 0.0);
  // Hand arithmetic: r = 0.5, P = 100, IDS + FP + FN = 5 + 5 + 50.
  // 1 - (60 - 50) / 50 = 0.8.
  EXPECT_DOUBLE_EQ(smota_from_counts(5, 5, 50, 100, 0.5), 0.8);
}

TEST(Smota, AlwaysInUnitInterval) {
  std::mt19937_64 rng(67);
  std::uniform_int_distribution<int> n(0, 300);
  std::uniform_real_distribution<double> r(0.01, 1.0);
  for (int t = 0; t < 500; ++t) {
    const double v = smota_from_counts(n(rng), n(rng), n(rng), 1 + n(rng), r(rng));
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  EXPECT_THROW(smota_from_counts(0, 0, 0, 10, 0.0), std::invalid_argument);
  EXPECT_THROW(smota_from_counts(0, 0, 0, 0, 0.5), std::invalid_argument);
}

TEST(Amota, PerfectTrackingIsOne) {
  const auto sc = generate_scenario<Box2D>(crossing_scenario(), 2);
  auto pred = sc.gt;
  for (auto& r : pred.records) r.score = 0.9;
  const auto rep = amota(sc.gt, pred);
  EXPECT_EQ(rep.amota, 1.0);
  EXPECT_EQ(rep.recalls.size(), 40u);
}

TEST(Amota, NoOutputIsZero) {
  EXPECT_EQ(amota(slots_gt(5), TrackOutput<Box2D>{}).amota, 0.0);
}

TEST(Amota, TopHalfCorrect) {
  // 20 objects; the 10 most confident outputs hit 10 of them, the other 10
  // outputs land nowhere. Recall tops out at 0.5, so grid points up to 0.5
  // score 1 and the remaining 20 of 40 score 0.
  std::vector<Scored> ps;
  for (int i = 0; i < 10; ++i) ps.push_back({0.95 - 0.04 * i, i});
  for (int i = 0; i < 10; ++i) ps.push_back({0.5 - 0.04 * i, -1});
  const auto rep = amota(slots_gt(20), slots_pred(ps));
  EXPECT_EQ(rep.amota, 0.5);
  EXPECT_EQ(rep.amota, amota_table(20, ps));
}

TEST(Amota, InterleavedOutputsMatchTable) {
  std::mt19937_64 rng(71);
  for (int t = 0; t < 20; ++t) {
    const int n_gt = 5 + t % 11;
    std::vector<Scored> ps;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < n_gt; ++i) if (u(rng) < 0.8) ps.push_back({u(rng), i});
    const int misses = static_cast<int>(u(rng) * n_gt);
    for (int i = 0; i < misses; ++i) ps.push_back({u(rng), -1});
    const auto rep = amota(slots_gt(n_gt), slots_pred(ps));
    EXPECT_NEAR(rep.amota, amota_table(n_gt, ps), 1e-12) << "case " << t;
    EXPECT_GE(rep.amota, 0.0);
    EXPECT_LE(rep.amota, 1.0);
  }
}

TEST(Amota, MinRecallDropsLowPoints) {
  AmotaOptions opt;
  opt.min_recall = 0.1;
  EXPECT_EQ(recall_grid(opt).size(), 37u);
  EXPECT_DOUBLE_EQ(recall_grid(opt).front(), 0.1);
}

TEST(Amota, InvariantUnderMonotoneRescaling) {
  const auto sc = generate_scenario<Box2D>(benchmark_suite(1, 12)[0], 12);
  const auto pred = run_sequence(sc.detections, validate_config({}));
  auto rescaled = pred;
  for (auto& r : rescaled.records) r.score = 0.05 + 0.9 * r.score * r.score * r.score;
  EXPECT_EQ(amota(sc.gt, pred).amota, amota(sc.gt, rescaled).amota);
}

TEST(Amota, RejectsUnscoredAndEmptyGroundTruth) {
  auto pred = slots_gt(2);
  pred.records[0].score = std::nan("");
  EXPECT_THROW(amota(slots_gt(2), pred), std::invalid_argument);
  EXPECT_THROW(amota(TrackOutput<Box2D>{}, slots_gt(2)), std::invalid_argument);
}

TEST(Reports, KeyValueAndJson) {
  const auto gt = slots_gt(3);
  const auto c = clear_mot(gt, gt);
  EXPECT_NE(to_key_value(c).find("MOTA=1.000"), std::string::npos);
  const auto j = to_json(c);
  EXPECT_EQ(j.at("mota").get<double>(), 1.0);
  EXPECT_EQ(j.at("gt").get<int>(), 3);
  EXPECT_NE(to_key_value(identity_scores(gt, gt)).find("IDF1=1.000"), std::string::npos);
}

TEST(MeanClassMota, AveragesPerClass) {
  TrackOutput<Box2D> gt, pred;
  gt.records = {rec(1, 1, 0), rec(1, 2, 1000)};
  gt.records[1].class_id = 1;
  pred.records = {rec(1, 1, 0)};
  EXPECT_DOUBLE_EQ(mean_class_mota(gt, pred), 0.5);
}
