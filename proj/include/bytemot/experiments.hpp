#pragma once

// Harness experiments: threshold sweeps of the two-pass tracker against the
// single-association baseline, and 3D motion-strategy comparisons.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "bytemot/config.hpp"
#include "bytemot/metrics.hpp"
#include "bytemot/simharness.hpp"
#include "bytemot/tracker.hpp"

namespace bytemot {

struct SuiteScore {
  double mean_mota = 0.0;
  double mean_idf1 = 0.0;
  std::int64_t ids = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
};

template <class Box>
SuiteScore score_suite(const std::vector<Scenario<Box>>& scenarios, const TrackerConfig& config) {
  SuiteScore s;
  for (const auto& sc : scenarios) {
    const auto out = run_sequence(sc.detections, config);
    const auto c = clear_mot(sc.gt, out);
    s.mean_mota += c.mota;
    s.mean_idf1 += idf1(sc.gt, out);
    s.ids += c.ids;
    s.fp += c.fp;
    s.fn += c.fn;
  }
  if (!scenarios.empty()) {
    s.mean_mota /= static_cast<double>(scenarios.size());
    s.mean_idf1 /= static_cast<double>(scenarios.size());
  }
  return s;
}

template <class Box>
std::vector<Scenario<Box>> generate_suite(const std::vector<ScenarioSpec>& specs, std::uint64_t seed) {
  std::vector<Scenario<Box>> out;
  out.reserve(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    out.push_back(generate_scenario<Box>(specs[i], seed + 1000003ULL * (i + 1)));
  }
  return out;
}

struct SweepRow {
  double tau = 0.0;
  SuiteScore byte;
  SuiteScore baseline;
};

struct SweepTable {
  std::vector<SweepRow> rows;

  double byte_mota_spread() const { return spread([](const SweepRow& r) { return r.byte.mean_mota; }); }
  double baseline_mota_spread() const {
    return spread([](const SweepRow& r) { return r.baseline.mean_mota; });
  }

 private:
  template <class F>
  double spread(F f) const {
    if (rows.empty()) return 0.0;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& r : rows) {
      lo = std::min(lo, f(r));
      hi = std::max(hi, f(r));
    }
    return hi - lo;
  }
};

inline SweepTable tau_sweep(const std::vector<Scenario<Box2D>>& scenarios, const std::vector<double>& taus,
                            RawTrackerConfig base = {}) {
  SweepTable t;
  for (double tau : taus) {
    base.tau = tau;
    TrackerConfig cfg = validate_config(base);
    SweepRow row;
    row.tau = tau;
    row.byte = score_suite(scenarios, cfg);
    cfg.second_association = false;
    row.baseline = score_suite(scenarios, cfg);
    t.rows.push_back(row);
  }
  return t;
}

struct MotionAblationRow {
  MotionStrategy strategy = MotionStrategy::KalmanOnly;
  bool adaptive_r = false;
  SuiteScore score;
  double mean_amota = 0.0;
};

inline std::vector<MotionAblationRow> motion_ablation(const std::vector<Scenario<Box3D>>& scenarios,
                                                      bool include_adaptive = true) {
  std::vector<MotionAblationRow> rows;
  auto run = [&](MotionStrategy m, bool adaptive) {
    RawTrackerConfig raw;
    raw.mode = Mode::ThreeD;
    raw.motion = m;
    raw.adaptive_r = adaptive;
    const TrackerConfig cfg = validate_config(raw);
    MotionAblationRow row;
    row.strategy = m;
    row.adaptive_r = adaptive;
    row.score = score_suite(scenarios, cfg);
    for (const auto& sc : scenarios) row.mean_amota += amota(sc.gt, run_sequence(sc.detections, cfg)).amota;
    if (!scenarios.empty()) row.mean_amota /= static_cast<double>(scenarios.size());
    rows.push_back(row);
  };
  run(MotionStrategy::KalmanOnly, false);
  run(MotionStrategy::DetectedVelocityOnly, false);
  run(MotionStrategy::Complementary, false);
  if (include_adaptive) run(MotionStrategy::Complementary, true);
  return rows;
}

}  // namespace bytemot
