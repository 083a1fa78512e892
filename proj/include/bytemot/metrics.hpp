#pragma once

// Tracking evaluation: CLEAR MOT counts and MOTA, IDF1, recall-adjusted sMOTA
// and its average over a recall grid (AMOTA).
//
// Ground truth and predictions are both TrackOutput values. A prediction can
// match a ground-truth box of the same class when IoU >= threshold (2D,
// default 0.5) or when the BEV center distance <= threshold (3D, default 2 m).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bytemot/assignment.hpp"
#include "bytemot/tracker.hpp"

namespace bytemot {

struct ClearReport {
  double mota = 0.0;
  bool mota_defined = true;  // false when the ground truth is empty
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t ids = 0;
  std::int64_t gt = 0;

  double recall() const { return gt > 0 ? static_cast<double>(tp) / static_cast<double>(gt) : 0.0; }
};

struct AmotaReport {
  double amota = 0.0;
  std::vector<double> recalls;         // recall grid
  std::vector<double> smota;           // sMOTA at each grid point
  std::vector<double> thresholds;      // confidence threshold chosen, NaN if unreachable
};

struct AmotaOptions {
  int num_points = 40;
  double min_recall = 0.0;  // grid points below this are left out
};

template <class Box>
constexpr double default_match_threshold() {
  if constexpr (std::is_same_v<Box, Box2D>) {
    return 0.5;
  } else {
    return 2.0;
  }
}

namespace detail {

// Matching similarity and its gate: IoU >= t in 2D, -distance >= -t in 3D.
template <class Box>
double match_similarity(const Box& gt, const Box& pred) {
  if constexpr (std::is_same_v<Box, Box2D>) {
    return iou_2d(gt, pred);
  } else {
    return -std::hypot(gt.x - pred.x, gt.y - pred.y);
  }
}

template <class Box>
double match_gate(double threshold) {
  if constexpr (std::is_same_v<Box, Box2D>) {
    return threshold;
  } else {
    return -threshold;
  }
}

template <class Box>
std::map<int, std::vector<const TrackRecord<Box>*>> group_by_frame(const TrackOutput<Box>& out) {
  std::map<int, std::vector<const TrackRecord<Box>*>> frames;
  for (const auto& r : out.records) frames[r.frame].push_back(&r);
  return frames;
}

template <class Box>
std::set<int> frame_union(const std::map<int, std::vector<const TrackRecord<Box>*>>& a,
                          const std::map<int, std::vector<const TrackRecord<Box>*>>& b) {
  std::set<int> frames;
  for (const auto& [f, _] : a) frames.insert(f);
  for (const auto& [f, _] : b) frames.insert(f);
  return frames;
}

}  // namespace detail

/// Eq. MOTA = 1 - (IDS + FP + FN) / GT.
inline double mota_from_counts(std::int64_t ids, std::int64_t fp, std::int64_t fn, std::int64_t gt) {
  if (gt <= 0) throw std::invalid_argument("MOTA needs at least one ground-truth box");
  return 1.0 - static_cast<double>(ids + fp + fn) / static_cast<double>(gt);
}

template <class Box>
ClearReport clear_mot(const TrackOutput<Box>& gt, const TrackOutput<Box>& pred,
                      double threshold = default_match_threshold<Box>()) {
  const auto gt_frames = detail::group_by_frame(gt);
  const auto pred_frames = detail::group_by_frame(pred);
  const double gate = detail::match_gate<Box>(threshold);
  const std::vector<const TrackRecord<Box>*> none;

  ClearReport rep;
  std::unordered_map<std::int64_t, std::int64_t> last_match;  // gt id -> pred id
  for (int frame : detail::frame_union(gt_frames, pred_frames)) {
    const auto git = gt_frames.find(frame);
    const auto pit = pred_frames.find(frame);
    const auto& g = git == gt_frames.end() ? none : git->second;
    const auto& p = pit == pred_frames.end() ? none : pit->second;

    std::vector<char> g_done(g.size(), 0), p_done(p.size(), 0);
    std::vector<std::pair<std::size_t, std::size_t>> matches;

    auto sim_of = [&](std::size_t i, std::size_t j) {
      if (g[i]->class_id != p[j]->class_id) return -std::numeric_limits<double>::infinity();
      return detail::match_similarity(g[i]->box, p[j]->box);
    };

    // Correspondences from earlier frames persist while still within the gate.
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto lm = last_match.find(g[i]->id);
      if (lm == last_match.end()) continue;
      for (std::size_t j = 0; j < p.size(); ++j) {
        if (!p_done[j] && p[j]->id == lm->second && sim_of(i, j) >= gate) {
          g_done[i] = p_done[j] = 1;
          matches.emplace_back(i, j);
          break;
        }
      }
    }

    std::vector<std::size_t> gi, pj;
    for (std::size_t i = 0; i < g.size(); ++i) if (!g_done[i]) gi.push_back(i);
    for (std::size_t j = 0; j < p.size(); ++j) if (!p_done[j]) pj.push_back(j);
    SimilarityMatrix sim(gi.size(), pj.size());
    for (std::size_t r = 0; r < gi.size(); ++r) {
      for (std::size_t c = 0; c < pj.size(); ++c) sim(r, c) = sim_of(gi[r], pj[c]);
    }
    for (const auto& [r, c] : solve_assignment(sim, gate).matches) matches.emplace_back(gi[r], pj[c]);

    for (const auto& [i, j] : matches) {
      const auto [it, inserted] = last_match.try_emplace(g[i]->id, p[j]->id);
      if (!inserted && it->second != p[j]->id) {
        ++rep.ids;
        it->second = p[j]->id;
      }
    }
    const auto m = static_cast<std::int64_t>(matches.size());
    rep.tp += m;
    rep.fn += static_cast<std::int64_t>(g.size()) - m;
    rep.fp += static_cast<std::int64_t>(p.size()) - m;
    rep.gt += static_cast<std::int64_t>(g.size());
  }

  if (rep.gt > 0) {
    rep.mota = mota_from_counts(rep.ids, rep.fp, rep.fn, rep.gt);
  } else {
    rep.mota_defined = false;
    rep.mota = std::numeric_limits<double>::quiet_NaN();
  }
  return rep;
}

struct IdentityReport {
  double idf1 = 0.0;
  std::int64_t idtp = 0;
  std::int64_t idfp = 0;
  std::int64_t idfn = 0;
};

/// Identity F1 under the one-to-one trajectory mapping maximizing IDTP.
template <class Box>
IdentityReport identity_scores(const TrackOutput<Box>& gt, const TrackOutput<Box>& pred,
                               double threshold = default_match_threshold<Box>()) {
  const auto gt_frames = detail::group_by_frame(gt);
  const auto pred_frames = detail::group_by_frame(pred);
  const double gate = detail::match_gate<Box>(threshold);

  std::map<std::int64_t, std::size_t> gt_index, pred_index;
  for (const auto& r : gt.records) gt_index.try_emplace(r.id, gt_index.size());
  for (const auto& r : pred.records) pred_index.try_emplace(r.id, pred_index.size());

  SimilarityMatrix overlap(gt_index.size(), pred_index.size(), 0.0);
  for (const auto& [frame, g] : gt_frames) {
    const auto pit = pred_frames.find(frame);
    if (pit == pred_frames.end()) continue;
    for (const auto* a : g) {
      for (const auto* b : pit->second) {
        if (a->class_id == b->class_id && detail::match_similarity(a->box, b->box) >= gate) {
          overlap(gt_index[a->id], pred_index[b->id]) += 1.0;
        }
      }
    }
  }

  IdentityReport rep;
  double idtp = 0.0;
  for (const auto& [i, j] : solve_assignment(overlap, 0.0).matches) idtp += overlap(i, j);
  rep.idtp = static_cast<std::int64_t>(std::llround(idtp));
  rep.idfn = static_cast<std::int64_t>(gt.records.size()) - rep.idtp;
  rep.idfp = static_cast<std::int64_t>(pred.records.size()) - rep.idtp;
  const std::int64_t denom = 2 * rep.idtp + rep.idfp + rep.idfn;
  rep.idf1 = denom > 0 ? 2.0 * static_cast<double>(rep.idtp) / static_cast<double>(denom) : 1.0;
  return rep;
}

template <class Box>
double idf1(const TrackOutput<Box>& gt, const TrackOutput<Box>& pred,
            double threshold = default_match_threshold<Box>()) {
  return identity_scores(gt, pred, threshold).idf1;
}

/// max(0, 1 - (IDS + FP + FN - (1 - r) P) / (r P)), clamped to [0, 1].
inline double smota_from_counts(std::int64_t ids, std::int64_t fp, std::int64_t fn,
                                std::int64_t num_gt, double recall) {
  if (!(recall > 0.0 && recall <= 1.0)) throw std::invalid_argument("recall must lie in (0, 1]");
  if (num_gt <= 0) throw std::invalid_argument("sMOTA needs at least one ground-truth box");
  const double p = static_cast<double>(num_gt);
  const double v = 1.0 - (static_cast<double>(ids + fp + fn) - (1.0 - recall) * p) / (recall * p);
  return std::clamp(v, 0.0, 1.0);
}

template <class Box>
double smota_r(const TrackOutput<Box>& gt, const TrackOutput<Box>& pred_at_recall, double recall,
               double threshold = default_match_threshold<Box>()) {
  const ClearReport c = clear_mot(gt, pred_at_recall, threshold);
  return smota_from_counts(c.ids, c.fp, c.fn, c.gt, recall);
}

template <class Box>
TrackOutput<Box> filter_by_score(const TrackOutput<Box>& pred, double min_score) {
  TrackOutput<Box> out;
  out.config = pred.config;
  out.frame_count = pred.frame_count;
  for (const auto& r : pred.records) {
    if (r.score >= min_score) out.records.push_back(r);
  }
  return out;
}

inline std::vector<double> recall_grid(const AmotaOptions& opt) {
  if (opt.num_points < 1) throw std::invalid_argument("the recall grid needs at least one point");
  std::vector<double> grid;
  for (int k = 1; k <= opt.num_points; ++k) {
    const double r = static_cast<double>(k) / opt.num_points;
    if (r + 1e-12 >= opt.min_recall) grid.push_back(r);
  }
  return grid;
}

/// Sweeps the confidence threshold over observed prediction scores; each
/// recall grid point r uses the threshold whose recall is the smallest one
/// not below r. Unreachable points score 0.
template <class Box>
AmotaReport amota(const TrackOutput<Box>& gt, const TrackOutput<Box>& pred,
                  const AmotaOptions& opt = {}, double threshold = default_match_threshold<Box>()) {
  for (const auto& r : pred.records) {
    if (!std::isfinite(r.score)) throw std::invalid_argument("AMOTA needs scored predictions");
  }
  if (gt.records.empty()) throw std::invalid_argument("AMOTA needs a non-empty ground truth");

  std::vector<double> scores;
  for (const auto& r : pred.records) scores.push_back(r.score);
  std::sort(scores.begin(), scores.end(), std::greater<>());
  scores.erase(std::unique(scores.begin(), scores.end()), scores.end());

  struct Point {
    double threshold;
    ClearReport report;
  };
  std::vector<Point> sweep;
  sweep.reserve(scores.size());
  for (double s : scores) sweep.push_back({s, clear_mot(gt, filter_by_score(pred, s), threshold)});

  AmotaReport rep;
  rep.recalls = recall_grid(opt);
  double total = 0.0;
  for (double r : rep.recalls) {
    const Point* best = nullptr;
    for (const auto& pt : sweep) {
      if (pt.report.recall() + 1e-12 < r) continue;
      // Highest threshold wins ties in recall.
      if (!best || pt.report.recall() < best->report.recall()) best = &pt;
    }
    if (!best) {
      rep.smota.push_back(0.0);
      rep.thresholds.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    const auto& c = best->report;
    const double v = smota_from_counts(c.ids, c.fp, c.fn, c.gt, r);
    rep.smota.push_back(v);
    rep.thresholds.push_back(best->threshold);
    total += v;
  }
  rep.amota = total / static_cast<double>(rep.recalls.size());
  return rep;
}

/// Plain mean of per-class MOTA over classes present in the ground truth.
template <class Box>
double mean_class_mota(const TrackOutput<Box>& gt, const TrackOutput<Box>& pred,
                       double threshold = default_match_threshold<Box>()) {
  std::set<int> classes;
  for (const auto& r : gt.records) classes.insert(r.class_id);
  if (classes.empty()) throw std::invalid_argument("mean MOTA needs a non-empty ground truth");
  double total = 0.0;
  for (int c : classes) {
    TrackOutput<Box> g, p;
    for (const auto& r : gt.records) if (r.class_id == c) g.records.push_back(r);
    for (const auto& r : pred.records) if (r.class_id == c) p.records.push_back(r);
    total += clear_mot(g, p, threshold).mota;
  }
  return total / static_cast<double>(classes.size());
}

// ---- report serialization ------------------------------------------------

inline std::string format_fixed(double v, int digits = 3) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

inline std::string to_key_value(const ClearReport& r) {
  std::ostringstream os;
  os << "MOTA=" << format_fixed(r.mota) << '\n'
     << "FP=" << r.fp << '\n'
     << "FN=" << r.fn << '\n'
     << "IDS=" << r.ids << '\n'
     << "GT=" << r.gt << '\n'
     << "TP=" << r.tp << '\n';
  return os.str();
}

inline std::string to_key_value(const IdentityReport& r) {
  std::ostringstream os;
  os << "IDF1=" << format_fixed(r.idf1) << '\n'
     << "IDTP=" << r.idtp << '\n'
     << "IDFP=" << r.idfp << '\n'
     << "IDFN=" << r.idfn << '\n';
  return os.str();
}

inline std::string to_key_value(const AmotaReport& r) {
  std::ostringstream os;
  os << "AMOTA=" << format_fixed(r.amota) << '\n'
     << "RECALL_POINTS=" << r.recalls.size() << '\n';
  return os.str();
}

inline nlohmann::json to_json(const ClearReport& r) {
  nlohmann::json j = {{"fp", r.fp}, {"fn", r.fn}, {"ids", r.ids}, {"gt", r.gt}, {"tp", r.tp},
                      {"mota_defined", r.mota_defined}};
  j["mota"] = r.mota_defined ? nlohmann::json(r.mota) : nlohmann::json(nullptr);
  return j;
}

inline nlohmann::json to_json(const IdentityReport& r) {
  return {{"idf1", r.idf1}, {"idtp", r.idtp}, {"idfp", r.idfp}, {"idfn", r.idfn}};
}

inline nlohmann::json to_json(const AmotaReport& r) {
  nlohmann::json thresholds = nlohmann::json::array();
  for (double t : r.thresholds) thresholds.push_back(std::isnan(t) ? nlohmann::json(nullptr) : nlohmann::json(t));
  return {{"amota", r.amota}, {"recalls", r.recalls}, {"smota", r.smota}, {"thresholds", thresholds}};
}

}  // namespace bytemot
