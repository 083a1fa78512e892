#pragma once

// Hierarchical two-pass association with track lifecycle management.
//
// Each frame: split detections at tau into high and low score sets, advance
// every track with its motion model, match high-score detections against all
// tracks (active and lost), match low-score detections against whatever
// tracks remain, age or delete the leftovers and open new tracks for
// unmatched high-score detections. Low-score detections never open tracks.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "bytemot/assignment.hpp"
#include "bytemot/config.hpp"
#include "bytemot/geometry.hpp"
#include "bytemot/motion.hpp"

namespace bytemot {

template <class Box>
struct Detection {
  Box box;
  double score = 1.0;
  int class_id = 0;
  std::optional<Velocity> velocity;  // m/frame, 3D only

  friend bool operator==(const Detection&, const Detection&) = default;
};

enum class TrackStatus { Active, Lost };

template <class Box>
using StateFor = decltype(kf_init(std::declval<const Box&>(), std::declval<const NoiseConfig&>()));

template <class Box>
struct Tracklet {
  std::int64_t id = 0;
  StateFor<Box> state;
  TrackStatus status = TrackStatus::Active;
  int class_id = 0;
  int start_frame = 0;
  int last_matched_frame = 0;
  int frames_since_match = 0;
  double last_score = 0.0;
  Box last_box{};  // posterior box at the last match
};

template <class Box>
struct TrackedObject {
  std::int64_t id = 0;
  Box box{};
  double score = 0.0;
  int class_id = 0;

  friend bool operator==(const TrackedObject&, const TrackedObject&) = default;
};

enum class DetectionFate { MatchedFirst, MatchedSecond, NewTrack, DiscardedLow };

template <class Box>
struct FrameResult {
  int frame = 0;
  std::vector<TrackedObject<Box>> objects;  // active tracks, ascending id
  std::vector<DetectionFate> fates;         // one per input detection
  std::vector<std::int64_t> fate_track_ids; // track bound to each detection, 0 if discarded
};

/// High-score detections (score > tau) and the rest, order preserved.
template <class Box>
struct ScoreSplit {
  std::vector<Detection<Box>> high;
  std::vector<Detection<Box>> low;
};

template <class Box>
ScoreSplit<Box> split_detections(std::span<const Detection<Box>> detections, double tau) {
  ScoreSplit<Box> out;
  for (const auto& d : detections) (d.score > tau ? out.high : out.low).push_back(d);
  return out;
}

inline void split_indices(std::span<const double> scores, double tau,
                          std::vector<std::size_t>& high, std::vector<std::size_t>& low) {
  high.clear();
  low.clear();
  for (std::size_t i = 0; i < scores.size(); ++i) (scores[i] > tau ? high : low).push_back(i);
}

/// Boxes entering the similarity computation after motion prediction. A
/// detection is compared to a track either as (raw box vs forward-predicted
/// box) or as (backward-predicted box vs the track's last box).
template <class Box>
struct MotionPrediction {
  std::vector<Box> forward;          // per track, state at the current frame
  std::vector<Box> last;             // per track, box at its last match
  std::vector<char> track_backward;  // per track, compare against `last`
  std::vector<Box> detection_raw;
  std::vector<Box> detection_backward;  // raw box when no velocity is known
  std::vector<char> has_velocity;
  MotionStrategy strategy = MotionStrategy::KalmanOnly;
};

/// Advances every track by one frame and collects the boxes used for
/// association under the configured motion strategy.
template <class Box>
MotionPrediction<Box> predict_tracks(std::span<Tracklet<Box>> tracks, const TrackerConfig& config,
                                     std::span<const Detection<Box>> detections) {
  const bool three_d = std::is_same_v<Box, Box3D>;
  if (!three_d && config.motion != MotionStrategy::KalmanOnly) {
    throw ConfigError("detected-velocity motion strategies require 3D boxes");
  }
  if (three_d != (config.mode == Mode::ThreeD)) {
    throw DimensionMismatch("box dimensionality does not match the tracker mode");
  }
  const NoiseConfig noise = config.effective_noise();

  MotionPrediction<Box> p;
  p.strategy = config.motion;
  p.forward.reserve(tracks.size());
  for (auto& t : tracks) {
    t.state = kf_predict(t.state, noise);
    p.forward.push_back(state_to_box(t.state));
    p.last.push_back(t.last_box);
    bool backward = false;
    switch (config.motion) {
      case MotionStrategy::KalmanOnly: backward = false; break;
      case MotionStrategy::DetectedVelocityOnly: backward = true; break;
      case MotionStrategy::Complementary: backward = t.status == TrackStatus::Active; break;
    }
    p.track_backward.push_back(backward);
  }

  for (const auto& d : detections) {
    p.detection_raw.push_back(d.box);
    if constexpr (std::is_same_v<Box, Box3D>) {
      const auto back = backward_predict(d.box, d.velocity);
      p.detection_backward.push_back(back.value_or(d.box));
      p.has_velocity.push_back(back.has_value());
    } else {
      p.detection_backward.push_back(d.box);
      p.has_velocity.push_back(0);
    }
  }
  return p;
}

namespace detail {

template <class Box>
double box_similarity(const Box& a, const Box& b) {
  if constexpr (std::is_same_v<Box, Box2D>) {
    return iou_2d(a, b);
  } else {
    return giou_3d(a, b);
  }
}

}  // namespace detail

/// Similarity between detection `i` and track `j` under the prediction.
template <class Box>
double predicted_similarity(const MotionPrediction<Box>& p, std::size_t i, std::size_t j) {
  if (!p.track_backward[j]) return detail::box_similarity(p.detection_raw[i], p.forward[j]);
  if (p.has_velocity[i]) return detail::box_similarity(p.detection_backward[i], p.last[j]);
  // Complementary without a detected velocity falls back to the raw box
  // against the Kalman prediction; velocity-only has nothing but the last box.
  if (p.strategy == MotionStrategy::Complementary) {
    return detail::box_similarity(p.detection_raw[i], p.forward[j]);
  }
  return detail::box_similarity(p.detection_raw[i], p.last[j]);
}

/// Rows are `det_idx` into the prediction's detections, columns `track_idx`.
/// Detections never match a track of another class.
template <class Box>
SimilarityMatrix association_similarity(const MotionPrediction<Box>& p,
                                        std::span<const Detection<Box>> detections,
                                        std::span<const Tracklet<Box>> tracks,
                                        std::span<const std::size_t> det_idx,
                                        std::span<const std::size_t> track_idx) {
  SimilarityMatrix sim(det_idx.size(), track_idx.size());
  for (std::size_t r = 0; r < det_idx.size(); ++r) {
    sim.row_ids[r] = det_idx[r];
    for (std::size_t c = 0; c < track_idx.size(); ++c) {
      const std::size_t i = det_idx[r];
      const std::size_t j = track_idx[c];
      sim(r, c) = detections[i].class_id == tracks[j].class_id
                      ? predicted_similarity(p, i, j)
                      : -std::numeric_limits<double>::infinity();
    }
  }
  for (std::size_t c = 0; c < track_idx.size(); ++c) sim.col_ids[c] = track_idx[c];
  return sim;
}

struct StepError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Online tracker for one sequence. Box is Box2D or Box3D.
template <class Box>
class ByteTracker {
 public:
  // Optional extra similarity for the first pass (e.g. appearance). Receives
  // the assembled geometric matrix and may rewrite it in place.
  using SimilarityHook = std::function<void(SimilarityMatrix&, std::span<const Detection<Box>>,
                                            std::span<const Tracklet<Box>>)>;

  explicit ByteTracker(TrackerConfig config) : config_(std::move(config)) {
    check_config(config_);
    if ((config_.mode == Mode::ThreeD) != std::is_same_v<Box, Box3D>) {
      throw DimensionMismatch("tracker mode does not match the box type");
    }
  }

  const TrackerConfig& config() const { return config_; }
  const std::vector<Tracklet<Box>>& tracks() const { return tracks_; }
  void set_first_similarity_hook(SimilarityHook hook) { hook_ = std::move(hook); }

  FrameResult<Box> step(int frame, std::span<const Detection<Box>> detections) {
    if (started_ && frame <= last_frame_) {
      throw StepError("frame index " + std::to_string(frame) + " does not follow frame " +
                      std::to_string(last_frame_));
    }
    for (const auto& d : detections) {
      if (!d.box.valid()) throw StepError("invalid detection box in frame " + std::to_string(frame));
      if (!(d.score >= 0.0 && d.score <= 1.0)) {
        throw StepError("detection score outside [0, 1] in frame " + std::to_string(frame));
      }
    }
    started_ = true;
    last_frame_ = frame;

    FrameResult<Box> result;
    result.frame = frame;
    result.fates.assign(detections.size(), DetectionFate::DiscardedLow);
    result.fate_track_ids.assign(detections.size(), 0);

    std::vector<double> scores;
    scores.reserve(detections.size());
    for (const auto& d : detections) scores.push_back(d.score);
    split_indices(scores, config_.tau, high_, low_);

    const auto prediction =
        predict_tracks(std::span<Tracklet<Box>>(tracks_), config_, detections);
    const NoiseConfig noise = config_.effective_noise();
    std::vector<char> matched(tracks_.size(), 0);

    auto associate = [&](const std::vector<std::size_t>& det_idx,
                         const std::vector<std::size_t>& track_idx, const GateTable& gates,
                         DetectionFate fate, bool first) {
      SimilarityMatrix sim = association_similarity(
          prediction, detections, std::span<const Tracklet<Box>>(tracks_), det_idx, track_idx);
      if (first && hook_) hook_(sim, detections, tracks_);
      std::vector<double> row_gates;
      row_gates.reserve(det_idx.size());
      for (std::size_t i : det_idx) row_gates.push_back(gates.for_class(detections[i].class_id));
      const Assignment a = solve_assignment(sim, std::span<const double>(row_gates));
      for (const auto& [r, c] : a.matches) {
        const auto& d = detections[det_idx[r]];
        auto& t = tracks_[track_idx[c]];
        t.state = kf_update(t.state, d.box, d.score, noise);
        t.status = TrackStatus::Active;
        t.frames_since_match = 0;
        t.last_matched_frame = frame;
        t.last_score = d.score;
        t.last_box = state_to_box(t.state);
        matched[track_idx[c]] = 1;
        result.fates[det_idx[r]] = fate;
        result.fate_track_ids[det_idx[r]] = t.id;
      }
      return a;
    };

    std::vector<std::size_t> all_tracks(tracks_.size());
    for (std::size_t j = 0; j < all_tracks.size(); ++j) all_tracks[j] = j;
    const Assignment first =
        associate(high_, all_tracks, config_.gate_first, DetectionFate::MatchedFirst, true);

    std::vector<std::size_t> remaining_tracks;
    for (std::size_t c : first.unmatched_tracklets) remaining_tracks.push_back(all_tracks[c]);
    std::vector<std::size_t> remaining_high;
    for (std::size_t r : first.unmatched_detections) remaining_high.push_back(high_[r]);

    if (config_.second_association && !low_.empty() && !remaining_tracks.empty()) {
      associate(low_, remaining_tracks, config_.gate_second, DetectionFate::MatchedSecond, false);
    }

    // Age unmatched tracks; drop the ones lost for longer than the buffer.
    std::vector<Tracklet<Box>> kept;
    kept.reserve(tracks_.size() + remaining_high.size());
    for (std::size_t j = 0; j < tracks_.size(); ++j) {
      auto& t = tracks_[j];
      if (!matched[j]) {
        t.status = TrackStatus::Lost;
        ++t.frames_since_match;
        if (t.frames_since_match > config_.track_buffer) continue;
      }
      kept.push_back(std::move(t));
    }
    tracks_ = std::move(kept);

    for (std::size_t i : remaining_high) {
      const auto& d = detections[i];
      Tracklet<Box> t;
      t.id = next_id_++;
      t.state = kf_init(d.box, config_.noise);
      t.status = TrackStatus::Active;
      t.class_id = d.class_id;
      t.start_frame = frame;
      t.last_matched_frame = frame;
      t.frames_since_match = 0;
      t.last_score = d.score;
      t.last_box = d.box;
      result.fates[i] = DetectionFate::NewTrack;
      result.fate_track_ids[i] = t.id;
      tracks_.push_back(std::move(t));
    }

    for (const auto& t : tracks_) {
      if (t.status == TrackStatus::Active) {
        result.objects.push_back({t.id, t.last_box, t.last_score, t.class_id});
      }
    }
    std::sort(result.objects.begin(), result.objects.end(),
              [](const auto& a, const auto& b) { return a.id < b.id; });
    return result;
  }

  FrameResult<Box> step(int frame, const std::vector<Detection<Box>>& detections) {
    return step(frame, std::span<const Detection<Box>>(detections));
  }

 private:
  TrackerConfig config_;
  std::vector<Tracklet<Box>> tracks_;
  std::int64_t next_id_ = 1;
  int last_frame_ = 0;
  bool started_ = false;
  SimilarityHook hook_;
  std::vector<std::size_t> high_, low_;
};

}  // namespace bytemot
