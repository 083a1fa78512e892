#pragma once

// Sequence-level driver: folds the per-frame tracker over a detection stream
// and assembles the trajectory set.

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bytemot/association.hpp"
#include "bytemot/config.hpp"

namespace bytemot {

template <class Box>
struct FrameDetections {
  int frame = 0;
  std::vector<Detection<Box>> detections;

  friend bool operator==(const FrameDetections&, const FrameDetections&) = default;
};

template <class Box>
using DetectionStream = std::vector<FrameDetections<Box>>;

template <class Box>
struct TrackRecord {
  int frame = 0;
  std::int64_t id = 0;
  Box box{};
  double score = 1.0;
  int class_id = 0;

  friend bool operator==(const TrackRecord&, const TrackRecord&) = default;
};

/// Trajectories as flat (frame, id) records ordered by frame then id. Used
/// for tracker output and ground truth alike.
template <class Box>
struct TrackOutput {
  std::vector<TrackRecord<Box>> records;
  TrackerConfig config;  // snapshot of the producing configuration
  int frame_count = 0;

  bool empty() const { return records.empty(); }

  void sort() {
    std::stable_sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
      return a.frame != b.frame ? a.frame < b.frame : a.id < b.id;
    });
  }

  friend bool operator==(const TrackOutput& a, const TrackOutput& b) {
    return a.records == b.records && a.frame_count == b.frame_count;
  }
};

struct SequenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class Box>
TrackOutput<Box> run_sequence(std::span<const FrameDetections<Box>> stream,
                              const TrackerConfig& config) {
  ByteTracker<Box> tracker(config);
  TrackOutput<Box> out;
  out.config = config;
  out.frame_count = static_cast<int>(stream.size());
  for (const auto& fd : stream) {
    FrameResult<Box> r;
    try {
      r = tracker.step(fd.frame, std::span<const Detection<Box>>(fd.detections));
    } catch (const std::exception& e) {
      throw SequenceError("frame " + std::to_string(fd.frame) + ": " + e.what());
    }
    for (const auto& o : r.objects) {
      out.records.push_back({fd.frame, o.id, o.box, o.score, o.class_id});
    }
  }
  return out;
}

template <class Box>
TrackOutput<Box> run_sequence(const DetectionStream<Box>& stream, const TrackerConfig& config) {
  return run_sequence(std::span<const FrameDetections<Box>>(stream), config);
}

/// Same tracker with the low-score pass disabled: one gated matching over
/// detections above tau only.
template <class Box>
TrackOutput<Box> run_single_association(const DetectionStream<Box>& stream, TrackerConfig config) {
  config.second_association = false;
  return run_sequence(stream, config);
}

}  // namespace bytemot
