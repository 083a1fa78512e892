#pragma once

// Tracker configuration: raw (partially specified) settings as read from a
// file or flags, and the validated configuration with defaults applied.

#include <array>
#include <charconv>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "bytemot/motion.hpp"

namespace bytemot {

enum class Mode { TwoD, ThreeD };
enum class Sensor { Camera, Lidar };
enum class MotionStrategy { KalmanOnly, DetectedVelocityOnly, Complementary };

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// nuScenes tracking classes, in the order their ids are assigned.
inline constexpr std::array<std::string_view, 7> kNuScenesClasses{
    "bicycle", "bus", "car", "motorcycle", "pedestrian", "trailer", "truck"};

inline std::optional<int> class_id_from_label(std::string_view label) {
  for (std::size_t i = 0; i < kNuScenesClasses.size(); ++i) {
    if (kNuScenesClasses[i] == label) return static_cast<int>(i);
  }
  int id = -1;
  const auto [ptr, ec] = std::from_chars(label.data(), label.data() + label.size(), id);
  if (ec == std::errc{} && ptr == label.data() + label.size() && id >= 0) return id;
  return std::nullopt;
}

inline std::string class_label(int class_id) {
  if (class_id >= 0 && class_id < static_cast<int>(kNuScenesClasses.size())) {
    return std::string(kNuScenesClasses[static_cast<std::size_t>(class_id)]);
  }
  return std::to_string(class_id);
}

/// Similarity gate, optionally refined per class id.
struct GateTable {
  double default_gate = 0.2;
  std::map<int, double> per_class;

  double for_class(int class_id) const {
    const auto it = per_class.find(class_id);
    return it == per_class.end() ? default_gate : it->second;
  }
  friend bool operator==(const GateTable&, const GateTable&) = default;
};

/// Per-class 3D GIoU gates tuned for nuScenes.
inline GateTable nuscenes_giou_gates() {
  GateTable g;
  g.default_gate = -0.5;
  const std::array<double, 7> values{-0.7, -0.2, -0.1, -0.5, -0.7, -0.4, -0.1};
  for (std::size_t i = 0; i < values.size(); ++i) g.per_class[static_cast<int>(i)] = values[i];
  return g;
}

struct TrackerConfig {
  Mode mode = Mode::TwoD;
  Sensor sensor = Sensor::Camera;
  double tau = 0.6;
  GateTable gate_first;
  GateTable gate_second;
  int track_buffer = 30;
  MotionStrategy motion = MotionStrategy::KalmanOnly;
  double alpha = 100.0;
  bool adaptive_r = false;
  // Disabling the low-score pass gives the single-association baseline.
  bool second_association = true;
  NoiseConfig noise;

  NoiseConfig effective_noise() const {
    NoiseConfig n = noise;
    n.alpha = alpha;
    n.adaptive = adaptive_r;
    return n;
  }

  friend bool operator==(const TrackerConfig& a, const TrackerConfig& b) {
    return a.mode == b.mode && a.sensor == b.sensor && a.tau == b.tau &&
           a.gate_first == b.gate_first && a.gate_second == b.gate_second &&
           a.track_buffer == b.track_buffer && a.motion == b.motion && a.alpha == b.alpha &&
           a.adaptive_r == b.adaptive_r && a.second_association == b.second_association;
  }
};

/// Settings as supplied by the user; unset fields take mode defaults.
struct RawTrackerConfig {
  std::optional<Mode> mode;
  std::optional<Sensor> sensor;
  std::optional<double> tau;
  std::optional<double> gate_first;
  std::optional<double> gate_second;
  std::map<int, double> class_gates_first;
  std::map<int, double> class_gates_second;
  std::optional<int> track_buffer;
  std::optional<MotionStrategy> motion;
  std::optional<double> alpha;
  std::optional<bool> adaptive_r;
  std::optional<bool> second_association;
};

namespace detail {

inline void check_gate(double g, Mode mode, const char* what) {
  const bool ok = mode == Mode::TwoD ? (g >= 0.0 && g <= 1.0) : (g > -1.0 && g <= 1.0);
  if (!ok) {
    throw ConfigError(std::string(what) + " = " + std::to_string(g) +
                      (mode == Mode::TwoD ? " outside the IoU range [0, 1]"
                                          : " outside the GIoU range (-1, 1]"));
  }
}

inline GateTable resolve_gates(std::optional<double> global, const std::map<int, double>& classes,
                               Mode mode) {
  GateTable g;
  if (mode == Mode::TwoD) {
    g.default_gate = global.value_or(0.2);
  } else if (global) {
    // An explicit global gate replaces the per-class defaults.
    g.default_gate = *global;
  } else {
    g = nuscenes_giou_gates();
  }
  for (const auto& [cls, value] : classes) g.per_class[cls] = value;
  return g;
}

}  // namespace detail

/// Applies defaults and checks every range. Throws ConfigError.
inline TrackerConfig validate_config(const RawTrackerConfig& raw) {
  TrackerConfig c;
  c.mode = raw.mode.value_or(Mode::TwoD);
  const bool three_d = c.mode == Mode::ThreeD;
  c.sensor = raw.sensor.value_or(three_d ? Sensor::Lidar : Sensor::Camera);

  const double default_tau = !three_d ? 0.6 : (c.sensor == Sensor::Lidar ? 0.2 : 0.25);
  c.tau = raw.tau.value_or(default_tau);
  if (!(c.tau > 0.0 && c.tau < 1.0)) {
    throw ConfigError("tau = " + std::to_string(c.tau) + " must lie strictly inside (0, 1)");
  }

  c.gate_first = detail::resolve_gates(raw.gate_first, raw.class_gates_first, c.mode);
  c.gate_second = detail::resolve_gates(raw.gate_second, raw.class_gates_second, c.mode);
  for (const GateTable* g : {&c.gate_first, &c.gate_second}) {
    detail::check_gate(g->default_gate, c.mode, "gate");
    for (const auto& [cls, value] : g->per_class) {
      if (cls < 0) throw ConfigError("class ids in gate tables must be non-negative");
      detail::check_gate(value, c.mode, "class gate");
    }
  }

  c.track_buffer = raw.track_buffer.value_or(30);
  if (c.track_buffer < 1) throw ConfigError("track_buffer must be at least 1 frame");

  c.motion = raw.motion.value_or(three_d ? MotionStrategy::Complementary
                                         : MotionStrategy::KalmanOnly);
  if (!three_d && c.motion != MotionStrategy::KalmanOnly) {
    throw ConfigError("detected-velocity motion strategies require 3d mode");
  }

  c.alpha = raw.alpha.value_or(c.sensor == Sensor::Lidar ? 10.0 : 100.0);
  if (!(c.alpha >= 0.0)) throw ConfigError("alpha must be non-negative");
  c.adaptive_r = raw.adaptive_r.value_or(three_d);
  c.second_association = raw.second_association.value_or(true);
  return c;
}

/// Re-checks an already materialized configuration.
inline void check_config(const TrackerConfig& c) {
  if (!(c.tau > 0.0 && c.tau < 1.0)) throw ConfigError("tau must lie strictly inside (0, 1)");
  if (c.track_buffer < 1) throw ConfigError("track_buffer must be at least 1 frame");
  if (!(c.alpha >= 0.0)) throw ConfigError("alpha must be non-negative");
  if (c.mode == Mode::TwoD && c.motion != MotionStrategy::KalmanOnly) {
    throw ConfigError("detected-velocity motion strategies require 3d mode");
  }
  for (const GateTable* g : {&c.gate_first, &c.gate_second}) {
    detail::check_gate(g->default_gate, c.mode, "gate");
    for (const auto& [cls, value] : g->per_class) detail::check_gate(value, c.mode, "class gate");
  }
  c.noise.validate();
}

}  // namespace bytemot
