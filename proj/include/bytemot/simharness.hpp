#pragma once

// Seeded synthetic scenarios: scripted ground-truth trajectories plus noisy
// detections with score dips during occlusions, clutter and misses. Used to
// compare the two-pass tracker against the single-association baseline and
// to compare motion strategies in 3D.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "bytemot/config.hpp"
#include "bytemot/tracker.hpp"

namespace bytemot {

struct Turn {
  int frame = 0;       // velocity is rotated before moving into this frame
  double angle = 0.0;  // rad, counter-clockwise
};

/// Explicit trajectory of one object. 2D: (x, y) is the box center in
/// pixels, size_a/size_b are width/height. 3D: (x, y) the BEV center in
/// meters, size_a/size_b/size_c are l/w/h and the heading follows velocity.
struct ObjectScript {
  int id = 1;
  int class_id = 0;
  int start_frame = 1;
  int end_frame = 0;  // 0 means the last frame
  double x = 0.0;
  double y = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  double size_a = 40.0;
  double size_b = 100.0;
  double size_c = 1.6;
  std::vector<Turn> turns;
};

struct OcclusionEvent {
  int object = 1;
  int first = 1;
  int last = 1;
  double score = 0.3;
};

/// Frames in which the object produces no detection and is absent from the
/// ground truth.
struct DisappearanceEvent {
  int object = 1;
  int first = 1;
  int last = 1;
};

struct ScenarioSpec {
  Mode mode = Mode::TwoD;
  int duration = 50;
  int n_objects = 0;  // random objects, used only when `objects` is empty
  double world_width = 1920.0;
  double world_height = 1080.0;
  double min_speed = 1.0;
  double max_speed = 4.0;
  std::vector<ObjectScript> objects;
  std::vector<OcclusionEvent> occlusions;
  std::vector<DisappearanceEvent> disappearances;
  double base_score = 0.95;
  double position_jitter = 0.0;
  double score_jitter = 0.0;
  double clutter_rate = 0.0;  // expected false positives per frame
  double clutter_score_min = 0.05;
  double clutter_score_max = 0.4;
  double miss_rate = 0.0;
  double velocity_noise = 0.0;  // 3D, m/frame
};

template <class Box>
struct Scenario {
  TrackOutput<Box> gt;
  DetectionStream<Box> detections;
  // Ground-truth id behind each detection, 0 for clutter.
  std::vector<std::vector<std::int64_t>> detection_truth;
};

struct ScenarioError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

namespace detail {

inline void validate_scenario(const ScenarioSpec& s) {
  auto fail = [](const std::string& what) { throw ScenarioError("infeasible scenario: " + what); };
  if (s.duration < 1) fail("duration must be at least one frame");
  if (s.objects.empty() && s.n_objects < 0) fail("n_objects must be non-negative");
  if (s.world_width <= 0 || s.world_height <= 0) fail("world bounds must be positive");
  if (s.min_speed < 0 || s.max_speed < s.min_speed) fail("speed range is empty");
  if (s.position_jitter < 0 || s.score_jitter < 0 || s.clutter_rate < 0 || s.velocity_noise < 0)
    fail("noise levels and rates must be non-negative");
  if (s.miss_rate < 0 || s.miss_rate > 1) fail("miss_rate must lie in [0, 1]");
  if (s.base_score < 0 || s.base_score > 1) fail("base_score must lie in [0, 1]");
  if (s.clutter_score_min < 0 || s.clutter_score_max > 1 || s.clutter_score_min > s.clutter_score_max)
    fail("clutter score range must be a sub-interval of [0, 1]");

  std::set<int> ids;
  for (const auto& o : s.objects) {
    if (o.id < 1) fail("object ids must be positive");
    if (!ids.insert(o.id).second) fail("duplicate object id " + std::to_string(o.id));
    const int end = o.end_frame == 0 ? s.duration : o.end_frame;
    if (o.start_frame < 1 || end > s.duration || o.start_frame > end)
      fail("object " + std::to_string(o.id) + " lifetime outside the sequence");
    if (o.size_a <= 0 || o.size_b <= 0 || o.size_c <= 0) fail("object sizes must be positive");
    for (const auto& t : o.turns) {
      if (t.frame < 1 || t.frame > s.duration) fail("turn outside the sequence");
    }
  }
  auto check_span = [&](int object, int first, int last, const char* kind) {
    if (!s.objects.empty() && !ids.count(object)) fail(std::string(kind) + " names unknown object");
    if (s.objects.empty() && (object < 1 || object > s.n_objects))
      fail(std::string(kind) + " names unknown object");
    if (first < 1 || last > s.duration || first > last) fail(std::string(kind) + " span outside the sequence");
  };
  for (const auto& e : s.occlusions) {
    check_span(e.object, e.first, e.last, "occlusion");
    if (e.score < 0 || e.score > 1) fail("occlusion score must lie in [0, 1]");
  }
  for (const auto& e : s.disappearances) check_span(e.object, e.first, e.last, "disappearance");
}

inline std::vector<ObjectScript> random_objects(const ScenarioSpec& s, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ux(0.1 * s.world_width, 0.9 * s.world_width);
  std::uniform_real_distribution<double> uy(0.1 * s.world_height, 0.9 * s.world_height);
  std::uniform_real_distribution<double> speed(s.min_speed, s.max_speed);
  std::uniform_real_distribution<double> heading(-std::numbers::pi, std::numbers::pi);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<ObjectScript> out;
  for (int k = 1; k <= s.n_objects; ++k) {
    ObjectScript o;
    o.id = k;
    o.x = ux(rng);
    o.y = uy(rng);
    const double v = speed(rng);
    const double a = heading(rng);
    o.vx = v * std::cos(a);
    o.vy = v * std::sin(a);
    if (s.mode == Mode::TwoD) {
      o.size_a = 30.0 + 20.0 * unit(rng);
      o.size_b = 2.4 * o.size_a;
    } else {
      o.class_id = 2;
      o.size_a = 4.0 + unit(rng);
      o.size_b = 1.8 + 0.3 * unit(rng);
      o.size_c = 1.6;
    }
    out.push_back(o);
  }
  return out;
}

struct ObjectState {
  double x, y, vx, vy;
};

// Per-frame centers and velocities (displacement from the previous frame).
inline std::vector<ObjectState> trajectory(const ObjectScript& o, int end) {
  std::vector<ObjectState> states;
  ObjectState s{o.x, o.y, o.vx, o.vy};
  states.push_back(s);
  for (int f = o.start_frame + 1; f <= end; ++f) {
    for (const auto& t : o.turns) {
      if (t.frame == f) {
        const double c = std::cos(t.angle), sn = std::sin(t.angle);
        const double vx = c * s.vx - sn * s.vy;
        const double vy = sn * s.vx + c * s.vy;
        s.vx = vx;
        s.vy = vy;
      }
    }
    s.x += s.vx;
    s.y += s.vy;
    states.push_back(s);
  }
  return states;
}

inline Box2D make_box(const ObjectScript& o, const ObjectState& s, Box2D*) {
  return {s.x - 0.5 * o.size_a, s.y - 0.5 * o.size_b, s.x + 0.5 * o.size_a, s.y + 0.5 * o.size_b};
}

inline Box3D make_box(const ObjectScript& o, const ObjectState& s, Box3D*) {
  const double heading = (s.vx == 0.0 && s.vy == 0.0) ? 0.0 : std::atan2(s.vy, s.vx);
  return {s.x, s.y, 0.5 * o.size_c, wrap_angle(heading), o.size_a, o.size_b, o.size_c};
}

}  // namespace detail

/// Deterministic in (spec, seed).
template <class Box>
Scenario<Box> generate_scenario(const ScenarioSpec& spec, std::uint64_t seed) {
  constexpr bool three_d = std::is_same_v<Box, Box3D>;
  if ((spec.mode == Mode::ThreeD) != three_d) {
    throw ScenarioError("scenario mode does not match the requested box type");
  }
  detail::validate_scenario(spec);

  std::mt19937_64 rng(seed);
  const std::vector<ObjectScript> objects =
      spec.objects.empty() ? detail::random_objects(spec, rng) : spec.objects;

  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::poisson_distribution<int> clutter_count(spec.clutter_rate > 0 ? spec.clutter_rate : 1.0);
  auto clip01 = [](double v) { return std::clamp(v, 0.0, 1.0); };

  std::vector<std::vector<detail::ObjectState>> paths;
  for (const auto& o : objects) {
    paths.push_back(detail::trajectory(o, o.end_frame == 0 ? spec.duration : o.end_frame));
  }

  Scenario<Box> sc;
  sc.gt.config.mode = spec.mode;
  sc.gt.frame_count = spec.duration;
  for (int f = 1; f <= spec.duration; ++f) {
    FrameDetections<Box> fd;
    fd.frame = f;
    std::vector<std::int64_t> truth;

    for (std::size_t k = 0; k < objects.size(); ++k) {
      const auto& o = objects[k];
      const int end = o.end_frame == 0 ? spec.duration : o.end_frame;
      if (f < o.start_frame || f > end) continue;
      const bool gone = std::any_of(spec.disappearances.begin(), spec.disappearances.end(),
                                    [&](const auto& e) { return e.object == o.id && f >= e.first && f <= e.last; });
      if (gone) continue;
      const auto& s = paths[k][static_cast<std::size_t>(f - o.start_frame)];
      const Box truth_box = detail::make_box(o, s, static_cast<Box*>(nullptr));
      sc.gt.records.push_back({f, o.id, truth_box, 1.0, o.class_id});

      if (spec.miss_rate > 0 && unit(rng) < spec.miss_rate) continue;
      double score = spec.base_score;
      for (const auto& e : spec.occlusions) {
        if (e.object == o.id && f >= e.first && f <= e.last) score = e.score;
      }
      if (spec.score_jitter > 0) score += spec.score_jitter * gauss(rng);
      Detection<Box> d;
      d.box = truth_box;
      d.score = clip01(score);
      d.class_id = o.class_id;
      if (spec.position_jitter > 0) {
        const double dx = spec.position_jitter * gauss(rng);
        const double dy = spec.position_jitter * gauss(rng);
        if constexpr (three_d) {
          d.box.x += dx;
          d.box.y += dy;
        } else {
          const double dw = 0.5 * spec.position_jitter * gauss(rng);
          const double dh = 0.5 * spec.position_jitter * gauss(rng);
          const double w = std::max(1.0, truth_box.width() + dw);
          const double h = std::max(1.0, truth_box.height() + dh);
          const double cx = truth_box.center_x() + dx;
          const double cy = truth_box.center_y() + dy;
          d.box = {cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h};
        }
      }
      if constexpr (three_d) {
        Velocity v{s.vx, s.vy};
        if (spec.velocity_noise > 0) {
          v.vx += spec.velocity_noise * gauss(rng);
          v.vy += spec.velocity_noise * gauss(rng);
        }
        d.velocity = v;
      }
      fd.detections.push_back(d);
      truth.push_back(o.id);
    }

    if (spec.clutter_rate > 0) {
      const int n = clutter_count(rng);
      for (int c = 0; c < n; ++c) {
        Detection<Box> d;
        const double cx = unit(rng) * spec.world_width;
        const double cy = unit(rng) * spec.world_height;
        d.score = spec.clutter_score_min + (spec.clutter_score_max - spec.clutter_score_min) * unit(rng);
        if constexpr (three_d) {
          d.class_id = objects.empty() ? 2 : objects[c % objects.size()].class_id;
          d.box = {cx, cy, 0.8, wrap_angle((2 * unit(rng) - 1) * std::numbers::pi),
                   3.5 + unit(rng), 1.7 + 0.3 * unit(rng), 1.6};
          d.velocity = Velocity{(2 * unit(rng) - 1) * spec.max_speed, (2 * unit(rng) - 1) * spec.max_speed};
        } else {
          const double w = 30.0 + 20.0 * unit(rng);
          const double h = 2.4 * w;
          d.box = {cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h};
        }
        fd.detections.push_back(d);
        truth.push_back(0);
      }
    }
    sc.detections.push_back(std::move(fd));
    sc.detection_truth.push_back(std::move(truth));
  }
  sc.gt.sort();
  return sc;
}

/// Single gated matching pass over detections above tau ("without BYTE").
template <class Box>
TrackOutput<Box> baseline_single_association(const DetectionStream<Box>& detections,
                                             const TrackerConfig& config) {
  return run_single_association(detections, config);
}

// ---- canonical scenarios --------------------------------------------------

/// Three well-separated pedestrians; object 1 dips to score 0.3 on frames
/// 10-14.
inline ScenarioSpec occlusion_scenario() {
  ScenarioSpec s;
  s.duration = 30;
  for (int k = 0; k < 3; ++k) {
    ObjectScript o;
    o.id = k + 1;
    o.x = 300.0 + 500.0 * k;
    o.y = 500.0;
    o.vx = 3.0;
    o.vy = k == 1 ? -1.0 : 1.0;
    o.size_a = 40.0;
    o.size_b = 100.0;
    s.objects.push_back(o);
  }
  s.occlusions.push_back({1, 10, 14, 0.3});
  return s;
}

/// Two pedestrians walking toward each other and passing with a vertical
/// offset.
inline ScenarioSpec crossing_scenario() {
  ScenarioSpec s;
  s.duration = 40;
  ObjectScript a;
  a.id = 1;
  a.x = 600.0;
  a.y = 500.0;
  a.vx = 8.0;
  a.size_a = 40.0;
  a.size_b = 100.0;
  ObjectScript b = a;
  b.id = 2;
  b.x = 920.0;
  b.y = 540.0;
  b.vx = -8.0;
  s.objects = {a, b};
  s.occlusions.push_back({2, 19, 22, 0.4});
  s.position_jitter = 1.0;
  s.score_jitter = 0.02;
  return s;
}

/// Cluttered 2D scenes with frequent score dips.
inline std::vector<ScenarioSpec> benchmark_suite(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<ScenarioSpec> suite;
  for (int n = 0; n < count; ++n) {
    ScenarioSpec s;
    s.duration = 100;
    const int objects = 6 + static_cast<int>(unit(rng) * 5);
    for (int k = 1; k <= objects; ++k) {
      ObjectScript o;
      o.id = k;
      o.x = 200.0 + unit(rng) * 1500.0;
      o.y = 150.0 + unit(rng) * 780.0;
      const double speed = 1.0 + 3.0 * unit(rng);
      const double heading = (2 * unit(rng) - 1) * std::numbers::pi;
      o.vx = speed * std::cos(heading);
      o.vy = speed * std::sin(heading);
      o.size_a = 30.0 + 25.0 * unit(rng);
      o.size_b = 2.4 * o.size_a;
      s.objects.push_back(o);
      // Occluded roughly a quarter of the time.
      int f = 5 + static_cast<int>(unit(rng) * 10);
      while (f < s.duration - 3) {
        const int len = 4 + static_cast<int>(unit(rng) * 6);
        const int last = std::min(s.duration, f + len - 1);
        s.occlusions.push_back({k, f, last, 0.15 + 0.4 * unit(rng)});
        f = last + 10 + static_cast<int>(unit(rng) * 15);
      }
    }
    s.position_jitter = 1.5;
    s.score_jitter = 0.04;
    s.clutter_rate = 1.5;
    s.clutter_score_min = 0.05;
    s.clutter_score_max = 0.4;
    suite.push_back(s);
  }
  return suite;
}

/// 3D driving scenes where every object makes abrupt turns and disappears
/// for five frames at a time.
inline std::vector<ScenarioSpec> motion_suite(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<ScenarioSpec> suite;
  for (int n = 0; n < count; ++n) {
    ScenarioSpec s;
    s.mode = Mode::ThreeD;
    s.duration = 60;
    s.world_width = 400.0;
    s.world_height = 400.0;
    s.min_speed = 2.5;
    s.max_speed = 3.5;
    const int objects = 4;
    for (int k = 1; k <= objects; ++k) {
      ObjectScript o;
      o.id = k;
      o.class_id = 2;
      // Lanes 60 m apart keep objects from interacting.
      o.x = 60.0 * k + 20.0 * unit(rng);
      o.y = 60.0 * k + 20.0 * unit(rng);
      const double speed = s.min_speed + (s.max_speed - s.min_speed) * unit(rng);
      const double heading = (2 * unit(rng) - 1) * std::numbers::pi;
      o.vx = speed * std::cos(heading);
      o.vy = speed * std::sin(heading);
      o.size_a = 4.5;
      o.size_b = 1.9;
      o.size_c = 1.6;
      // Alternate: turn, then disappear, well apart from each other.
      for (int f = 8 + static_cast<int>(unit(rng) * 4); f + 8 < s.duration; f += 24) {
        const double sign = unit(rng) < 0.5 ? -1.0 : 1.0;
        o.turns.push_back({f, sign * (std::numbers::pi / 3.0 + unit(rng) * std::numbers::pi / 6.0)});
        const int gone = f + 9;
        if (gone + 6 < s.duration) s.disappearances.push_back({k, gone, gone + 4});
      }
      s.objects.push_back(o);
    }
    s.position_jitter = 0.05;
    s.score_jitter = 0.03;
    s.base_score = 0.9;
    s.velocity_noise = 0.05;
    suite.push_back(s);
  }
  return suite;
}

// ---- JSON scenario files --------------------------------------------------

inline void from_json(const nlohmann::json& j, Turn& t) {
  t.frame = j.at("frame").get<int>();
  t.angle = j.at("angle").get<double>();
}

inline void from_json(const nlohmann::json& j, ObjectScript& o) {
  o.id = j.at("id").get<int>();
  o.class_id = j.value("class_id", 0);
  o.start_frame = j.value("start_frame", 1);
  o.end_frame = j.value("end_frame", 0);
  o.x = j.at("x").get<double>();
  o.y = j.at("y").get<double>();
  o.vx = j.value("vx", 0.0);
  o.vy = j.value("vy", 0.0);
  o.size_a = j.value("size_a", o.size_a);
  o.size_b = j.value("size_b", o.size_b);
  o.size_c = j.value("size_c", o.size_c);
  if (j.contains("turns")) o.turns = j.at("turns").get<std::vector<Turn>>();
}

inline void from_json(const nlohmann::json& j, OcclusionEvent& e) {
  e.object = j.at("object").get<int>();
  e.first = j.at("first").get<int>();
  e.last = j.at("last").get<int>();
  e.score = j.at("score").get<double>();
}

inline void from_json(const nlohmann::json& j, DisappearanceEvent& e) {
  e.object = j.at("object").get<int>();
  e.first = j.at("first").get<int>();
  e.last = j.at("last").get<int>();
}

inline ScenarioSpec scenario_from_json(const nlohmann::json& j) {
  ScenarioSpec s;
  const std::string mode = j.value("mode", std::string("2d"));
  if (mode != "2d" && mode != "3d") throw ScenarioError("scenario mode must be 2d or 3d");
  s.mode = mode == "3d" ? Mode::ThreeD : Mode::TwoD;
  if (s.mode == Mode::ThreeD) {
    s.world_width = s.world_height = 400.0;
  }
  s.duration = j.value("duration", s.duration);
  s.n_objects = j.value("n_objects", s.n_objects);
  s.world_width = j.value("world_width", s.world_width);
  s.world_height = j.value("world_height", s.world_height);
  s.min_speed = j.value("min_speed", s.min_speed);
  s.max_speed = j.value("max_speed", s.max_speed);
  if (j.contains("objects")) s.objects = j.at("objects").get<std::vector<ObjectScript>>();
  if (j.contains("occlusions")) s.occlusions = j.at("occlusions").get<std::vector<OcclusionEvent>>();
  if (j.contains("disappearances"))
    s.disappearances = j.at("disappearances").get<std::vector<DisappearanceEvent>>();
  s.base_score = j.value("base_score", s.base_score);
  s.position_jitter = j.value("position_jitter", s.position_jitter);
  s.score_jitter = j.value("score_jitter", s.score_jitter);
  s.clutter_rate = j.value("clutter_rate", s.clutter_rate);
  s.clutter_score_min = j.value("clutter_score_min", s.clutter_score_min);
  s.clutter_score_max = j.value("clutter_score_max", s.clutter_score_max);
  s.miss_rate = j.value("miss_rate", s.miss_rate);
  s.velocity_noise = j.value("velocity_noise", s.velocity_noise);
  return s;
}

}  // namespace bytemot
