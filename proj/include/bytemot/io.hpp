#pragma once

// Text formats.
//
// MOT (2D), one record per line, comma separated:
//     frame,id,x,y,w,h,score,-1,-1,-1
// with (x, y) the top-left corner in pixels and id -1 for raw detections.
//
// 3D detections:
//     frame,label,x,y,z,theta,l,w,h,vx,vy,score
// vx and vy (m/frame) may be left empty when the detector gives no velocity.
//
// 3D tracks:
//     frame,id,label,x,y,z,theta,l,w,h,score
//
// Config files hold `key = value` lines; `#` starts a comment. Per-class gates
// use `gate_first.<label>` and `gate_second.<label>`.
//
// Frames are 1-based. Parsed detection streams are contiguous from frame 1 to
// the last frame present; frames without detections are empty.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bytemot/config.hpp"
#include "bytemot/tracker.hpp"

namespace bytemot {

struct FormatError : std::runtime_error {
  FormatError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_number(line) {}
  std::size_t line_number;
};

/// Shortest text that parses back to exactly `v`.
inline std::string format_number(double v) {
  if (v == 0.0) return "0";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double parse_real(std::string_view field, std::size_t line, const char* name) {
  double v = 0.0;
  // from_chars rejects a leading '+'.
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(v)) {
    throw FormatError(line, std::string("field '") + name + "' is not a finite number: '" +
                                std::string(field) + "'");
  }
  return v;
}

inline long long parse_integer(std::string_view field, std::size_t line, const char* name) {
  const double v = parse_real(field, line, name);
  if (v != std::floor(v) || std::abs(v) > 9e15) {
    throw FormatError(line, std::string("field '") + name + "' is not an integer");
  }
  return static_cast<long long>(v);
}

inline void check_unit_score(double s, std::size_t line) {
  if (!(s >= 0.0 && s <= 1.0)) throw FormatError(line, "score " + format_number(s) + " outside [0, 1]");
}

inline int parse_frame(std::string_view field, std::size_t line) {
  const long long f = parse_integer(field, line, "frame");
  if (f < 1 || f > 100000000) throw FormatError(line, "frame must be a positive index");
  return static_cast<int>(f);
}

inline int parse_class(std::string_view field, std::size_t line) {
  const auto id = class_id_from_label(field);
  if (!id) throw FormatError(line, "unknown class label '" + std::string(field) + "'");
  return *id;
}

template <class Box>
DetectionStream<Box> contiguous(std::map<int, std::vector<Detection<Box>>>& grouped) {
  DetectionStream<Box> out;
  if (grouped.empty()) return out;
  const int last = grouped.rbegin()->first;
  out.reserve(static_cast<std::size_t>(last));
  for (int f = 1; f <= last; ++f) {
    FrameDetections<Box> fd;
    fd.frame = f;
    if (auto it = grouped.find(f); it != grouped.end()) fd.detections = std::move(it->second);
    out.push_back(std::move(fd));
  }
  return out;
}

// Calls fn(fields, line_number) for each non-blank line.
template <class Fn>
void for_each_record(std::istream& in, Fn&& fn) {
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string_view s = trim(raw);
    if (s.empty()) continue;
    fn(split(s, ','), line);
  }
}

struct MotRecord {
  int frame;
  long long id;
  Box2D box;
  double score;
};

inline MotRecord parse_mot_line(const std::vector<std::string_view>& f, std::size_t line) {
  if (f.size() < 7) {
    throw FormatError(line, "expected at least 7 comma-separated fields, got " + std::to_string(f.size()));
  }
  MotRecord r;
  r.frame = parse_frame(f[0], line);
  r.id = parse_integer(f[1], line, "id");
  const double x = parse_real(f[2], line, "x");
  const double y = parse_real(f[3], line, "y");
  const double w = parse_real(f[4], line, "w");
  const double h = parse_real(f[5], line, "h");
  if (!(w > 0.0 && h > 0.0)) throw FormatError(line, "box width and height must be positive");
  r.score = parse_real(f[6], line, "score");
  check_unit_score(r.score, line);
  for (std::size_t i = 7; i < f.size(); ++i) parse_real(f[i], line, "trailing");
  r.box = Box2D::from_tlwh(x, y, w, h);
  return r;
}

inline Box3D parse_box3d(const std::vector<std::string_view>& f, std::size_t first,
                         std::size_t line) {
  Box3D b;
  b.x = parse_real(f[first + 0], line, "x");
  b.y = parse_real(f[first + 1], line, "y");
  b.z = parse_real(f[first + 2], line, "z");
  b.theta = wrap_angle(parse_real(f[first + 3], line, "theta"));
  b.l = parse_real(f[first + 4], line, "l");
  b.w = parse_real(f[first + 5], line, "w");
  b.h = parse_real(f[first + 6], line, "h");
  if (!b.valid()) throw FormatError(line, "3D box dimensions must be positive");
  return b;
}

// Extent from lo to hi that a reader adding it back to lo recovers hi exactly.
inline double exact_extent(double lo, double hi) {
  double w = hi - lo;
  for (int i = 0; i < 8 && lo + w != hi; ++i) {
    w = std::nextafter(w, lo + w < hi ? INFINITY : -INFINITY);
  }
  return w;
}

inline void write_mot_box(std::ostream& os, const Box2D& b) {
  os << format_number(b.x1) << ',' << format_number(b.y1) << ','
     << format_number(exact_extent(b.x1, b.x2)) << ',' << format_number(exact_extent(b.y1, b.y2));
}

inline void write_box3d(std::ostream& os, const Box3D& b) {
  os << format_number(b.x) << ',' << format_number(b.y) << ',' << format_number(b.z) << ','
     << format_number(b.theta) << ',' << format_number(b.l) << ',' << format_number(b.w) << ','
     << format_number(b.h);
}

}  // namespace detail

// ---- MOT 2D ---------------------------------------------------------------

inline DetectionStream<Box2D> parse_mot_detections(std::istream& in) {
  std::map<int, std::vector<Detection<Box2D>>> grouped;
  detail::for_each_record(in, [&](const auto& fields, std::size_t line) {
    const auto r = detail::parse_mot_line(fields, line);
    grouped[r.frame].push_back({r.box, r.score, 0, std::nullopt});
  });
  return detail::contiguous(grouped);
}

inline DetectionStream<Box2D> parse_mot_detections(const std::string& text) {
  std::istringstream in(text);
  return parse_mot_detections(in);
}

/// Reads ground truth or results with track ids.
inline TrackOutput<Box2D> parse_mot_tracks(std::istream& in) {
  TrackOutput<Box2D> out;
  out.config.mode = Mode::TwoD;
  detail::for_each_record(in, [&](const auto& fields, std::size_t line) {
    const auto r = detail::parse_mot_line(fields, line);
    if (r.id < 1) throw FormatError(line, "track records need an id >= 1");
    out.records.push_back({r.frame, static_cast<std::int64_t>(r.id), r.box, r.score, 0});
    out.frame_count = std::max(out.frame_count, r.frame);
  });
  out.sort();
  return out;
}

inline TrackOutput<Box2D> parse_mot_tracks(const std::string& text) {
  std::istringstream in(text);
  return parse_mot_tracks(in);
}

inline void write_mot_results(const TrackOutput<Box2D>& output, std::ostream& os) {
  for (const auto& r : output.records) {
    if (r.id < 1) continue;
    os << r.frame << ',' << r.id << ',';
    detail::write_mot_box(os, r.box);
    os << ',' << format_number(r.score) << ",-1,-1,-1\n";
  }
}

inline void write_mot_results(const TrackOutput<Box3D>&, std::ostream&) {
  throw std::invalid_argument("MOT text format holds 2D boxes only; write 3D tracks instead");
}

inline void write_mot_detections(const DetectionStream<Box2D>& stream, std::ostream& os) {
  for (const auto& fd : stream) {
    for (const auto& d : fd.detections) {
      os << fd.frame << ",-1,";
      detail::write_mot_box(os, d.box);
      os << ',' << format_number(d.score) << ",-1,-1,-1\n";
    }
  }
}

// ---- 3D -------------------------------------------------------------------

inline DetectionStream<Box3D> parse_det3d(std::istream& in) {
  std::map<int, std::vector<Detection<Box3D>>> grouped;
  detail::for_each_record(in, [&](const auto& f, std::size_t line) {
    if (f.size() != 12) {
      throw FormatError(line, "expected 12 fields (frame,label,x,y,z,theta,l,w,h,vx,vy,score), got " +
                                  std::to_string(f.size()));
    }
    Detection<Box3D> d;
    const int frame = detail::parse_frame(f[0], line);
    d.class_id = detail::parse_class(f[1], line);
    d.box = detail::parse_box3d(f, 2, line);
    if (f[9].empty() != f[10].empty()) throw FormatError(line, "give both vx and vy or neither");
    if (!f[9].empty()) {
      d.velocity = Velocity{detail::parse_real(f[9], line, "vx"), detail::parse_real(f[10], line, "vy")};
    }
    d.score = detail::parse_real(f[11], line, "score");
    detail::check_unit_score(d.score, line);
    grouped[frame].push_back(d);
  });
  return detail::contiguous(grouped);
}

inline DetectionStream<Box3D> parse_det3d(const std::string& text) {
  std::istringstream in(text);
  return parse_det3d(in);
}

inline void write_det3d(const DetectionStream<Box3D>& stream, std::ostream& os) {
  for (const auto& fd : stream) {
    for (const auto& d : fd.detections) {
      os << fd.frame << ',' << class_label(d.class_id) << ',';
      detail::write_box3d(os, d.box);
      os << ',';
      if (d.velocity) os << format_number(d.velocity->vx) << ',' << format_number(d.velocity->vy);
      else os << ',';
      os << ',' << format_number(d.score) << '\n';
    }
  }
}

inline TrackOutput<Box3D> parse_tracks_3d(std::istream& in) {
  TrackOutput<Box3D> out;
  out.config.mode = Mode::ThreeD;
  detail::for_each_record(in, [&](const auto& f, std::size_t line) {
    if (f.size() != 11) {
      throw FormatError(line, "expected 11 fields (frame,id,label,x,y,z,theta,l,w,h,score), got " +
                                  std::to_string(f.size()));
    }
    TrackRecord<Box3D> r;
    r.frame = detail::parse_frame(f[0], line);
    const long long id = detail::parse_integer(f[1], line, "id");
    if (id < 1) throw FormatError(line, "track records need an id >= 1");
    r.id = id;
    r.class_id = detail::parse_class(f[2], line);
    r.box = detail::parse_box3d(f, 3, line);
    r.score = detail::parse_real(f[10], line, "score");
    detail::check_unit_score(r.score, line);
    out.records.push_back(r);
    out.frame_count = std::max(out.frame_count, r.frame);
  });
  out.sort();
  return out;
}

inline TrackOutput<Box3D> parse_tracks_3d(const std::string& text) {
  std::istringstream in(text);
  return parse_tracks_3d(in);
}

inline void write_tracks_3d(const TrackOutput<Box3D>& output, std::ostream& os) {
  for (const auto& r : output.records) {
    os << r.frame << ',' << r.id << ',' << class_label(r.class_id) << ',';
    detail::write_box3d(os, r.box);
    os << ',' << format_number(r.score) << '\n';
  }
}

// ---- config ---------------------------------------------------------------

inline std::string to_string(Mode m) { return m == Mode::TwoD ? "2d" : "3d"; }
inline std::string to_string(Sensor s) { return s == Sensor::Camera ? "camera" : "lidar"; }
inline std::string to_string(MotionStrategy m) {
  switch (m) {
    case MotionStrategy::KalmanOnly: return "kf";
    case MotionStrategy::DetectedVelocityOnly: return "dv";
    case MotionStrategy::Complementary: return "complementary";
  }
  return "kf";
}

inline std::optional<Mode> parse_mode(std::string_view s) {
  if (s == "2d" || s == "2D") return Mode::TwoD;
  if (s == "3d" || s == "3D") return Mode::ThreeD;
  return std::nullopt;
}
inline std::optional<Sensor> parse_sensor(std::string_view s) {
  if (s == "camera") return Sensor::Camera;
  if (s == "lidar") return Sensor::Lidar;
  return std::nullopt;
}
inline std::optional<MotionStrategy> parse_motion(std::string_view s) {
  if (s == "kf") return MotionStrategy::KalmanOnly;
  if (s == "dv") return MotionStrategy::DetectedVelocityOnly;
  if (s == "complementary") return MotionStrategy::Complementary;
  return std::nullopt;
}

inline RawTrackerConfig parse_config_text(std::istream& in) {
  RawTrackerConfig raw;
  std::string text;
  std::size_t line = 0;
  auto boolean = [&](std::string_view v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw FormatError(line, "expected true or false, got '" + std::string(v) + "'");
  };
  while (std::getline(in, text)) {
    ++line;
    std::string_view s = text;
    if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = detail::trim(s);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) throw FormatError(line, "expected 'key = value'");
    const std::string_view key = detail::trim(s.substr(0, eq));
    const std::string_view value = detail::trim(s.substr(eq + 1));
    if (key == "mode") {
      raw.mode = parse_mode(value);
      if (!raw.mode) throw FormatError(line, "mode must be 2d or 3d");
    } else if (key == "sensor") {
      raw.sensor = parse_sensor(value);
      if (!raw.sensor) throw FormatError(line, "sensor must be camera or lidar");
    } else if (key == "tau") {
      raw.tau = detail::parse_real(value, line, "tau");
    } else if (key == "gate_first") {
      raw.gate_first = detail::parse_real(value, line, "gate_first");
    } else if (key == "gate_second") {
      raw.gate_second = detail::parse_real(value, line, "gate_second");
    } else if (key.starts_with("gate_first.") || key.starts_with("gate_second.")) {
      const bool first = key.starts_with("gate_first.");
      const std::string_view label = key.substr(key.find('.') + 1);
      const int cls = detail::parse_class(label, line);
      (first ? raw.class_gates_first : raw.class_gates_second)[cls] =
          detail::parse_real(value, line, "class gate");
    } else if (key == "track_buffer") {
      raw.track_buffer = static_cast<int>(detail::parse_integer(value, line, "track_buffer"));
    } else if (key == "motion") {
      raw.motion = parse_motion(value);
      if (!raw.motion) throw FormatError(line, "motion must be kf, dv or complementary");
    } else if (key == "alpha") {
      raw.alpha = detail::parse_real(value, line, "alpha");
    } else if (key == "adaptive_r") {
      raw.adaptive_r = boolean(value);
    } else if (key == "second_association") {
      raw.second_association = boolean(value);
    } else {
      throw FormatError(line, "unknown config key '" + std::string(key) + "'");
    }
  }
  return raw;
}

inline RawTrackerConfig parse_config_text(const std::string& text) {
  std::istringstream in(text);
  return parse_config_text(in);
}

/// Full snapshot; parsing it and validating reproduces `c`.
inline std::string config_to_text(const TrackerConfig& c) {
  std::ostringstream os;
  os << "mode = " << to_string(c.mode) << '\n'
     << "sensor = " << to_string(c.sensor) << '\n'
     << "tau = " << format_number(c.tau) << '\n'
     << "gate_first = " << format_number(c.gate_first.default_gate) << '\n';
  for (const auto& [cls, g] : c.gate_first.per_class) {
    os << "gate_first." << class_label(cls) << " = " << format_number(g) << '\n';
  }
  os << "gate_second = " << format_number(c.gate_second.default_gate) << '\n';
  for (const auto& [cls, g] : c.gate_second.per_class) {
    os << "gate_second." << class_label(cls) << " = " << format_number(g) << '\n';
  }
  os << "track_buffer = " << c.track_buffer << '\n'
     << "motion = " << to_string(c.motion) << '\n'
     << "alpha = " << format_number(c.alpha) << '\n'
     << "adaptive_r = " << (c.adaptive_r ? "true" : "false") << '\n'
     << "second_association = " << (c.second_association ? "true" : "false") << '\n';
  return os.str();
}

}  // namespace bytemot
