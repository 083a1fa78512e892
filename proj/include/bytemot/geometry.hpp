#pragma once

// Box types and geometric similarity measures: axis-aligned 2D IoU and
// yaw-rotated 3D IoU / GIoU computed in the bird's-eye-view plane.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bytemot {

/// Image-plane box given by its top-left and bottom-right corners, in pixels.
struct Box2D {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }
  double center_x() const { return 0.5 * (x1 + x2); }
  double center_y() const { return 0.5 * (y1 + y2); }

  bool valid() const {
    return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) &&
           std::isfinite(y2) && x1 <= x2 && y1 <= y2;
  }

  static Box2D from_tlwh(double x, double y, double w, double h) {
    return {x, y, x + w, y + h};
  }

  friend bool operator==(const Box2D&, const Box2D&) = default;
};

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  if (a > std::numbers::pi) a -= two_pi;
  return a;
}

/// World-frame 3D box. (x, y, z) is the volumetric center, theta the yaw about
/// +z, l the extent along the heading, w across it, h vertically. Meters and
/// radians.
struct Box3D {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double theta = 0.0;
  double l = 1.0;
  double w = 1.0;
  double h = 1.0;

  double volume() const { return l * w * h; }
  double footprint_area() const { return l * w; }
  double bottom() const { return z - 0.5 * h; }
  double top() const { return z + 0.5 * h; }

  bool valid() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z) &&
           std::isfinite(theta) && std::isfinite(l) && std::isfinite(w) &&
           std::isfinite(h) && l > 0.0 && w > 0.0 && h > 0.0 &&
           theta > -std::numbers::pi && theta <= std::numbers::pi;
  }

  friend bool operator==(const Box3D&, const Box3D&) = default;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Footprint corners in counter-clockwise order.
inline std::array<Point2, 4> bev_corners(const Box3D& b) {
  const double c = std::cos(b.theta);
  const double s = std::sin(b.theta);
  const double hl = 0.5 * b.l;
  const double hw = 0.5 * b.w;
  constexpr std::array<std::array<double, 2>, 4> signs{{{1, 1}, {-1, 1}, {-1, -1}, {1, -1}}};
  std::array<Point2, 4> out{};
  for (std::size_t i = 0; i < 4; ++i) {
    const double dl = signs[i][0] * hl;
    const double dw = signs[i][1] * hw;
    out[i] = {b.x + dl * c - dw * s, b.y + dl * s + dw * c};
  }
  return out;
}

namespace detail {

inline constexpr double kClipEpsilon = 1e-9;

inline double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

inline double polygon_area(std::span<const Point2> poly) {
  if (poly.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point2& p = poly[i];
    const Point2& q = poly[(i + 1) % poly.size()];
    twice += p.x * q.y - q.x * p.y;
  }
  return 0.5 * std::abs(twice);
}

// Sutherland-Hodgman clipping of `subject` against the convex CCW polygon
// `clip`. Points within epsilon of an edge count as inside.
inline std::vector<Point2> clip_convex(std::vector<Point2> subject,
                                       std::span<const Point2> clip) {
  for (std::size_t e = 0; e < clip.size() && !subject.empty(); ++e) {
    const Point2& a = clip[e];
    const Point2& b = clip[(e + 1) % clip.size()];
    const double edge_len = std::hypot(b.x - a.x, b.y - a.y);
    auto side = [&](const Point2& p) { return cross(a, b, p) / edge_len; };

    std::vector<Point2> next;
    next.reserve(subject.size() + 4);
    for (std::size_t i = 0; i < subject.size(); ++i) {
      const Point2& cur = subject[i];
      const Point2& prev = subject[(i + subject.size() - 1) % subject.size()];
      const double sc = side(cur);
      const double sp = side(prev);
      const bool cur_in = sc >= -kClipEpsilon;
      const bool prev_in = sp >= -kClipEpsilon;
      if (cur_in != prev_in) {
        const double t = sp / (sp - sc);
        next.push_back({prev.x + t * (cur.x - prev.x), prev.y + t * (cur.y - prev.y)});
      }
      if (cur_in) next.push_back(cur);
    }
    subject = std::move(next);
  }
  return subject;
}

inline double vertical_overlap(const Box3D& a, const Box3D& b) {
  return std::max(0.0, std::min(a.top(), b.top()) - std::max(a.bottom(), b.bottom()));
}

}  // namespace detail

inline double iou_2d(const Box2D& a, const Box2D& b) {
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

/// Area of the intersection of the two rotated footprints, m^2.
inline double bev_intersection_area(const Box3D& a, const Box3D& b) {
  // Cheap reject on circumscribed circles.
  const double ra = 0.5 * std::hypot(a.l, a.w);
  const double rb = 0.5 * std::hypot(b.l, b.w);
  if (std::hypot(a.x - b.x, a.y - b.y) > ra + rb) return 0.0;

  const auto ca = bev_corners(a);
  const auto cb = bev_corners(b);
  const auto poly = detail::clip_convex({ca.begin(), ca.end()}, cb);
  const double area = detail::polygon_area(poly);
  return std::min(area, std::min(a.footprint_area(), b.footprint_area()));
}

inline double intersection_volume(const Box3D& a, const Box3D& b) {
  const double dz = detail::vertical_overlap(a, b);
  if (dz <= 0.0) return 0.0;
  return bev_intersection_area(a, b) * dz;
}

inline double iou_3d(const Box3D& a, const Box3D& b) {
  const double inter = intersection_volume(a, b);
  const double uni = a.volume() + b.volume() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

namespace detail {

// Andrew's monotone chain; returns the hull in counter-clockwise order.
inline std::vector<Point2> convex_hull(std::vector<Point2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) {
    return a.x != b.x ? a.x < b.x : a.y < b.y;
  });
  if (pts.size() < 3) return pts;
  std::vector<Point2> hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

}  // namespace detail

/// Volume of the enclosing region used by giou_3d: the convex hull of all
/// eight footprint corners times the union of the vertical extents.
inline double enclosing_volume(const Box3D& a, const Box3D& b) {
  const auto ca = bev_corners(a);
  const auto cb = bev_corners(b);
  std::vector<Point2> pts(ca.begin(), ca.end());
  pts.insert(pts.end(), cb.begin(), cb.end());
  const double area = detail::polygon_area(detail::convex_hull(std::move(pts)));
  const double zmin = std::min(a.bottom(), b.bottom());
  const double zmax = std::max(a.top(), b.top());
  return area * (zmax - zmin);
}

inline double giou_3d(const Box3D& a, const Box3D& b) {
  const double inter = intersection_volume(a, b);
  const double uni = a.volume() + b.volume() - inter;
  if (uni <= 0.0) return 0.0;
  const double iou = inter / uni;
  const double enclosing = std::max(enclosing_volume(a, b), uni);
  return iou - (enclosing - uni) / enclosing;
}

enum class Metric { IoU2D, GIoU3D };

struct DimensionMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Dense M x N similarity scores; rows are detections and columns tracklets.
struct SimilarityMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
  std::vector<std::size_t> row_ids;
  std::vector<std::size_t> col_ids;

  SimilarityMatrix() = default;
  SimilarityMatrix(std::size_t m, std::size_t n, double fill = 0.0)
      : rows(m), cols(n), values(m * n, fill), row_ids(m), col_ids(n) {
    for (std::size_t i = 0; i < m; ++i) row_ids[i] = i;
    for (std::size_t j = 0; j < n; ++j) col_ids[j] = j;
  }

  double& operator()(std::size_t i, std::size_t j) { return values[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
  bool empty() const { return rows == 0 || cols == 0; }
};

namespace detail {

template <class Box>
constexpr Metric native_metric() {
  if constexpr (std::is_same_v<Box, Box2D>) {
    return Metric::IoU2D;
  } else {
    return Metric::GIoU3D;
  }
}

}  // namespace detail

/// Fills values(i, j) = sim(detections[i], tracks[j]). Throws DimensionMismatch
/// when the metric does not apply to the box type.
template <class Box>
SimilarityMatrix similarity_matrix(std::span<const Box> detections,
                                   std::span<const Box> tracks, Metric metric) {
  if (metric != detail::native_metric<Box>()) {
    throw DimensionMismatch(std::string("similarity metric ") +
                            (metric == Metric::IoU2D ? "IoU2D" : "GIoU3D") +
                            " does not match box dimensionality");
  }
  SimilarityMatrix sim(detections.size(), tracks.size());
  for (std::size_t i = 0; i < detections.size(); ++i) {
    for (std::size_t j = 0; j < tracks.size(); ++j) {
      if constexpr (std::is_same_v<Box, Box2D>) {
        sim(i, j) = iou_2d(detections[i], tracks[j]);
      } else {
        sim(i, j) = giou_3d(detections[i], tracks[j]);
      }
    }
  }
  return sim;
}

template <class Box>
SimilarityMatrix similarity_matrix(const std::vector<Box>& detections,
                                   const std::vector<Box>& tracks, Metric metric) {
  return similarity_matrix(std::span<const Box>(detections), std::span<const Box>(tracks),
                           metric);
}

}  // namespace bytemot
