#pragma once

// Constant-velocity Kalman filters for 2D (8-dim) and 3D (10-dim) tracks, and
// detected-velocity backward prediction.
//
// 2D state: (u, v, a, b, du, dv, da, db) with (u, v) the box center, a the
// aspect ratio w/h and b the height. 3D state: (x, y, z, theta, l, w, h, dx,
// dy, dz) in world coordinates. Velocities are per frame.

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

#include <Eigen/Dense>

#include "bytemot/geometry.hpp"

namespace bytemot {

template <int N>
struct KalmanState {
  static constexpr int kDim = N;
  Eigen::Matrix<double, N, 1> mean = Eigen::Matrix<double, N, 1>::Zero();
  Eigen::Matrix<double, N, N> covariance = Eigen::Matrix<double, N, N>::Identity();
};

using KalmanState2D = KalmanState<8>;
using KalmanState3D = KalmanState<10>;

struct NoiseConfig {
  // 2D noise is proportional to the box height.
  double weight_position = 1.0 / 20.0;
  double weight_velocity = 1.0 / 160.0;

  // 3D standard deviations.
  double position_std = 0.5;     // m
  double yaw_std = 0.1;          // rad
  double size_std = 0.3;         // m
  double velocity_std = 0.5;     // m/frame, process noise
  double initial_velocity_std = 3.0;  // m/frame, prior on a fresh track

  // Confidence-adaptive measurement noise: R' = max(alpha * (1 - s)^2 * R, floor).
  bool adaptive = false;
  double alpha = 100.0;
  double min_noise_floor = 1e-4;

  void validate() const {
    const bool ok = weight_position > 0 && weight_velocity > 0 && position_std > 0 &&
                    yaw_std > 0 && size_std > 0 && velocity_std > 0 &&
                    initial_velocity_std > 0 && alpha >= 0 && min_noise_floor > 0;
    if (!ok) throw std::invalid_argument("noise scales must be positive and alpha >= 0");
  }
};

struct Velocity {
  double vx = 0.0;
  double vy = 0.0;
};

namespace detail {

template <int N, int M>
Eigen::Matrix<double, M, N> observation_matrix() {
  Eigen::Matrix<double, M, N> h = Eigen::Matrix<double, M, N>::Zero();
  h.template leftCols<M>().setIdentity();
  return h;
}

template <int M>
Eigen::Matrix<double, M, M> adapt_measurement_noise(const Eigen::Matrix<double, M, M>& base,
                                                    double score, const NoiseConfig& noise) {
  if (!noise.adaptive) return base;
  const double scale = noise.alpha * (1.0 - score) * (1.0 - score);
  Eigen::Matrix<double, M, M> r = Eigen::Matrix<double, M, M>::Zero();
  for (int i = 0; i < M; ++i) r(i, i) = std::max(scale * base(i, i), noise.min_noise_floor);
  return r;
}

inline void check_score(double score) {
  if (!(score >= 0.0 && score <= 1.0)) {
    throw std::invalid_argument("detection score must lie in [0, 1]");
  }
}

// Shared linear update with a Joseph-form covariance. `wrap_index` marks an
// angular measurement component whose residual is wrapped, or -1.
template <int N, int M>
void linear_update(KalmanState<N>& state, const Eigen::Matrix<double, M, 1>& z,
                   const Eigen::Matrix<double, M, M>& r, int wrap_index) {
  const Eigen::Matrix<double, M, N> h = observation_matrix<N, M>();
  Eigen::Matrix<double, M, 1> residual = z - h * state.mean;
  if (wrap_index >= 0) residual(wrap_index) = wrap_angle(residual(wrap_index));

  const Eigen::Matrix<double, M, M> s = h * state.covariance * h.transpose() + r;
  const Eigen::Matrix<double, N, M> pht = state.covariance * h.transpose();
  const Eigen::Matrix<double, N, M> gain = s.ldlt().solve(pht.transpose()).transpose();

  state.mean += gain * residual;
  const Eigen::Matrix<double, N, N> i_kh =
      Eigen::Matrix<double, N, N>::Identity() - gain * h;
  state.covariance = i_kh * state.covariance * i_kh.transpose() + gain * r * gain.transpose();
  state.covariance = 0.5 * (state.covariance + state.covariance.transpose()).eval();
}

template <int N>
void constant_velocity_predict(KalmanState<N>& state, int positions,
                               const Eigen::Matrix<double, N, 1>& process_std) {
  Eigen::Matrix<double, N, N> f = Eigen::Matrix<double, N, N>::Identity();
  for (int i = 0; i < N - positions; ++i) f(i, positions + i) = 1.0;
  state.mean = f * state.mean;
  state.covariance = f * state.covariance * f.transpose();
  state.covariance.diagonal() += process_std.cwiseProduct(process_std);
  state.covariance = 0.5 * (state.covariance + state.covariance.transpose()).eval();
}

}  // namespace detail

// ---- 2D --------------------------------------------------------------------

inline Eigen::Vector4d box_to_measurement(const Box2D& b) {
  return {b.center_x(), b.center_y(), b.width() / b.height(), b.height()};
}

inline Box2D state_to_box(const KalmanState2D& s) {
  const double h = s.mean(3);
  const double w = s.mean(2) * h;
  return {s.mean(0) - 0.5 * w, s.mean(1) - 0.5 * h, s.mean(0) + 0.5 * w, s.mean(1) + 0.5 * h};
}

inline KalmanState2D kf_init(const Box2D& box, const NoiseConfig& noise) {
  if (!box.valid() || box.height() <= 0.0 || box.width() <= 0.0) {
    throw std::invalid_argument("cannot initialize a track from an invalid 2D box");
  }
  KalmanState2D s;
  s.mean.head<4>() = box_to_measurement(box);
  const double h = box.height();
  const double wp = noise.weight_position;
  const double wv = noise.weight_velocity;
  Eigen::Matrix<double, 8, 1> std;
  std << 2 * wp * h, 2 * wp * h, 1e-2, 2 * wp * h, 10 * wv * h, 10 * wv * h, 1e-5, 10 * wv * h;
  s.covariance = std.cwiseProduct(std).asDiagonal();
  return s;
}

inline KalmanState2D kf_predict(KalmanState2D s, const NoiseConfig& noise) {
  const double h = s.mean(3);
  const double wp = noise.weight_position;
  const double wv = noise.weight_velocity;
  Eigen::Matrix<double, 8, 1> std;
  std << wp * h, wp * h, 1e-2, wp * h, wv * h, wv * h, 1e-5, wv * h;
  detail::constant_velocity_predict(s, 4, std);
  return s;
}

inline Eigen::Matrix4d measurement_noise(const KalmanState2D& s, const NoiseConfig& noise) {
  const double h = s.mean(3);
  const double wp = noise.weight_position;
  Eigen::Vector4d std{wp * h, wp * h, 1e-1, wp * h};
  return std.cwiseProduct(std).asDiagonal();
}

inline KalmanState2D kf_update(KalmanState2D s, const Box2D& box, double score,
                               const NoiseConfig& noise) {
  detail::check_score(score);
  if (!box.valid() || box.height() <= 0.0) {
    throw std::invalid_argument("invalid 2D measurement box");
  }
  const Eigen::Matrix4d r =
      detail::adapt_measurement_noise<4>(measurement_noise(s, noise), score, noise);
  detail::linear_update<8, 4>(s, box_to_measurement(box), r, -1);
  return s;
}

// ---- 3D --------------------------------------------------------------------

inline Eigen::Matrix<double, 7, 1> box_to_measurement(const Box3D& b) {
  Eigen::Matrix<double, 7, 1> z;
  z << b.x, b.y, b.z, b.theta, b.l, b.w, b.h;
  return z;
}

inline Box3D state_to_box(const KalmanState3D& s) {
  return {s.mean(0), s.mean(1), s.mean(2), wrap_angle(s.mean(3)),
          s.mean(4), s.mean(5), s.mean(6)};
}

inline KalmanState3D kf_init(const Box3D& box, const NoiseConfig& noise) {
  if (!box.valid()) throw std::invalid_argument("cannot initialize a track from an invalid 3D box");
  KalmanState3D s;
  s.mean.head<7>() = box_to_measurement(box);
  const double p = noise.position_std;
  const double v = noise.initial_velocity_std;
  Eigen::Matrix<double, 10, 1> std;
  std << p, p, p, noise.yaw_std, noise.size_std, noise.size_std, noise.size_std, v, v, v;
  s.covariance = std.cwiseProduct(std).asDiagonal();
  return s;
}

inline KalmanState3D kf_predict(KalmanState3D s, const NoiseConfig& noise) {
  const double p = noise.position_std;
  const double v = noise.velocity_std;
  Eigen::Matrix<double, 10, 1> std;
  std << p, p, p, noise.yaw_std, noise.size_std, noise.size_std, noise.size_std, v, v, v;
  // Only (x, y, z) carry a velocity; orientation and size stay put.
  Eigen::Matrix<double, 10, 10> f = Eigen::Matrix<double, 10, 10>::Identity();
  f(0, 7) = f(1, 8) = f(2, 9) = 1.0;
  s.mean = f * s.mean;
  s.covariance = f * s.covariance * f.transpose();
  s.covariance.diagonal() += std.cwiseProduct(std);
  s.covariance = 0.5 * (s.covariance + s.covariance.transpose()).eval();
  s.mean(3) = wrap_angle(s.mean(3));
  return s;
}

inline Eigen::Matrix<double, 7, 7> measurement_noise(const KalmanState3D&,
                                                     const NoiseConfig& noise) {
  const double p = noise.position_std;
  const double z = noise.size_std;
  Eigen::Matrix<double, 7, 1> std;
  std << p, p, p, noise.yaw_std, z, z, z;
  return std.cwiseProduct(std).asDiagonal();
}

inline KalmanState3D kf_update(KalmanState3D s, const Box3D& box, double score,
                               const NoiseConfig& noise) {
  detail::check_score(score);
  if (!box.valid()) throw std::invalid_argument("invalid 3D measurement box");
  const Eigen::Matrix<double, 7, 7> r =
      detail::adapt_measurement_noise<7>(measurement_noise(s, noise), score, noise);
  detail::linear_update<10, 7>(s, box_to_measurement(box), r, 3);
  s.mean(3) = wrap_angle(s.mean(3));
  return s;
}

/// Measurement noise actually used by kf_update for a detection of `score`.
template <int N>
auto adapted_measurement_noise(const KalmanState<N>& s, double score, const NoiseConfig& noise) {
  detail::check_score(score);
  return detail::adapt_measurement_noise(measurement_noise(s, noise), score, noise);
}

/// Shifts a detection back by its detected planar velocity to where it was
/// in the previous frame. Returns nullopt when no velocity is available.
inline std::optional<Box3D> backward_predict(const Box3D& box,
                                             const std::optional<Velocity>& velocity) {
  if (!velocity || !std::isfinite(velocity->vx) || !std::isfinite(velocity->vy)) {
    return std::nullopt;
  }
  Box3D out = box;
  out.x -= velocity->vx;
  out.y -= velocity->vy;
  return out;
}

}  // namespace bytemot
