#pragma once

#include <Eigen/Dense>

namespace fusetrack {

using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

// Constant-velocity filter over (x, y, vx, vy).
struct KalmanState {
  Vec4 state = Vec4::Zero();
  Mat4 covariance = Mat4::Identity();
  double process_noise = 1.0;      // white-noise acceleration intensity q
  double measurement_noise = 0.1;  // position measurement variance r

  Eigen::Vector2d position() const { return state.head<2>(); }
  Eigen::Vector2d velocity() const { return state.tail<2>(); }

  static KalmanState initial(const Eigen::Vector2d& z, double q, double r,
                             double p0_pos = 1.0, double p0_vel = 100.0);
};

KalmanState kalman_predict(const KalmanState& s, double dt);
KalmanState kalman_update(const KalmanState& s, const Eigen::Vector2d& z);

}  // namespace fusetrack
