#include "fusetrack/kalman.hpp"

namespace fusetrack {

KalmanState KalmanState::initial(const Eigen::Vector2d& z, double q, double r, double p0_pos,
                                 double p0_vel) {
  KalmanState s;
  s.state << z.x(), z.y(), 0.0, 0.0;
  s.covariance = Vec4(p0_pos, p0_pos, p0_vel, p0_vel).asDiagonal();
  s.process_noise = q;
  s.measurement_noise = r;
  return s;
}

KalmanState kalman_predict(const KalmanState& s, double dt) {
  Mat4 f = Mat4::Identity();
  f(0, 2) = dt;
  f(1, 3) = dt;

  // Discrete white-noise acceleration model.
  const double dt2 = dt * dt;
  Mat4 q = Mat4::Zero();
  q(0, 0) = q(1, 1) = dt2 * dt2 / 4.0;
  q(0, 2) = q(2, 0) = dt2 * dt / 2.0;
  q(1, 3) = q(3, 1) = dt2 * dt / 2.0;
  q(2, 2) = q(3, 3) = dt2;
  q *= s.process_noise;

  KalmanState out = s;
  out.state = f * s.state;
  out.covariance = f * s.covariance * f.transpose() + q;
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose());
  return out;
}

KalmanState kalman_update(const KalmanState& s, const Eigen::Vector2d& z) {
  Eigen::Matrix<double, 2, 4> h = Eigen::Matrix<double, 2, 4>::Zero();
  h(0, 0) = 1.0;
  h(1, 1) = 1.0;
  const Eigen::Matrix2d r = Eigen::Matrix2d::Identity() * s.measurement_noise;

  const Eigen::Vector2d innovation = z - h * s.state;
  const Eigen::Matrix2d innovation_cov = h * s.covariance * h.transpose() + r;
  const Eigen::Matrix<double, 4, 2> gain =
      s.covariance * h.transpose() * innovation_cov.inverse();

  KalmanState out = s;
  out.state = s.state + gain * innovation;
  // Joseph form keeps the covariance symmetric PSD.
  const Mat4 ikh = Mat4::Identity() - gain * h;
  out.covariance = ikh * s.covariance * ikh.transpose() + gain * r * gain.transpose();
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose());
  return out;
}

}  // namespace fusetrack
