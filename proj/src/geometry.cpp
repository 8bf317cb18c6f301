#include "fusetrack/geometry.hpp"

#include <cmath>

namespace fusetrack {

ExtrinsicPose ExtrinsicPose::from_height_pitch(double height_m, double pitch_rad) {
  const double s = std::sin(pitch_rad);
  const double c = std::cos(pitch_rad);
  ExtrinsicPose pose;
  // Rows are the camera axes expressed in world coordinates.
  pose.rotation << 1.0, 0.0, 0.0,
                   0.0, -s, -c,
                   0.0, c, -s;
  const Vec3 center(0.0, 0.0, height_m);
  pose.translation = -pose.rotation * center;
  return pose;
}

double ExtrinsicPose::height() const {
  // Camera center in world coordinates: C = -R^T t.
  return (-(rotation.transpose() * translation)).z();
}

double ExtrinsicPose::pitch() const {
  // Optical axis in world coordinates is the third row of R.
  const Vec3 axis = rotation.row(2);
  return std::atan2(-axis.z(), std::hypot(axis.x(), axis.y()));
}

bool ExtrinsicPose::orthonormal(double tol) const {
  const Mat3 err = rotation.transpose() * rotation - Mat3::Identity();
  return err.cwiseAbs().maxCoeff() <= tol && rotation.determinant() > 0.0;
}

Projection project_radar_to_pixel(const Vec3& point, const CameraIntrinsics& k,
                                  const ExtrinsicPose& pose) {
  const Vec3 cam = pose.rotation * point + pose.translation;
  const double s = cam.z();
  if (s <= 0.0) throw PointBehindCamera{};
  Projection out;
  out.pixel.u = (k.fx * cam.x() + k.gamma * cam.y()) / s + k.u0;
  out.pixel.v = k.fy * cam.y() / s + k.v0;
  out.scale = s;
  return out;
}

PixelPoint bbox_bottom_center(const BBox& box) {
  return {(box.x_min + box.x_max) * 0.5, box.y_max};
}

GroundPoint pixel_to_ground(const PixelPoint& pixel, const CameraIntrinsics& k,
                            double height_m, double pitch_rad) {
  const ExtrinsicPose pose = ExtrinsicPose::from_height_pitch(height_m, pitch_rad);
  // Back-project through K^-1; skew handled analytically.
  const double yc = (pixel.v - k.v0) / k.fy;
  const double xc = (pixel.u - k.u0 - k.gamma * yc) / k.fx;
  const Vec3 dir_cam(xc, yc, 1.0);
  const Vec3 dir = pose.rotation.transpose() * dir_cam;
  if (dir.z() >= 0.0) throw HorizonOrAbove{};
  const double t = height_m / -dir.z();
  return {t * dir.x(), t * dir.y()};
}

}  // namespace fusetrack
