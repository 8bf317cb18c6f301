#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace fusetrack {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// World / BEV frame: x lateral (right), y depth (forward), z up.
// Origin is the radar's vertical projection onto the ground plane (z = 0).
// Camera frame: x right, y down, z along the optical axis.

struct PointBehindCamera : std::runtime_error {
  PointBehindCamera() : std::runtime_error("point projects behind the camera (s <= 0)") {}
};

struct HorizonOrAbove : std::runtime_error {
  HorizonOrAbove() : std::runtime_error("pixel ray is parallel to or above the ground plane") {}
};

struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double u0 = 0.0;
  double v0 = 0.0;
  double gamma = 0.0;  // skew

  Mat3 matrix() const {
    Mat3 k;
    k << fx, gamma, u0, 0.0, fy, v0, 0.0, 0.0, 1.0;
    return k;
  }
  bool valid() const { return fx > 0.0 && fy > 0.0; }
};

struct ExtrinsicPose {
  Mat3 rotation = Mat3::Identity();   // world -> camera
  Vec3 translation = Vec3::Zero();    // p_cam = R * p_world + t

  // Camera mounted at (0, 0, height) looking along world +y, pitched down.
  static ExtrinsicPose from_height_pitch(double height_m, double pitch_rad);

  double height() const;
  double pitch() const;
  bool orthonormal(double tol = 1e-9) const;
};

struct BBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  bool valid() const { return x_min <= x_max && y_min <= y_max; }
};

struct GroundPoint {
  double x = 0.0;  // lateral, meters
  double y = 0.0;  // depth, meters
};

struct PixelPoint {
  double u = 0.0;
  double v = 0.0;
};

struct Projection {
  PixelPoint pixel;
  double scale = 0.0;  // camera-frame depth s
};

// Pinhole projection s*[u v 1]^T = K [R|T] [X Y Z 1]^T. Throws PointBehindCamera
// when the transformed depth s is not positive.
Projection project_radar_to_pixel(const Vec3& point, const CameraIntrinsics& k,
                                  const ExtrinsicPose& pose);

PixelPoint bbox_bottom_center(const BBox& box);

// Inverse perspective mapping: intersect the back-projected pixel ray with the
// ground plane z = 0. Throws HorizonOrAbove when the ray does not descend.
GroundPoint pixel_to_ground(const PixelPoint& pixel, const CameraIntrinsics& k,
                            double height_m, double pitch_rad);

inline Vec3 lift_to_ground(const GroundPoint& g) { return {g.x, g.y, 0.0}; }

}  // namespace fusetrack
