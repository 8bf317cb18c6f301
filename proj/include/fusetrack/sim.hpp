#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fusetrack/clear.hpp"
#include "fusetrack/dbscan.hpp"
#include "fusetrack/geometry.hpp"

namespace fusetrack {

struct SeparationInfeasible : std::runtime_error {
  SeparationInfeasible()
      : std::runtime_error("cannot place identity means at the requested separation") {}
};

enum class ScenarioTemplate { radial_single, free_pair, crossing_trio };

struct ScenarioSpec {
  ScenarioTemplate scenario = ScenarioTemplate::crossing_trio;
  int duration = 600;       // frames
  double frame_rate = 10.0; // Hz
  bool night = false;
  std::uint64_t seed = 1;
  double walk_speed = 1.4;  // m/s
};

struct CameraNoise {
  double lateral_sigma_m = 0.05;
  double depth_sigma_m = 0.10;     // realized as bottom-edge jitter before IPM
  double bbox_sigma_px = 3.0;      // looseness on every box edge
  double miss_base = 0.05;
  double occlusion_miss = 0.95;     // added when overlapped by a nearer object
  double occlusion_overlap = 0.3; // footprint overlap fraction that counts as occluded
  double night_miss_boost = 0.12;
  double fp_rate_day = 0.02;       // expected spurious boxes per frame
  double fp_rate_night = 0.15;
};

struct RadarNoise {
  double depth_sigma_m = 0.08;
  double lateral_sigma_m = 0.45;
  double merge_distance_m = 1.5;  // closer objects return one pooled scatter
  double miss_prob = 0.09;
  int points_per_object = 10;
};

struct SensorNoiseModel {
  CameraNoise camera;
  RadarNoise radar;
  double embedding_sigma = 0.015;
};

struct Calibration {
  CameraIntrinsics intrinsics;
  double height_m = 1.635;
  double pitch_rad = 0.0;
  int image_width = 640;
  int image_height = 480;
};

struct GroundTruthLog {
  std::vector<GroundTruthFrame> frames;
  int num_objects = 0;
};

struct CameraDetection {
  BBox bbox;
  EmbeddingVec embedding;  // 128-d unit norm
};

struct CameraFrame {
  double t = 0.0;
  std::vector<CameraDetection> dets;
};

struct RadarFrame {
  double t = 0.0;
  std::vector<RadarPoint> points;
};

struct CameraLog {
  std::vector<CameraFrame> frames;
};

struct RadarLog {
  std::vector<RadarFrame> frames;
};

// Smooth constant-speed waypoint trajectories in BEV; a pure function of the spec.
GroundTruthLog generate_ground_truth(const ScenarioSpec& spec);

// Unit-norm identity means with pairwise Euclidean distance >= separation.
std::vector<EmbeddingVec> make_identity_embeddings(int num_identities, int dim,
                                                   double separation, std::uint64_t seed);

CameraLog sense_camera(const GroundTruthLog& gt, const SensorNoiseModel& noise,
                       const Calibration& calib, const std::vector<EmbeddingVec>& identities,
                       bool night, std::uint64_t seed);

RadarLog sense_radar(const GroundTruthLog& gt, const SensorNoiseModel& noise,
                     std::uint64_t seed);

const char* to_string(ScenarioTemplate t);
ScenarioTemplate scenario_from_string(const std::string& name);

}  // namespace fusetrack
