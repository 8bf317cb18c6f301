#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fusetrack/config.hpp"
#include "fusetrack/logs.hpp"
#include "fusetrack/lstm.hpp"

namespace fusetrack {

struct CalibrationMissing : std::runtime_error {
  CalibrationMissing() : std::runtime_error("camera calibration is missing or invalid") {}
};

struct NonMonotonicTimestamps : std::runtime_error {
  NonMonotonicTimestamps() : std::runtime_error("frame timestamps are not time-ordered") {}
};

struct FusedDetection {
  Vec2 position = Vec2::Zero();  // BEV
  DetectionSource source = DetectionSource::both;
  std::optional<EmbeddingVec> embedding;       // present iff a camera ref exists
  std::optional<std::size_t> camera_ref;
  std::optional<std::size_t> radar_ref;
};

struct CrossSensorMatch {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (camera, radar)
  std::vector<std::size_t> camera_only;
  std::vector<std::size_t> radar_only;
};

// Hungarian matching on BEV Euclidean distance with a hard gate.
CrossSensorMatch associate_cross_sensor(const std::vector<Vec2>& camera_bev,
                                        const std::vector<Vec2>& radar_bev, double gate_m);

// Decision-level position fusion: both sensors -> (X_C, Y_R); one sensor ->
// that sensor's position.
FusedDetection fuse_position(const std::optional<Vec2>& camera_bev,
                             const std::optional<Vec2>& radar_bev);

struct TriTrackerOutput {
  std::vector<TrackRecord> camera;
  std::vector<TrackRecord> radar;
  std::vector<TrackRecord> fused;
};

// Runs the camera, radar, and fused trackers over the two sensor streams.
// The camera tracker associates in pixel space and its exports are projected
// to BEV; the radar and fused trackers live in BEV. The fused stream is keyed
// on the lower-rate sensor with nearest-timestamp pairing.
TriTrackerOutput run_tri_tracker(const CameraLog& camera_log, const RadarLog& radar_log,
                                 const RunConfig& cfg,
                                 std::shared_ptr<const LstmParams> pixel_params = nullptr,
                                 std::shared_ptr<const LstmParams> bev_params = nullptr);

}  // namespace fusetrack
