#pragma once

#include <optional>
#include <vector>

#include "fusetrack/geometry.hpp"

namespace fusetrack {

using EmbeddingVec = Eigen::VectorXd;

enum class DetectionSource { camera, radar, camera_only, radar_only, both };

const char* to_string(DetectionSource s);

// One sensed object in one frame. `position` lives in the tracker's native
// space: pixels for the camera tracker, BEV meters for radar and fused.
struct Detection {
  Vec2 position = Vec2::Zero();
  std::optional<BBox> bbox;
  std::optional<EmbeddingVec> embedding;
  DetectionSource source = DetectionSource::camera;
};

}  // namespace fusetrack
