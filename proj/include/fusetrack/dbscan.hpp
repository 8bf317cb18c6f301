#pragma once

#include <cstddef>
#include <vector>

#include "fusetrack/detection.hpp"

namespace fusetrack {

struct RadarPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

struct Cluster {
  std::vector<std::size_t> member_indices;  // sorted ascending
  Vec2 centroid = Vec2::Zero();             // mean of member (x, y)
};

struct DbscanResult {
  std::vector<Cluster> clusters;
  std::vector<std::size_t> noise;  // sorted ascending
};

// DBSCAN over Euclidean distance in (x, y); z is ignored. Deterministic:
// seeds are scanned in input order and border points join the first cluster
// that reaches them. Uses a uniform grid for region queries.
DbscanResult dbscan(const std::vector<RadarPoint>& points, double eps, int min_pts);

Detection cluster_to_detection(const Cluster& cluster);

}  // namespace fusetrack
