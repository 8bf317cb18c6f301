#include "fusetrack/dbscan.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <unordered_map>

namespace fusetrack {

const char* to_string(DetectionSource s) {
  switch (s) {
    case DetectionSource::camera: return "camera";
    case DetectionSource::radar: return "radar";
    case DetectionSource::camera_only: return "camera_only";
    case DetectionSource::radar_only: return "radar_only";
    case DetectionSource::both: return "both";
  }
  return "unknown";
}

namespace {

struct GridIndex {
  double cell = 1.0;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> bins;

  static std::uint64_t key(std::int32_t ix, std::int32_t iy) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(ix)) << 32) |
           static_cast<std::uint32_t>(iy);
  }

  GridIndex(const std::vector<RadarPoint>& pts, double eps) : cell(eps) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
      bins[key(coord(pts[i].x), coord(pts[i].y))].push_back(i);
    }
  }

  std::int32_t coord(double v) const {
    return static_cast<std::int32_t>(std::floor(v / cell));
  }

  // Neighbor indices within eps, sorted ascending so expansion order is
  // independent of hash iteration order.
  std::vector<std::size_t> query(const std::vector<RadarPoint>& pts, std::size_t center,
                                 double eps) const {
    std::vector<std::size_t> out;
    const double e2 = eps * eps;
    const std::int32_t cx = coord(pts[center].x);
    const std::int32_t cy = coord(pts[center].y);
    for (std::int32_t ix = cx - 1; ix <= cx + 1; ++ix) {
      for (std::int32_t iy = cy - 1; iy <= cy + 1; ++iy) {
        auto it = bins.find(key(ix, iy));
        if (it == bins.end()) continue;
        for (std::size_t j : it->second) {
          const double dx = pts[j].x - pts[center].x;
          const double dy = pts[j].y - pts[center].y;
          if (dx * dx + dy * dy <= e2) out.push_back(j);
        }
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }
};

}  // namespace

DbscanResult dbscan(const std::vector<RadarPoint>& points, double eps, int min_pts) {
  DbscanResult result;
  const std::size_t n = points.size();
  if (n == 0) return result;

  const GridIndex grid(points, eps);
  constexpr int kUnvisited = -2;
  constexpr int kNoise = -1;
  std::vector<int> label(n, kUnvisited);

  for (std::size_t seed = 0; seed < n; ++seed) {
    if (label[seed] != kUnvisited) continue;
    auto neighbors = grid.query(points, seed, eps);
    if (neighbors.size() < static_cast<std::size_t>(min_pts)) {
      label[seed] = kNoise;
      continue;
    }
    const int cluster_id = static_cast<int>(result.clusters.size());
    result.clusters.emplace_back();
    label[seed] = cluster_id;
    std::deque<std::size_t> frontier(neighbors.begin(), neighbors.end());
    while (!frontier.empty()) {
      const std::size_t p = frontier.front();
      frontier.pop_front();
      if (label[p] == kNoise) label[p] = cluster_id;  // border point reclaimed
      if (label[p] != kUnvisited) continue;
      label[p] = cluster_id;
      auto reach = grid.query(points, p, eps);
      if (reach.size() >= static_cast<std::size_t>(min_pts)) {
        frontier.insert(frontier.end(), reach.begin(), reach.end());
      }
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (label[i] == kNoise) {
      result.noise.push_back(i);
    } else {
      result.clusters[static_cast<std::size_t>(label[i])].member_indices.push_back(i);
    }
  }
  for (auto& c : result.clusters) {
    Vec2 sum = Vec2::Zero();
    for (std::size_t i : c.member_indices) sum += Vec2(points[i].x, points[i].y);
    c.centroid = sum / static_cast<double>(c.member_indices.size());
  }
  return result;
}

Detection cluster_to_detection(const Cluster& cluster) {
  Detection det;
  det.position = cluster.centroid;
  det.source = DetectionSource::radar;
  return det;
}

}  // namespace fusetrack
