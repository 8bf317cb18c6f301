#include "fusetrack/sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace fusetrack {

const char* to_string(ScenarioTemplate t) {
  switch (t) {
    case ScenarioTemplate::radial_single: return "radial_single";
    case ScenarioTemplate::free_pair: return "free_pair";
    case ScenarioTemplate::crossing_trio: return "crossing_trio";
  }
  return "unknown";
}

ScenarioTemplate scenario_from_string(const std::string& name) {
  if (name == "radial_single") return ScenarioTemplate::radial_single;
  if (name == "free_pair") return ScenarioTemplate::free_pair;
  if (name == "crossing_trio") return ScenarioTemplate::crossing_trio;
  throw std::invalid_argument("unknown scenario template: " + name);
}

namespace {

// Ping-pong traversal of a waypoint polyline at constant speed.
struct Path {
  std::vector<Vec2> waypoints;
  std::vector<double> cumulative;  // arclength at each waypoint
  double length = 0.0;
  double phase = 0.0;        // starting arclength offset
  double speed_factor = 1.0; // relative to the scenario walk speed

  explicit Path(std::vector<Vec2> wps, double phase_frac = 0.0, double speed = 1.0)
      : waypoints(std::move(wps)), speed_factor(speed) {
    cumulative.push_back(0.0);
    for (std::size_t i = 1; i < waypoints.size(); ++i) {
      length += (waypoints[i] - waypoints[i - 1]).norm();
      cumulative.push_back(length);
    }
    phase = phase_frac * 2.0 * length;
  }

  Vec2 at(double distance) const {
    const double period = 2.0 * length;
    double s = std::fmod(distance + phase, period);
    if (s < 0) s += period;
    if (s > length) s = period - s;  // walking back
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), s);
    std::size_t seg = std::min(waypoints.size() - 2,
                               static_cast<std::size_t>(it - cumulative.begin()) - 1);
    const double seg_len = cumulative[seg + 1] - cumulative[seg];
    const double f = seg_len > 0 ? (s - cumulative[seg]) / seg_len : 0.0;
    return waypoints[seg] + f * (waypoints[seg + 1] - waypoints[seg]);
  }
};

std::vector<Path> scenario_paths(const ScenarioSpec& spec) {
  std::vector<Path> paths;
  switch (spec.scenario) {
    case ScenarioTemplate::radial_single:
      paths.emplace_back(std::vector<Vec2>{{0.5, 6.0}, {0.5, 16.0}});
      break;
    case ScenarioTemplate::free_pair: {
      // Each walker roams its own depth band so the pair never collides.
      std::mt19937_64 rng(spec.seed * 7919 + 11);
      const double bands[2][2] = {{6.5, 10.0}, {11.5, 15.5}};
      for (int obj = 0; obj < 2; ++obj) {
        std::uniform_real_distribution<double> uy(bands[obj][0], bands[obj][1]);
        std::vector<Vec2> wps;
        for (int k = 0; k < 6; ++k) {
          const double y = uy(rng);
          const double x_lim = std::min(3.0, 0.5 * y);
          std::uniform_real_distribution<double> ux(-x_lim, x_lim);
          wps.emplace_back(ux(rng), y);
        }
        wps.push_back(wps.front());  // closed loop
        paths.emplace_back(std::move(wps), obj * 0.5);
      }
      break;
    }
    case ScenarioTemplate::crossing_trio:
      // Two diagonal crossers plus one radial walker. The phase offsets keep
      // the closest approach near 1.4 m, so paths intersect repeatedly but
      // the walkers never collide.
      paths.emplace_back(std::vector<Vec2>{{-3.0, 6.5}, {3.0, 15.0}}, 0.0);
      paths.emplace_back(std::vector<Vec2>{{3.0, 6.5}, {-3.0, 15.0}}, 0.45);
      paths.emplace_back(std::vector<Vec2>{{0.4, 6.0}, {0.4, 16.0}}, 0.625);
      break;
  }
  return paths;
}

}  // namespace

GroundTruthLog generate_ground_truth(const ScenarioSpec& spec) {
  const auto paths = scenario_paths(spec);
  GroundTruthLog log;
  log.num_objects = static_cast<int>(paths.size());
  const double dt = 1.0 / spec.frame_rate;
  for (int f = 0; f < spec.duration; ++f) {
    GroundTruthFrame frame;
    frame.t = f * dt;
    for (std::size_t obj = 0; obj < paths.size(); ++obj) {
      const Vec2 p = paths[obj].at(paths[obj].speed_factor * spec.walk_speed * frame.t);
      frame.objects.push_back({static_cast<int>(obj), p.x(), p.y()});
    }
    log.frames.push_back(std::move(frame));
  }
  return log;
}

std::vector<EmbeddingVec> make_identity_embeddings(int num_identities, int dim,
                                                   double separation, std::uint64_t seed) {
  if (num_identities >= 2 && separation > 2.0) throw SeparationInfeasible{};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto random_unit = [&]() {
    EmbeddingVec v(dim);
    for (int i = 0; i < dim; ++i) v[i] = gauss(rng);
    return EmbeddingVec(v / v.norm());
  };
  auto min_dist = [](const std::vector<EmbeddingVec>& means, const EmbeddingVec& v) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& m : means) best = std::min(best, (m - v).norm());
    return best;
  };

  std::vector<EmbeddingVec> means;
  for (int k = 0; k < num_identities; ++k) {
    bool placed = false;
    for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
      EmbeddingVec v = random_unit();
      if (means.empty() || min_dist(means, v) >= separation) {
        means.push_back(v);
        placed = true;
      }
    }
    if (!placed) {
      // Repulsion fallback: push a candidate away from its nearest neighbor.
      EmbeddingVec v = random_unit();
      for (int iter = 0; iter < 500 && !placed; ++iter) {
        const EmbeddingVec* nearest = nullptr;
        double best = std::numeric_limits<double>::infinity();
        for (const auto& m : means) {
          const double d = (m - v).norm();
          if (d < best) {
            best = d;
            nearest = &m;
          }
        }
        if (best >= separation) {
          means.push_back(v);
          placed = true;
          break;
        }
        v = v - 0.2 * (*nearest);
        v.normalize();
      }
    }
    if (!placed) throw SeparationInfeasible{};
  }
  return means;
}

namespace {

struct ImageFootprint {
  double u_left = 0.0;
  double u_right = 0.0;
  double depth = 0.0;
  bool visible = false;
};

}  // namespace

CameraLog sense_camera(const GroundTruthLog& gt, const SensorNoiseModel& noise,
                       const Calibration& calib, const std::vector<EmbeddingVec>& identities,
                       bool night, std::uint64_t seed) {
  std::mt19937_64 rng(seed * 6364136223846793005ULL + 1442695040888963407ULL);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const auto& cam = noise.camera;
  const ExtrinsicPose pose = ExtrinsicPose::from_height_pitch(calib.height_m, calib.pitch_rad);
  const double half_width_m = 0.25;
  const double ped_height_m = 1.7;

  CameraLog log;
  for (const auto& frame : gt.frames) {
    CameraFrame out;
    out.t = frame.t;

    // Footprints for the occlusion test, nearest first.
    std::vector<ImageFootprint> feet(frame.objects.size());
    for (std::size_t i = 0; i < frame.objects.size(); ++i) {
      try {
        const auto proj =
            project_radar_to_pixel({frame.objects[i].x, frame.objects[i].y, 0.0},
                                   calib.intrinsics, pose);
        const double du = calib.intrinsics.fx * half_width_m / proj.scale;
        feet[i] = {proj.pixel.u - du, proj.pixel.u + du, proj.scale, true};
      } catch (const PointBehindCamera&) {
        feet[i].visible = false;
      }
    }

    for (std::size_t i = 0; i < frame.objects.size(); ++i) {
      if (!feet[i].visible) continue;
      double p_miss = cam.miss_base;
      if (night) p_miss += cam.night_miss_boost;
      for (std::size_t j = 0; j < frame.objects.size(); ++j) {
        if (j == i || !feet[j].visible || feet[j].depth >= feet[i].depth) continue;
        const double overlap = std::min(feet[i].u_right, feet[j].u_right) -
                               std::max(feet[i].u_left, feet[j].u_left);
        const double width = feet[i].u_right - feet[i].u_left;
        if (width > 0 && overlap > cam.occlusion_overlap * width) {
          p_miss += cam.occlusion_miss;
          break;
        }
      }
      if (uni(rng) < std::min(1.0, p_miss)) continue;

      const double x_noisy = frame.objects[i].x + cam.lateral_sigma_m * gauss(rng);
      const double y_true = frame.objects[i].y;
      Projection bottom, top;
      try {
        bottom = project_radar_to_pixel({x_noisy, y_true, 0.0}, calib.intrinsics, pose);
        top = project_radar_to_pixel({x_noisy, y_true, ped_height_m}, calib.intrinsics, pose);
      } catch (const PointBehindCamera&) {
        continue;
      }
      // Depth noise acts as vertical jitter of the box bottom so the realized
      // BEV error grows with range after IPM.
      double dv_dy = 0.0;
      try {
        const auto bump =
            project_radar_to_pixel({x_noisy, y_true + 0.05, 0.0}, calib.intrinsics, pose);
        dv_dy = (bump.pixel.v - bottom.pixel.v) / 0.05;
      } catch (const PointBehindCamera&) {
      }
      const double du = calib.intrinsics.fx * half_width_m / bottom.scale;
      BBox box;
      box.x_min = bottom.pixel.u - du + cam.bbox_sigma_px * gauss(rng);
      box.x_max = bottom.pixel.u + du + cam.bbox_sigma_px * gauss(rng);
      box.y_min = top.pixel.v + cam.bbox_sigma_px * gauss(rng);
      box.y_max = bottom.pixel.v + cam.bbox_sigma_px * gauss(rng) +
                  cam.depth_sigma_m * std::abs(dv_dy) * gauss(rng);
      if (box.x_min > box.x_max) std::swap(box.x_min, box.x_max);
      if (box.y_min > box.y_max) std::swap(box.y_min, box.y_max);
      box.x_min = std::clamp(box.x_min, 0.0, static_cast<double>(calib.image_width));
      box.x_max = std::clamp(box.x_max, 0.0, static_cast<double>(calib.image_width));
      box.y_min = std::clamp(box.y_min, 0.0, static_cast<double>(calib.image_height));
      box.y_max = std::clamp(box.y_max, 0.0, static_cast<double>(calib.image_height));

      CameraDetection det;
      det.bbox = box;
      const auto& mean = identities[static_cast<std::size_t>(frame.objects[i].id) %
                                    identities.size()];
      EmbeddingVec e = mean;
      for (Eigen::Index d = 0; d < e.size(); ++d) e[d] += noise.embedding_sigma * gauss(rng);
      det.embedding = e / e.norm();
      out.dets.push_back(std::move(det));
    }

    // Spurious boxes; more of them at night.
    const double fp_rate = night ? cam.fp_rate_night : cam.fp_rate_day;
    if (fp_rate > 0.0) {
      std::poisson_distribution<int> pois(fp_rate);
      const int extras = pois(rng);
      for (int k = 0; k < extras; ++k) {
        const double gy = 5.0 + 12.0 * uni(rng);
        const double gx = (uni(rng) - 0.5) * std::min(6.0, 1.0 * gy);
        Projection bottom, top;
        try {
          bottom = project_radar_to_pixel({gx, gy, 0.0}, calib.intrinsics, pose);
          top = project_radar_to_pixel({gx, gy, ped_height_m}, calib.intrinsics, pose);
        } catch (const PointBehindCamera&) {
          continue;
        }
        const double du = calib.intrinsics.fx * half_width_m / bottom.scale;
        CameraDetection det;
        det.bbox = {bottom.pixel.u - du, top.pixel.v, bottom.pixel.u + du, bottom.pixel.v};
        EmbeddingVec e(identities.empty() ? 128 : identities.front().size());
        for (Eigen::Index d = 0; d < e.size(); ++d) e[d] = gauss(rng);
        det.embedding = e / e.norm();
        out.dets.push_back(std::move(det));
      }
    }
    log.frames.push_back(std::move(out));
  }
  return log;
}

RadarLog sense_radar(const GroundTruthLog& gt, const SensorNoiseModel& noise,
                     std::uint64_t seed) {
  std::mt19937_64 rng(seed * 2862933555777941757ULL + 3037000493ULL);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const auto& rad = noise.radar;

  RadarLog log;
  for (const auto& frame : gt.frames) {
    RadarFrame out;
    out.t = frame.t;

    std::vector<Vec2> present;
    for (const auto& obj : frame.objects) {
      if (uni(rng) < rad.miss_prob) continue;
      present.emplace_back(obj.x, obj.y);
    }

    // Single-linkage groups under the merge distance: unresolved objects
    // return one pooled scatter at the group centroid.
    std::vector<int> group(present.size(), -1);
    int groups = 0;
    for (std::size_t i = 0; i < present.size(); ++i) {
      if (group[i] >= 0) continue;
      group[i] = groups;
      std::vector<std::size_t> stack{i};
      while (!stack.empty()) {
        const std::size_t a = stack.back();
        stack.pop_back();
        for (std::size_t b = 0; b < present.size(); ++b) {
          if (group[b] >= 0) continue;
          if ((present[a] - present[b]).norm() <= rad.merge_distance_m) {
            group[b] = groups;
            stack.push_back(b);
          }
        }
      }
      groups += 1;
    }
    std::vector<Vec2> center(groups, Vec2::Zero());
    std::vector<int> size(groups, 0);
    for (std::size_t i = 0; i < present.size(); ++i) {
      center[group[i]] += present[i];
      size[group[i]] += 1;
    }
    for (int g = 0; g < groups; ++g) center[g] /= std::max(1, size[g]);

    for (std::size_t i = 0; i < present.size(); ++i) {
      const Vec2 c = size[group[i]] > 1 ? center[group[i]] : present[i];
      for (int k = 0; k < rad.points_per_object; ++k) {
        RadarPoint p;
        p.x = c.x() + rad.lateral_sigma_m * gauss(rng);
        p.y = c.y() + rad.depth_sigma_m * gauss(rng);
        p.z = 0.0;
        out.points.push_back(p);
      }
    }
    log.frames.push_back(std::move(out));
  }
  return log;
}

}  // namespace fusetrack
