#include "fusetrack/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "fusetrack/dbscan.hpp"
#include "fusetrack/track_manager.hpp"

namespace fusetrack {

CrossSensorMatch associate_cross_sensor(const std::vector<Vec2>& camera_bev,
                                        const std::vector<Vec2>& radar_bev, double gate_m) {
  CrossSensorMatch out;
  constexpr double kBlocked = 1e12;
  if (!camera_bev.empty() && !radar_bev.empty()) {
    Eigen::MatrixXd cost(camera_bev.size(), radar_bev.size());
    for (std::size_t i = 0; i < camera_bev.size(); ++i) {
      for (std::size_t j = 0; j < radar_bev.size(); ++j) {
        const double d = (camera_bev[i] - radar_bev[j]).norm();
        cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            d <= gate_m ? d : kBlocked;
      }
    }
    const Assignment a = hungarian_solve(cost, kBlocked);
    out.pairs = a.matches;
  }
  std::vector<char> cam_used(camera_bev.size(), 0), rad_used(radar_bev.size(), 0);
  for (const auto& [c, r] : out.pairs) {
    cam_used[c] = 1;
    rad_used[r] = 1;
  }
  for (std::size_t i = 0; i < camera_bev.size(); ++i)
    if (!cam_used[i]) out.camera_only.push_back(i);
  for (std::size_t j = 0; j < radar_bev.size(); ++j)
    if (!rad_used[j]) out.radar_only.push_back(j);
  return out;
}

FusedDetection fuse_position(const std::optional<Vec2>& camera_bev,
                             const std::optional<Vec2>& radar_bev) {
  FusedDetection det;
  if (camera_bev && radar_bev) {
    det.position = Vec2(camera_bev->x(), radar_bev->y());  // lateral from camera, depth from radar
    det.source = DetectionSource::both;
  } else if (camera_bev) {
    det.position = *camera_bev;
    det.source = DetectionSource::camera_only;
  } else if (radar_bev) {
    det.position = *radar_bev;
    det.source = DetectionSource::radar_only;
  } else {
    throw std::invalid_argument("fuse_position needs at least one sensor position");
  }
  return det;
}

namespace {

void check_monotonic(const std::vector<double>& ts) {
  for (std::size_t i = 1; i < ts.size(); ++i) {
    if (ts[i] < ts[i - 1]) throw NonMonotonicTimestamps{};
  }
}

struct AlignedFrame {
  double t = 0.0;
  const CameraFrame* cam = nullptr;
  const RadarFrame* rad = nullptr;
};

template <typename Frames>
const typename Frames::value_type* nearest_frame(const Frames& frames, double t,
                                                 double max_skew) {
  if (frames.empty()) return nullptr;
  auto cmp = [](const auto& f, double v) { return f.t < v; };
  auto it = std::lower_bound(frames.begin(), frames.end(), t, cmp);
  const typename Frames::value_type* best = nullptr;
  double best_d = max_skew;
  if (it != frames.end() && std::abs(it->t - t) <= best_d) {
    best = &*it;
    best_d = std::abs(it->t - t);
  }
  if (it != frames.begin()) {
    auto prev = std::prev(it);
    if (std::abs(prev->t - t) <= best_d) best = &*prev;
  }
  return best;
}

std::vector<AlignedFrame> align_streams(const CameraLog& cam, const RadarLog& rad,
                                        double max_skew) {
  std::vector<AlignedFrame> out;
  if (cam.frames.empty()) {
    for (const auto& r : rad.frames) out.push_back({r.t, nullptr, &r});
    return out;
  }
  if (rad.frames.empty()) {
    for (const auto& c : cam.frames) out.push_back({c.t, &c, nullptr});
    return out;
  }
  // Key on the lower-rate sensor (ties go to radar, the typical slower one).
  if (rad.frames.size() <= cam.frames.size()) {
    for (const auto& r : rad.frames) {
      out.push_back({r.t, nearest_frame(cam.frames, r.t, max_skew), &r});
    }
  } else {
    for (const auto& c : cam.frames) {
      out.push_back({c.t, &c, nearest_frame(rad.frames, c.t, max_skew)});
    }
  }
  return out;
}

PredictorFactory make_factory(const RunConfig& cfg, bool bev_space,
                              std::shared_ptr<const LstmParams> lstm) {
  if (cfg.motion_model == "bilstm") {
    if (!lstm) throw std::invalid_argument("bilstm motion model selected but no parameters");
    return make_bilstm_factory(std::move(lstm));
  }
  KalmanSettings s;
  s.q = bev_space ? cfg.kalman_q_bev : cfg.kalman_q_px;
  s.r = bev_space ? cfg.kalman_r_bev : cfg.kalman_r_px;
  s.p0_pos = bev_space ? cfg.kalman_p0_pos_bev : cfg.kalman_p0_pos_px;
  s.p0_vel = bev_space ? cfg.kalman_p0_vel_bev : cfg.kalman_p0_vel_px;
  return make_kalman_factory(s);
}

}  // namespace

TriTrackerOutput run_tri_tracker(const CameraLog& camera_log, const RadarLog& radar_log,
                                 const RunConfig& cfg,
                                 std::shared_ptr<const LstmParams> pixel_params,
                                 std::shared_ptr<const LstmParams> bev_params) {
  if (!cfg.calibration.intrinsics.valid()) throw CalibrationMissing{};
  {
    std::vector<double> ts;
    for (const auto& f : camera_log.frames) ts.push_back(f.t);
    check_monotonic(ts);
    ts.clear();
    for (const auto& f : radar_log.frames) ts.push_back(f.t);
    check_monotonic(ts);
  }

  const auto& calib = cfg.calibration;

  TrackManagerConfig cam_cfg{cfg.track, cfg.assoc_config(false), cfg.use_appearance};
  TrackManagerConfig rad_cfg{cfg.track, cfg.assoc_config(true), false};
  TrackManagerConfig fus_cfg{cfg.track, cfg.assoc_config(true), cfg.use_appearance};

  TrackManager camera_tracker(cam_cfg, make_factory(cfg, false, pixel_params));
  TrackManager radar_tracker(rad_cfg, make_factory(cfg, true, bev_params));
  TrackManager fused_tracker(fus_cfg, make_factory(cfg, true, bev_params));

  TriTrackerOutput out;
  const double default_dt = 1.0 / cfg.sim_frame_rate;

  auto cam_det_to_bev = [&](const CameraDetection& det) -> std::optional<Vec2> {
    const PixelPoint bottom = bbox_bottom_center(det.bbox);
    try {
      const GroundPoint g =
          pixel_to_ground(bottom, calib.intrinsics, calib.height_m, calib.pitch_rad);
      return Vec2(g.x, g.y);
    } catch (const HorizonOrAbove&) {
      return std::nullopt;
    }
  };

  // Camera tracker: pixel space, appearance-aware.
  double prev_t = 0.0;
  for (std::size_t f = 0; f < camera_log.frames.size(); ++f) {
    const auto& frame = camera_log.frames[f];
    const double dt = f == 0 ? default_dt : std::max(1e-9, frame.t - prev_t);
    prev_t = frame.t;
    std::vector<Detection> dets;
    for (const auto& d : frame.dets) {
      Detection det;
      const PixelPoint bc = bbox_bottom_center(d.bbox);
      det.position = Vec2(bc.u, bc.v);
      det.bbox = d.bbox;
      const double n = d.embedding.norm();
      if (n > 0) det.embedding = d.embedding / n;
      det.source = DetectionSource::camera;
      dets.push_back(std::move(det));
    }
    const auto result = camera_tracker.step(dets, dt);
    for (const auto& e : result.exported) {
      try {
        const GroundPoint g = pixel_to_ground({e.position.x(), e.position.y()},
                                              calib.intrinsics, calib.height_m,
                                              calib.pitch_rad);
        out.camera.push_back({frame.t, e.id, g.x, g.y, "camera"});
      } catch (const HorizonOrAbove&) {
        // a coasted pixel track drifted above the horizon; nothing to export
      }
    }
  }

  // Radar tracker: BEV, position only.
  prev_t = 0.0;
  for (std::size_t f = 0; f < radar_log.frames.size(); ++f) {
    const auto& frame = radar_log.frames[f];
    const double dt = f == 0 ? default_dt : std::max(1e-9, frame.t - prev_t);
    prev_t = frame.t;
    const auto clusters = dbscan(frame.points, cfg.dbscan_eps_m, cfg.dbscan_min_pts);
    std::vector<Detection> dets;
    for (const auto& c : clusters.clusters) dets.push_back(cluster_to_detection(c));
    const auto result = radar_tracker.step(dets, dt);
    for (const auto& e : result.exported) {
      out.radar.push_back({frame.t, e.id, e.position.x(), e.position.y(), "radar"});
    }
  }

  // Fused tracker: aligned frames, decision-level fusion.
  const auto aligned = align_streams(camera_log, radar_log, cfg.fusion_max_skew_s);
  prev_t = 0.0;
  for (std::size_t f = 0; f < aligned.size(); ++f) {
    const auto& frame = aligned[f];
    const double dt = f == 0 ? default_dt : std::max(1e-9, frame.t - prev_t);
    prev_t = frame.t;

    std::vector<Vec2> cam_bev;
    std::vector<const CameraDetection*> cam_src;
    if (frame.cam != nullptr) {
      for (const auto& d : frame.cam->dets) {
        if (auto g = cam_det_to_bev(d)) {
          cam_bev.push_back(*g);
          cam_src.push_back(&d);
        }
      }
    }
    std::vector<Vec2> rad_bev;
    if (frame.rad != nullptr) {
      const auto clusters = dbscan(frame.rad->points, cfg.dbscan_eps_m, cfg.dbscan_min_pts);
      for (const auto& c : clusters.clusters) rad_bev.push_back(c.centroid);
    }

    const auto match = associate_cross_sensor(cam_bev, rad_bev, cfg.fusion_gate_m);
    std::vector<Detection> dets;
    auto add_fused = [&](const FusedDetection& fd) {
      Detection det;
      det.position = fd.position;
      det.embedding = fd.embedding;
      det.source = fd.source;
      dets.push_back(std::move(det));
    };
    auto with_embedding = [&](FusedDetection fd, std::size_t cam_idx) {
      const auto& e = cam_src[cam_idx]->embedding;
      const double n = e.norm();
      if (n > 0) fd.embedding = e / n;
      fd.camera_ref = cam_idx;
      return fd;
    };
    for (const auto& [c, r] : match.pairs) {
      FusedDetection fd = fuse_position(cam_bev[c], rad_bev[r]);
      fd = with_embedding(std::move(fd), c);
      fd.radar_ref = r;
      add_fused(fd);
    }
    for (std::size_t c : match.camera_only) {
      add_fused(with_embedding(fuse_position(cam_bev[c], std::nullopt), c));
    }
    for (std::size_t r : match.radar_only) {
      FusedDetection fd = fuse_position(std::nullopt, rad_bev[r]);
      fd.radar_ref = r;
      add_fused(fd);
    }

    const auto result = fused_tracker.step(dets, dt);
    for (const auto& e : result.exported) {
      out.fused.push_back({frame.t, e.id, e.position.x(), e.position.y(),
                           to_string(e.source)});
    }
  }
  return out;
}

}  // namespace fusetrack
