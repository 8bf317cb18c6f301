#include <doctest.h>

#include <cmath>
#include <map>

#include "fusetrack/pipeline.hpp"
#include "fusetrack/report.hpp"
#include "fusetrack/sim.hpp"

using namespace fusetrack;

namespace {

RunConfig noiseless_config() {
  RunConfig cfg = default_config();
  cfg.noise.camera = {0, 0, 0, 0, 0, 0.5, 0, 0, 0};
  cfg.noise.radar.depth_sigma_m = 0;
  cfg.noise.radar.lateral_sigma_m = 0;
  cfg.noise.radar.merge_distance_m = 0;
  cfg.noise.radar.miss_prob = 0;
  cfg.noise.embedding_sigma = 0;
  cfg.kalman_r_bev = 1e-12;
  cfg.kalman_r_px = 1e-12;
  return cfg;
}

struct Scene {
  GroundTruthLog gt;
  CameraLog cam;
  RadarLog radar;
};

Scene make_scene(const RunConfig& cfg, ScenarioTemplate tmpl, int frames, bool night,
                 std::uint64_t seed) {
  ScenarioSpec spec;
  spec.scenario = tmpl;
  spec.duration = frames;
  spec.frame_rate = cfg.sim_frame_rate;
  spec.night = night;
  spec.seed = seed;
  spec.walk_speed = cfg.sim_walk_speed_mps;
  Scene s;
  s.gt = generate_ground_truth(spec);
  const auto ids = make_identity_embeddings(std::max(1, s.gt.num_objects), 128,
                                            cfg.sim_emb_separation, seed + 101);
  s.cam = sense_camera(s.gt, cfg.noise, cfg.calibration, ids, night, seed + 202);
  s.radar = sense_radar(s.gt, cfg.noise, seed + 303);
  return s;
}

}  // namespace

TEST_CASE("cross-sensor association pairs nearby detections") {
  const std::vector<Vec2> cam{{2.0, 10.0}};
  const std::vector<Vec2> radar{{2.3, 9.5}};
  const auto m = associate_cross_sensor(cam, radar, 1.5);
  REQUIRE(m.pairs.size() == 1);
  CHECK(m.camera_only.empty());
  CHECK(m.radar_only.empty());

  const auto tight = associate_cross_sensor(cam, radar, 0.5);
  CHECK(tight.pairs.empty());
  CHECK(tight.camera_only.size() == 1);
  CHECK(tight.radar_only.size() == 1);
}

TEST_CASE("cross-sensor association with an empty radar set") {
  const std::vector<Vec2> cam{{1.0, 8.0}, {2.0, 9.0}};
  const auto m = associate_cross_sensor(cam, {}, 1.5);
  CHECK(m.pairs.empty());
  CHECK(m.camera_only.size() == 2);
}

TEST_CASE("fused position takes lateral from camera, depth from radar") {
  const auto both = fuse_position(Vec2(2.0, 10.0), Vec2(2.3, 9.5));
  CHECK(both.position.x() == doctest::Approx(2.0));
  CHECK(both.position.y() == doctest::Approx(9.5));
  CHECK(both.source == DetectionSource::both);

  const auto cam_only = fuse_position(Vec2(1.0, 8.0), std::nullopt);
  CHECK(cam_only.position.x() == doctest::Approx(1.0));
  CHECK(cam_only.position.y() == doctest::Approx(8.0));
  CHECK(cam_only.source == DetectionSource::camera_only);

  const auto rad_only = fuse_position(std::nullopt, Vec2(-0.5, 12.0));
  CHECK(rad_only.position.x() == doctest::Approx(-0.5));
  CHECK(rad_only.position.y() == doctest::Approx(12.0));
  CHECK(rad_only.source == DetectionSource::radar_only);

  CHECK_THROWS_AS(fuse_position(std::nullopt, std::nullopt), std::invalid_argument);
}

TEST_CASE("tri tracker rejects missing calibration and disordered time") {
  RunConfig cfg = noiseless_config();
  const Scene s = make_scene(cfg, ScenarioTemplate::radial_single, 20, false, 1);

  RunConfig broken = cfg;
  broken.calibration.intrinsics.fx = 0.0;
  CHECK_THROWS_AS(run_tri_tracker(s.cam, s.radar, broken), CalibrationMissing);

  CameraLog disordered = s.cam;
  std::swap(disordered.frames[3].t, disordered.frames[10].t);
  CHECK_THROWS_AS(run_tri_tracker(disordered, s.radar, cfg), NonMonotonicTimestamps);
}

TEST_CASE("with radar silent the fused tracker mirrors the camera tracker") {
  RunConfig cfg = noiseless_config();
  const Scene s = make_scene(cfg, ScenarioTemplate::crossing_trio, 120, false, 3);
  RadarLog empty;
  const auto out = run_tri_tracker(s.cam, empty, cfg);
  CHECK(out.radar.empty());
  CHECK(!out.fused.empty());

  // group by timestamp and compare position multisets
  std::map<double, std::vector<Vec2>> cam_by_t, fused_by_t;
  for (const auto& r : out.camera) cam_by_t[r.t].emplace_back(r.x, r.y);
  for (const auto& r : out.fused) {
    fused_by_t[r.t].emplace_back(r.x, r.y);
    CHECK(r.source == "camera_only");
  }
  REQUIRE(cam_by_t.size() == fused_by_t.size());
  for (const auto& [t, cam_pts] : cam_by_t) {
    const auto& fused_pts = fused_by_t.at(t);
    REQUIRE(cam_pts.size() == fused_pts.size());
    for (const auto& c : cam_pts) {
      double best = 1e9;
      for (const auto& f : fused_pts) best = std::min(best, (c - f).norm());
      CHECK(best < 1e-3);  // the two trackers filter in different spaces
    }
  }
}

TEST_CASE("with the camera dark the fused tracker mirrors the radar tracker") {
  RunConfig cfg = noiseless_config();
  const Scene s = make_scene(cfg, ScenarioTemplate::free_pair, 120, false, 4);
  CameraLog empty;
  const auto out = run_tri_tracker(empty, s.radar, cfg);
  CHECK(out.camera.empty());
  CHECK(!out.fused.empty());
  std::map<double, std::vector<Vec2>> rad_by_t, fused_by_t;
  for (const auto& r : out.radar) rad_by_t[r.t].emplace_back(r.x, r.y);
  for (const auto& r : out.fused) {
    fused_by_t[r.t].emplace_back(r.x, r.y);
    CHECK(r.source == "radar_only");
  }
  REQUIRE(rad_by_t.size() == fused_by_t.size());
  for (const auto& [t, rad_pts] : rad_by_t) {
    const auto& fused_pts = fused_by_t.at(t);
    REQUIRE(rad_pts.size() == fused_pts.size());
    for (const auto& c : rad_pts) {
      double best = 1e9;
      for (const auto& f : fused_pts) best = std::min(best, (c - f).norm());
      CHECK(best < 1e-3);
    }
  }
}

TEST_CASE("camera tracker output does not depend on the radar stream") {
  RunConfig cfg = noiseless_config();
  const Scene s = make_scene(cfg, ScenarioTemplate::crossing_trio, 100, false, 6);
  RadarLog other = s.radar;
  for (auto& f : other.frames) f.points.clear();

  const auto a = run_tri_tracker(s.cam, s.radar, cfg);
  const auto b = run_tri_tracker(s.cam, other, cfg);
  REQUIRE(a.camera.size() == b.camera.size());
  for (std::size_t i = 0; i < a.camera.size(); ++i) {
    CHECK(a.camera[i].id == b.camera[i].id);
    CHECK(a.camera[i].x == b.camera[i].x);
    CHECK(a.camera[i].y == b.camera[i].y);
  }
}

TEST_CASE("noiseless tri tracking is pixel perfect on all templates") {
  RunConfig cfg = noiseless_config();
  for (const auto tmpl : {ScenarioTemplate::radial_single, ScenarioTemplate::free_pair,
                          ScenarioTemplate::crossing_trio}) {
    const Scene s = make_scene(cfg, tmpl, 150, false, 8);
    const auto out = run_tri_tracker(s.cam, s.radar, cfg);
    for (const auto* records : {&out.camera, &out.radar, &out.fused}) {
      const auto report = evaluate_records(*records, s.gt, cfg.metrics_gate_m);
      CHECK(report.mota == doctest::Approx(100.0));
      CHECK(report.motp < 1e-6);
    }
  }
}

TEST_CASE("fused records carry the both-sensor source when both bless a detection") {
  RunConfig cfg = noiseless_config();
  const Scene s = make_scene(cfg, ScenarioTemplate::radial_single, 60, false, 12);
  const auto out = run_tri_tracker(s.cam, s.radar, cfg);
  REQUIRE(!out.fused.empty());
  for (const auto& r : out.fused) CHECK(r.source == "both");
}

TEST_CASE("trajectory plot artifacts follow their inputs") {
  RunConfig cfg = noiseless_config();
  const Scene s = make_scene(cfg, ScenarioTemplate::free_pair, 80, false, 2);
  const auto out = run_tri_tracker(s.cam, s.radar, cfg);

  TrajectoryPlotData data{out.camera, out.radar, out.fused, s.gt};
  const auto art = emit_trajectory_plot(data, cfg.metrics_gate_m);
  CHECK(art.svg.find("<svg") != std::string::npos);
  CHECK(art.svg.find("polyline") != std::string::npos);
  CHECK(art.points_csv.find("tracker,id,t,x,y") == 0);

  // noiseless run: every plotted tracker point lies on the ground truth
  std::map<double, std::vector<Vec2>> gt_by_t;
  for (const auto& f : s.gt.frames)
    for (const auto& o : f.objects) gt_by_t[f.t].emplace_back(o.x, o.y);
  double worst = 0.0;
  for (const auto* records : {&out.camera, &out.radar, &out.fused}) {
    for (const auto& r : *records) {
      double best = 1e9;
      for (const auto& g : gt_by_t.at(r.t)) best = std::min(best, (g - Vec2(r.x, r.y)).norm());
      worst = std::max(worst, best);
    }
  }
  CHECK(worst < 1e-6);

  // an empty tracks file still produces a panel with the GT overlay
  TrajectoryPlotData only_gt{{}, {}, {}, s.gt};
  const auto art2 = emit_trajectory_plot(only_gt, cfg.metrics_gate_m);
  CHECK(art2.svg.find("stroke-dasharray") != std::string::npos);
  CHECK(art2.gaps_csv.find("camera,160") != std::string::npos);  // 2 objects x 80 frames
}

TEST_CASE("coverage gaps shrink with fusion when the camera stutters") {
  RunConfig cfg = noiseless_config();
  cfg.noise.camera.miss_base = 0.25;  // camera misses a quarter of its frames
  const Scene s = make_scene(cfg, ScenarioTemplate::free_pair, 400, false, 21);
  const auto out = run_tri_tracker(s.cam, s.radar, cfg);
  const auto cam_gaps = coverage_gap_count(out.camera, s.gt, 1.0);
  const auto fused_gaps = coverage_gap_count(out.fused, s.gt, 1.0);
  CHECK(fused_gaps < cam_gaps);
}
