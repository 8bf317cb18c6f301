#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "fusetrack/dbscan.hpp"
#include "fusetrack/logs.hpp"
#include "fusetrack/sim.hpp"

using namespace fusetrack;

namespace {

Calibration test_calibration() {
  Calibration c;
  c.intrinsics = {500.0, 500.0, 320.0, 240.0, 0.0};
  c.height_m = 1.635;
  c.pitch_rad = 3.2 * M_PI / 180.0;
  return c;
}

SensorNoiseModel zero_noise() {
  SensorNoiseModel n;
  n.camera = {0, 0, 0, 0, 0, 0.5, 0, 0, 0};
  n.radar.depth_sigma_m = 0;
  n.radar.lateral_sigma_m = 0;
  n.radar.merge_distance_m = 0;
  n.radar.miss_prob = 0;
  n.embedding_sigma = 0;
  return n;
}

std::string gt_to_string(const GroundTruthLog& log) {
  std::ostringstream ss;
  for (const auto& f : log.frames) {
    ss.precision(17);
    ss << f.t;
    for (const auto& o : f.objects) ss << "|" << o.id << ":" << o.x << "," << o.y;
    ss << "\n";
  }
  return ss.str();
}

}  // namespace

TEST_CASE("radial_single walks back and forth in depth") {
  ScenarioSpec spec;
  spec.scenario = ScenarioTemplate::radial_single;
  spec.duration = 400;
  const auto log = generate_ground_truth(spec);
  REQUIRE(log.num_objects == 1);
  REQUIRE(log.frames.size() == 400);

  double min_y = 1e9, max_y = -1e9;
  double min_x = 1e9, max_x = -1e9;
  int direction_changes = 0;
  double prev_y = log.frames[0].objects[0].y, prev_dy = 0.0;
  for (const auto& f : log.frames) {
    REQUIRE(f.objects.size() == 1);
    const auto& o = f.objects[0];
    min_y = std::min(min_y, o.y);
    max_y = std::max(max_y, o.y);
    min_x = std::min(min_x, o.x);
    max_x = std::max(max_x, o.x);
    const double dy = o.y - prev_y;
    if (dy * prev_dy < -1e-12) ++direction_changes;
    if (std::abs(dy) > 1e-12) prev_dy = dy;
    prev_y = o.y;
  }
  CHECK(max_y - min_y > 5.0);         // oscillates in depth
  CHECK(max_x - min_x < 1e-9);        // constant laterally
  CHECK(direction_changes >= 2);
}

TEST_CASE("crossing_trio has three walkers with repeated crossings, no collisions") {
  ScenarioSpec spec;
  spec.scenario = ScenarioTemplate::crossing_trio;
  spec.duration = 600;
  const auto log = generate_ground_truth(spec);
  REQUIRE(log.num_objects == 3);

  int order_swaps = 0;
  double prev_diff = 0.0;
  double min_separation = 1e9;
  for (const auto& f : log.frames) {
    REQUIRE(f.objects.size() == 3);
    const double diff = f.objects[0].x - f.objects[1].x;
    if (diff * prev_diff < 0) ++order_swaps;
    prev_diff = diff;
    for (int a = 0; a < 3; ++a) {
      for (int b = a + 1; b < 3; ++b) {
        const double d = std::hypot(f.objects[a].x - f.objects[b].x,
                                    f.objects[a].y - f.objects[b].y);
        min_separation = std::min(min_separation, d);
      }
    }
  }
  CHECK(order_swaps >= 2);        // the diagonals actually cross
  CHECK(min_separation > 0.55);   // nobody walks through anybody (dbscan eps is 0.5)
  CHECK(min_separation < 3.0);    // and they do get close
}

TEST_CASE("ground truth is deterministic per seed") {
  ScenarioSpec spec;
  spec.scenario = ScenarioTemplate::free_pair;
  spec.duration = 200;
  spec.seed = 9;
  CHECK(gt_to_string(generate_ground_truth(spec)) ==
        gt_to_string(generate_ground_truth(spec)));
  spec.seed = 10;
  CHECK(gt_to_string(generate_ground_truth(spec)) !=
        gt_to_string(generate_ground_truth({ScenarioTemplate::free_pair, 200, 10.0, false, 9})));
}

TEST_CASE("identity means respect the separation") {
  const auto means = make_identity_embeddings(12, 128, 1.2, 3);
  REQUIRE(means.size() == 12);
  for (const auto& m : means) CHECK(m.norm() == doctest::Approx(1.0).epsilon(1e-9));
  for (std::size_t i = 0; i < means.size(); ++i) {
    for (std::size_t j = i + 1; j < means.size(); ++j) {
      CHECK((means[i] - means[j]).norm() >= 1.2);
    }
  }
}

TEST_CASE("a single identity is trivially separated") {
  const auto means = make_identity_embeddings(1, 128, 1.9, 1);
  CHECK(means.size() == 1);
}

TEST_CASE("near-antipodal separation is reachable for two identities") {
  const auto means = make_identity_embeddings(2, 128, 1.9, 5);
  REQUIRE(means.size() == 2);
  CHECK((means[0] - means[1]).norm() >= 1.9);
}

TEST_CASE("separation beyond the sphere diameter is infeasible") {
  CHECK_THROWS_AS(make_identity_embeddings(2, 128, 2.05, 1), SeparationInfeasible);
}

TEST_CASE("noiseless camera detections project back onto the ground truth") {
  ScenarioSpec spec;
  spec.scenario = ScenarioTemplate::crossing_trio;
  spec.duration = 80;
  const auto gt = generate_ground_truth(spec);
  const auto ids = make_identity_embeddings(3, 128, 1.2, 2);
  const auto calib = test_calibration();
  const auto cam = sense_camera(gt, zero_noise(), calib, ids, false, 11);
  REQUIRE(cam.frames.size() == gt.frames.size());
  for (std::size_t f = 0; f < cam.frames.size(); ++f) {
    REQUIRE(cam.frames[f].dets.size() == 3);
    for (const auto& det : cam.frames[f].dets) {
      const PixelPoint bc = bbox_bottom_center(det.bbox);
      const GroundPoint g =
          pixel_to_ground(bc, calib.intrinsics, calib.height_m, calib.pitch_rad);
      double best = 1e9;
      for (const auto& o : gt.frames[f].objects) {
        best = std::min(best, std::hypot(g.x - o.x, g.y - o.y));
      }
      CHECK(best < 1e-6);
    }
  }
}

TEST_CASE("noiseless radar scatter collapses to the object positions") {
  ScenarioSpec spec;
  spec.scenario = ScenarioTemplate::radial_single;
  spec.duration = 40;
  const auto gt = generate_ground_truth(spec);
  const auto radar = sense_radar(gt, zero_noise(), 7);
  for (std::size_t f = 0; f < radar.frames.size(); ++f) {
    const auto clusters = dbscan(radar.frames[f].points, 0.5, 3);
    REQUIRE(clusters.clusters.size() == 1);
    CHECK(clusters.clusters[0].centroid.x() ==
          doctest::Approx(gt.frames[f].objects[0].x).epsilon(1e-9));
    CHECK(clusters.clusters[0].centroid.y() ==
          doctest::Approx(gt.frames[f].objects[0].y).epsilon(1e-9));
  }
}

TEST_CASE("close objects merge into a single radar cluster") {
  GroundTruthLog gt;
  GroundTruthFrame f;
  f.t = 0;
  f.objects = {{0, 0.0, 8.0}, {1, 0.2, 8.0}};
  gt.frames.push_back(f);
  gt.num_objects = 2;
  SensorNoiseModel noise = zero_noise();
  noise.radar.merge_distance_m = 0.5;
  const auto radar = sense_radar(gt, noise, 3);
  const auto clusters = dbscan(radar.frames[0].points, 0.5, 3);
  REQUIRE(clusters.clusters.size() == 1);
  CHECK(clusters.clusters[0].centroid.x() == doctest::Approx(0.1));
  CHECK(clusters.clusters[0].centroid.y() == doctest::Approx(8.0));
}

TEST_CASE("an occluded object misses at the configured boosted rate") {
  GroundTruthLog gt;
  for (int f = 0; f < 2000; ++f) {
    GroundTruthFrame frame;
    frame.t = 0.1 * f;
    frame.objects = {{0, 0.0, 6.0}, {1, 0.0, 10.0}};  // aligned in azimuth
    gt.frames.push_back(frame);
  }
  gt.num_objects = 2;
  SensorNoiseModel noise = zero_noise();
  noise.camera.occlusion_miss = 0.5;
  const auto ids = make_identity_embeddings(2, 128, 1.2, 2);
  const auto cam = sense_camera(gt, noise, test_calibration(), ids, false, 99);

  int far_missing = 0;
  for (std::size_t f = 0; f < cam.frames.size(); ++f) {
    // the far object's box is smaller and higher; count frames with < 2 boxes
    if (cam.frames[f].dets.size() < 2) ++far_missing;
  }
  const double rate = static_cast<double>(far_missing) / gt.frames.size();
  CHECK(rate > 0.45);
  CHECK(rate < 0.55);
}

TEST_CASE("night produces strictly more spurious boxes than day") {
  ScenarioSpec spec;
  spec.scenario = ScenarioTemplate::free_pair;
  spec.duration = 600;
  const auto gt = generate_ground_truth(spec);
  const auto ids = make_identity_embeddings(2, 128, 1.2, 2);
  SensorNoiseModel noise = zero_noise();
  noise.camera.fp_rate_day = 0.01;
  noise.camera.fp_rate_night = 0.10;
  const auto day = sense_camera(gt, noise, test_calibration(), ids, false, 31);
  const auto night = sense_camera(gt, noise, test_calibration(), ids, true, 31);
  long day_boxes = 0, night_boxes = 0;
  for (const auto& f : day.frames) day_boxes += f.dets.size();
  for (const auto& f : night.frames) night_boxes += f.dets.size();
  CHECK(night_boxes > day_boxes);
}

TEST_CASE("radar centroid error anisotropy matches the configured ratio") {
  GroundTruthLog gt;
  for (int f = 0; f < 1000; ++f) {
    GroundTruthFrame frame;
    frame.t = 0.1 * f;
    frame.objects = {{0, 0.0, 10.0}};
    gt.frames.push_back(frame);
  }
  gt.num_objects = 1;
  SensorNoiseModel noise = zero_noise();
  noise.radar.lateral_sigma_m = 0.4;
  noise.radar.depth_sigma_m = 0.1;
  const auto radar = sense_radar(gt, noise, 5);

  double sx = 0, sy = 0;
  long n = 0;
  for (const auto& f : radar.frames) {
    const auto clusters = dbscan(f.points, 2.0, 3);
    if (clusters.clusters.size() != 1) continue;
    const Vec2 err = clusters.clusters[0].centroid - Vec2(0.0, 10.0);
    sx += err.x() * err.x();
    sy += err.y() * err.y();
    ++n;
  }
  const double ratio = std::sqrt(sx / n) / std::sqrt(sy / n);
  CHECK(ratio > 0.8 * 4.0);
  CHECK(ratio < 1.2 * 4.0);
}

TEST_CASE("camera depth error dominates lateral error under defaults") {
  ScenarioSpec spec;
  spec.scenario = ScenarioTemplate::radial_single;
  spec.duration = 1500;
  const auto gt = generate_ground_truth(spec);
  const auto ids = make_identity_embeddings(1, 128, 1.2, 2);
  SensorNoiseModel noise;  // defaults
  noise.camera.miss_base = 0.0;
  const auto calib = test_calibration();
  const auto cam = sense_camera(gt, noise, calib, ids, false, 17);

  double sx = 0, sy = 0;
  long n = 0;
  for (std::size_t f = 0; f < cam.frames.size(); ++f) {
    for (const auto& det : cam.frames[f].dets) {
      const PixelPoint bc = bbox_bottom_center(det.bbox);
      GroundPoint g;
      try {
        g = pixel_to_ground(bc, calib.intrinsics, calib.height_m, calib.pitch_rad);
      } catch (const HorizonOrAbove&) {
        continue;
      }
      const auto& o = gt.frames[f].objects[0];
      sx += (g.x - o.x) * (g.x - o.x);
      sy += (g.y - o.y) * (g.y - o.y);
      ++n;
    }
  }
  CHECK(n > 1000);
  CHECK(std::sqrt(sy / n) > std::sqrt(sx / n));
}

TEST_CASE("camera embeddings stay close to their identity mean") {
  ScenarioSpec spec;
  spec.scenario = ScenarioTemplate::free_pair;
  spec.duration = 100;
  const auto gt = generate_ground_truth(spec);
  const auto ids = make_identity_embeddings(2, 128, 1.2, 2);
  SensorNoiseModel noise = zero_noise();
  noise.embedding_sigma = 0.015;
  const auto cam = sense_camera(gt, noise, test_calibration(), ids, false, 23);
  for (const auto& f : cam.frames) {
    for (const auto& det : f.dets) {
      CHECK(det.embedding.norm() == doctest::Approx(1.0).epsilon(1e-9));
      double best = 1e9;
      for (const auto& m : ids) best = std::min(best, (det.embedding - m).norm());
      CHECK(best < 0.3);
    }
  }
}
