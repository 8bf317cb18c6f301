#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "fusetrack/config.hpp"
#include "fusetrack/logs.hpp"
#include "fusetrack/sim.hpp"

using namespace fusetrack;

namespace {

const char* kMinimal =
    "calibration.fx = 500\n"
    "calibration.fy = 500\n"
    "calibration.u0 = 320\n"
    "calibration.v0 = 240\n"
    "calibration.height_m = 1.635\n"
    "calibration.pitch_deg = 3.2\n";

}  // namespace

TEST_CASE("minimal config gets all documented defaults") {
  const RunConfig cfg = parse_config(kMinimal, "test");
  CHECK(cfg.calibration.intrinsics.fx == doctest::Approx(500.0));
  CHECK(cfg.calibration.pitch_rad == doctest::Approx(3.2 * M_PI / 180.0));
  CHECK(cfg.dbscan_eps_m == doctest::Approx(0.5));
  CHECK(cfg.dbscan_min_pts == 3);
  CHECK(cfg.assoc_w == doctest::Approx(0.8));
  CHECK(cfg.track.max_invisible == 20);
  CHECK(cfg.track.min_visibility_pct == doctest::Approx(60.0));
  CHECK(cfg.track.reliable_after == 5);
  CHECK(cfg.motion_model == "kalman");
  CHECK(cfg.use_appearance == true);
  CHECK(cfg.metrics_motp_denominator == "gt");
}

TEST_CASE("comments and blank lines are tolerated") {
  std::string text = std::string("# a run\n\n") + kMinimal + "assoc.w = 0.7  # weight\n";
  const RunConfig cfg = parse_config(text, "test");
  CHECK(cfg.assoc_w == doctest::Approx(0.7));
}

TEST_CASE("out-of-range weight names the offending key") {
  const std::string text = std::string(kMinimal) + "assoc.w = 1.5\n";
  try {
    parse_config(text, "test");
    FAIL("expected TypeMismatch");
  } catch (const TypeMismatch& e) {
    CHECK(e.key == "assoc.w");
  }
}

TEST_CASE("non-numeric value names the offending key") {
  const std::string text = std::string(kMinimal) + "dbscan.eps_m = wide\n";
  try {
    parse_config(text, "test");
    FAIL("expected TypeMismatch");
  } catch (const TypeMismatch& e) {
    CHECK(e.key == "dbscan.eps_m");
  }
}

TEST_CASE("unknown key suggests the nearest real one") {
  const std::string text = std::string(kMinimal) + "asoc.w = 0.8\n";
  try {
    parse_config(text, "test");
    FAIL("expected UnknownKey");
  } catch (const UnknownKey& e) {
    CHECK(e.key == "asoc.w");
    CHECK(e.suggestion == "assoc.w");
  }
}

TEST_CASE("missing calibration is reported by key") {
  try {
    parse_config("calibration.fx = 500\n", "test");
    FAIL("expected MissingKey");
  } catch (const MissingKey& e) {
    CHECK(e.key.substr(0, 12) == "calibration.");
  }
}

TEST_CASE("thresholds must be ordered") {
  const std::string text =
      std::string(kMinimal) + "assoc.thr_low = 1.5\nassoc.thr_high = 1.0\n";
  CHECK_THROWS_AS(parse_config(text, "test"), TypeMismatch);
}

TEST_CASE("bad motion model is rejected") {
  const std::string text = std::string(kMinimal) + "motion.model = gru\n";
  CHECK_THROWS_AS(parse_config(text, "test"), TypeMismatch);
}

TEST_CASE("referenced parameter files must exist") {
  const std::string text =
      std::string(kMinimal) + "motion.params_bev = /nonexistent/params.json\n";
  CHECK_THROWS_AS(parse_config(text, "test"), TypeMismatch);
}

TEST_CASE("resolved dump is reparseable and stable") {
  const RunConfig cfg = parse_config(kMinimal, "test");
  const std::string dump = dump_resolved(cfg);
  const RunConfig back = parse_config(dump, "dump");
  CHECK(dump_resolved(back) == dump);
}

TEST_CASE("jsonl logs round trip") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "fusetrack_test_logs";
  fs::create_directories(dir);

  ScenarioSpec spec;
  spec.scenario = ScenarioTemplate::free_pair;
  spec.duration = 25;
  const auto gt = generate_ground_truth(spec);
  const auto ids = make_identity_embeddings(2, 128, 1.2, 3);
  SensorNoiseModel noise;
  Calibration calib;
  calib.intrinsics = {500, 500, 320, 240, 0};
  calib.height_m = 1.635;
  calib.pitch_rad = 0.05;
  const auto cam = sense_camera(gt, noise, calib, ids, false, 5);
  const auto radar = sense_radar(gt, noise, 6);

  write_ground_truth_log(gt, (dir / "gt.jsonl").string());
  write_camera_log(cam, (dir / "cam.jsonl").string());
  write_radar_log(radar, (dir / "radar.jsonl").string());

  const auto gt2 = read_ground_truth_log((dir / "gt.jsonl").string());
  REQUIRE(gt2.frames.size() == gt.frames.size());
  CHECK(gt2.num_objects == gt.num_objects);
  for (std::size_t f = 0; f < gt.frames.size(); ++f) {
    CHECK(gt2.frames[f].t == gt.frames[f].t);
    REQUIRE(gt2.frames[f].objects.size() == gt.frames[f].objects.size());
    for (std::size_t o = 0; o < gt.frames[f].objects.size(); ++o) {
      CHECK(gt2.frames[f].objects[o].x == gt.frames[f].objects[o].x);
      CHECK(gt2.frames[f].objects[o].y == gt.frames[f].objects[o].y);
    }
  }

  const auto cam2 = read_camera_log((dir / "cam.jsonl").string());
  REQUIRE(cam2.frames.size() == cam.frames.size());
  for (std::size_t f = 0; f < cam.frames.size(); ++f) {
    REQUIRE(cam2.frames[f].dets.size() == cam.frames[f].dets.size());
    for (std::size_t d = 0; d < cam.frames[f].dets.size(); ++d) {
      CHECK(cam2.frames[f].dets[d].bbox.x_min == cam.frames[f].dets[d].bbox.x_min);
      CHECK((cam2.frames[f].dets[d].embedding - cam.frames[f].dets[d].embedding)
                .cwiseAbs()
                .maxCoeff() == 0.0);
    }
  }

  const auto radar2 = read_radar_log((dir / "radar.jsonl").string());
  REQUIRE(radar2.frames.size() == radar.frames.size());
  for (std::size_t f = 0; f < radar.frames.size(); ++f) {
    REQUIRE(radar2.frames[f].points.size() == radar.frames[f].points.size());
  }

  const std::vector<TrackRecord> records{{0.0, 1, 1.5, 9.25, "both"},
                                         {0.1, 1, 1.6, 9.5, "camera_only"}};
  write_track_records(records, (dir / "tracks.jsonl").string());
  const auto records2 = read_track_records((dir / "tracks.jsonl").string());
  REQUIRE(records2.size() == 2);
  CHECK(records2[1].source == "camera_only");
  CHECK(records2[1].x == 1.6);

  fs::remove_all(dir);
}

TEST_CASE("parse errors carry the line number") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "fusetrack_test_bad";
  fs::create_directories(dir);
  const auto path = (dir / "bad.jsonl").string();
  write_text_file(path, "{\"t\": 0.0, \"objects\": []}\nnot json at all\n");
  try {
    read_ground_truth_log(path);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line_number == 2);
  }
  fs::remove_all(dir);
}

TEST_CASE("identity means round trip through the embeddings file") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "fusetrack_test_means";
  fs::create_directories(dir);
  const auto means = make_identity_embeddings(3, 16, 1.0, 4);
  write_identity_means(means, 4, 0.015, (dir / "embeddings.json").string());
  const auto back = read_identity_means((dir / "embeddings.json").string());
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK((back[i] - means[i]).cwiseAbs().maxCoeff() == 0.0);
  }
  fs::remove_all(dir);
}
