#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <random>

#include "fusetrack/config.hpp"
#include "fusetrack/embedder.hpp"
#include "fusetrack/logs.hpp"
#include "fusetrack/pipeline.hpp"
#include "fusetrack/report.hpp"

namespace fs = std::filesystem;
using namespace fusetrack;

namespace {

RunConfig load_or_default(const std::string& path) {
  return path.empty() ? default_config() : load_config(path);
}

struct SceneFiles {
  GroundTruthLog gt;
  CameraLog cam;
  RadarLog radar;
};

SceneFiles load_scene(const std::string& dir) {
  SceneFiles s;
  s.gt = read_ground_truth_log((fs::path(dir) / "gt.jsonl").string());
  s.cam = read_camera_log((fs::path(dir) / "cam.jsonl").string());
  s.radar = read_radar_log((fs::path(dir) / "radar.jsonl").string());
  return s;
}

// Synthetic feature dataset for the embedder: well separated identity means
// with per-sample Gaussian noise.
LabeledDataset synthetic_identity_dataset(const RunConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  const int dim = cfg.embedder_feature_dim;
  const int ids = cfg.embedder_identities;
  const double sigma = cfg.embedder_feature_sigma;
  const double min_sep = cfg.embedder_mean_separation_sigmas * sigma;

  std::vector<Eigen::VectorXd> means;
  while (static_cast<int>(means.size()) < ids) {
    Eigen::VectorXd m(dim);
    for (int d = 0; d < dim; ++d) m[d] = g(rng) * min_sep;
    bool ok = true;
    for (const auto& other : means) {
      if ((other - m).norm() < min_sep) {
        ok = false;
        break;
      }
    }
    if (ok) means.push_back(std::move(m));
  }

  LabeledDataset ds;
  ds.features.resize(ids * cfg.embedder_samples_per_identity, dim);
  for (int i = 0; i < ids; ++i) {
    for (int s = 0; s < cfg.embedder_samples_per_identity; ++s) {
      for (int d = 0; d < dim; ++d) {
        ds.features(i * cfg.embedder_samples_per_identity + s, d) =
            means[i][d] + sigma * g(rng);
      }
      ds.labels.push_back(i);
    }
  }
  return ds;
}

std::shared_ptr<const LstmParams> maybe_load_lstm(const std::string& path) {
  if (path.empty()) return nullptr;
  return std::make_shared<const LstmParams>(lstm_from_json(read_text_file(path)));
}

std::vector<std::vector<Vec2>> bev_trajectories(const GroundTruthLog& gt) {
  std::map<int, std::vector<Vec2>> per_id;
  for (const auto& f : gt.frames) {
    for (const auto& o : f.objects) per_id[o.id].emplace_back(o.x, o.y);
  }
  std::vector<std::vector<Vec2>> out;
  for (auto& [id, traj] : per_id) out.push_back(std::move(traj));
  return out;
}

std::vector<std::vector<Vec2>> pixel_trajectories(const GroundTruthLog& gt,
                                                  const Calibration& calib) {
  const ExtrinsicPose pose = ExtrinsicPose::from_height_pitch(calib.height_m, calib.pitch_rad);
  std::map<int, std::vector<Vec2>> per_id;
  for (const auto& f : gt.frames) {
    for (const auto& o : f.objects) {
      try {
        const auto p = project_radar_to_pixel({o.x, o.y, 0.0}, calib.intrinsics, pose);
        per_id[o.id].emplace_back(p.pixel.u, p.pixel.v);
      } catch (const PointBehindCamera&) {
      }
    }
  }
  std::vector<std::vector<Vec2>> out;
  for (auto& [id, traj] : per_id) out.push_back(std::move(traj));
  return out;
}

LstmParams train_motion_model(const RunConfig& cfg, const GroundTruthLog& gt,
                              const std::string& space, std::uint64_t seed) {
  BilstmTrainConfig tc;
  tc.hidden = cfg.motion_hidden;
  tc.window = cfg.motion_window;
  tc.epochs = cfg.motion_epochs;
  tc.learning_rate = cfg.motion_learning_rate;
  tc.peephole = cfg.motion_peephole;
  std::vector<std::vector<Vec2>> trajectories;
  if (space == "pixel") {
    tc.norm_scale = Vec2(cfg.calibration.image_width / 4.0, cfg.calibration.image_height / 4.0);
    tc.norm_offset = Vec2(cfg.calibration.image_width / 2.0, cfg.calibration.image_height / 2.0);
    trajectories = pixel_trajectories(gt, cfg.calibration);
  } else {
    tc.norm_scale = Vec2(cfg.motion_bev_norm_m, cfg.motion_bev_norm_m);
    trajectories = bev_trajectories(gt);
  }
  return train_bilstm(trajectories, tc, seed).params;
}

int cmd_simulate(const RunConfig& cfg, const std::string& tmpl, int frames, bool night,
                 std::uint64_t seed, const std::string& out_dir) {
  fs::create_directories(out_dir);
  ScenarioSpec spec;
  spec.scenario = scenario_from_string(tmpl);
  spec.duration = frames;
  spec.frame_rate = cfg.sim_frame_rate;
  spec.night = night;
  spec.seed = seed;
  spec.walk_speed = cfg.sim_walk_speed_mps;

  const auto gt = generate_ground_truth(spec);
  const auto ids = make_identity_embeddings(std::max(1, gt.num_objects), 128,
                                            cfg.sim_emb_separation, seed + 101);
  const auto cam = sense_camera(gt, cfg.noise, cfg.calibration, ids, night, seed + 202);
  const auto radar = sense_radar(gt, cfg.noise, seed + 303);

  const fs::path dir(out_dir);
  write_ground_truth_log(gt, (dir / "gt.jsonl").string());
  write_camera_log(cam, (dir / "cam.jsonl").string());
  write_radar_log(radar, (dir / "radar.jsonl").string());
  write_identity_means(ids, seed, cfg.noise.embedding_sigma,
                       (dir / "embeddings.json").string());
  write_text_file((dir / "resolved_config.txt").string(),
                  "# seed=" + std::to_string(seed) + "\n" + dump_resolved(cfg));
  std::cout << "wrote " << gt.frames.size() << " frames to " << out_dir << "\n";
  return 0;
}

int cmd_track(const RunConfig& cfg, const std::string& cam_path, const std::string& radar_path,
              const std::string& out_dir, const std::string& params_px,
              const std::string& params_bev) {
  fs::create_directories(out_dir);
  const auto cam = read_camera_log(cam_path);
  const auto radar = read_radar_log(radar_path);
  auto px = maybe_load_lstm(!params_px.empty() ? params_px : cfg.motion_params_px);
  auto bev = maybe_load_lstm(!params_bev.empty() ? params_bev : cfg.motion_params_bev);
  const auto out = run_tri_tracker(cam, radar, cfg, px, bev);
  const fs::path dir(out_dir);
  write_track_records(out.camera, (dir / "camera.jsonl").string());
  write_track_records(out.radar, (dir / "radar.jsonl").string());
  write_track_records(out.fused, (dir / "fused.jsonl").string());
  write_text_file((dir / "resolved_config.txt").string(), dump_resolved(cfg));
  std::cout << "camera records: " << out.camera.size() << "\n"
            << "radar records:  " << out.radar.size() << "\n"
            << "fused records:  " << out.fused.size() << "\n";
  return 0;
}

int cmd_evaluate(const RunConfig& cfg, const std::string& gt_path,
                 const std::string& tracks_path, double gate, const std::string& denom,
                 const std::string& csv_out) {
  const auto gt = read_ground_truth_log(gt_path);
  const auto records = read_track_records(tracks_path);
  const auto d = denom == "matches" ? MotpDenominator::matches : MotpDenominator::gt;
  const auto report = evaluate_records(records, gt, gate > 0 ? gate : cfg.metrics_gate_m, d);
  std::cout << clear_report_to_json(report) << "\n";
  if (!csv_out.empty()) {
    const std::string row =
        clear_report_csv_row(fs::path(tracks_path).stem().string(), report);
    std::string existing;
    if (fs::exists(csv_out)) existing = read_text_file(csv_out);
    if (existing.empty()) {
      existing = "tracker,fpr_pct,fnr_pct,idswr_pct,mota_pct,motp_m\n";
    }
    write_text_file(csv_out, existing + row + "\n");
  }
  return 0;
}

int cmd_train_embedder(const RunConfig& cfg, std::uint64_t seed, const std::string& out_path) {
  const auto ds = synthetic_identity_dataset(cfg, seed);
  EmbedderTrainConfig tc;
  tc.hidden = cfg.embedder_hidden;
  tc.embed_dim = cfg.embedder_embed_dim;
  tc.margin_alpha = cfg.embedder_margin;
  tc.lambda = cfg.embedder_lambda;
  tc.learning_rate = cfg.embedder_learning_rate;
  tc.steps = cfg.embedder_steps;
  tc.batch = cfg.embedder_batch;
  const auto trained = train_embedder(ds, tc, seed);
  write_text_file(out_path, embedder_to_json(trained));
  std::cout << "threshold " << trained.threshold << ", holdout verification accuracy "
            << trained.holdout_accuracy * 100.0 << "%\n";
  return 0;
}

int cmd_train_motion(const RunConfig& cfg, const std::string& space,
                     const std::string& scene_dir, std::uint64_t seed,
                     const std::string& out_path) {
  const auto gt = read_ground_truth_log((fs::path(scene_dir) / "gt.jsonl").string());
  const auto params = train_motion_model(cfg, gt, space, seed);
  write_text_file(out_path, lstm_to_json(params));
  std::cout << "trained " << space << "-space model on " << gt.num_objects
            << " trajectories\n";
  return 0;
}

int cmd_ablate(const RunConfig& cfg, const std::string& scene_dir, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const auto scene = load_scene(scene_dir);

  // Motion models are trained on fresh same-domain scenes with shifted seeds
  // so evaluation never sees its own training frames.
  ScenarioSpec train_spec;
  train_spec.scenario = ScenarioTemplate::crossing_trio;
  train_spec.duration = 400;
  train_spec.frame_rate = cfg.sim_frame_rate;
  train_spec.seed = cfg.seed + 1000;
  train_spec.walk_speed = cfg.sim_walk_speed_mps;
  GroundTruthLog train_gt = generate_ground_truth(train_spec);
  train_spec.scenario = ScenarioTemplate::free_pair;
  const auto extra_gt = generate_ground_truth(train_spec);
  int id_offset = train_gt.num_objects;
  for (std::size_t f = 0; f < train_gt.frames.size() && f < extra_gt.frames.size(); ++f) {
    for (auto obj : extra_gt.frames[f].objects) {
      obj.id += id_offset;
      train_gt.frames[f].objects.push_back(obj);
    }
  }
  train_gt.num_objects += extra_gt.num_objects;
  auto px = std::make_shared<const LstmParams>(
      train_motion_model(cfg, train_gt, "pixel", cfg.seed + 1));
  auto bev = std::make_shared<const LstmParams>(
      train_motion_model(cfg, train_gt, "bev", cfg.seed + 2));

  const auto table =
      run_ablation(scene.cam, scene.radar, scene.gt, cfg, standard_variants(), px, bev);
  const fs::path dir(out_dir);
  write_text_file((dir / "table.csv").string(), table_to_csv(table));
  write_text_file((dir / "table.txt").string(), table_to_text(table));
  write_text_file((dir / "resolved_config.txt").string(), dump_resolved(cfg));
  std::cout << table_to_text(table);
  return 0;
}

int cmd_plot(const RunConfig& cfg, const std::string& gt_path, const std::string& tracks_dir,
             const std::string& out_dir) {
  fs::create_directories(out_dir);
  TrajectoryPlotData data;
  data.gt = read_ground_truth_log(gt_path);
  const fs::path tdir(tracks_dir);
  auto read_if = [&](const char* name) -> std::vector<TrackRecord> {
    const auto p = tdir / name;
    if (!fs::exists(p)) return {};
    return read_track_records(p.string());
  };
  data.camera = read_if("camera.jsonl");
  data.radar = read_if("radar.jsonl");
  data.fused = read_if("fused.jsonl");
  const auto art = emit_trajectory_plot(data, cfg.metrics_gate_m);
  const fs::path dir(out_dir);
  write_text_file((dir / "trajectories.svg").string(), art.svg);
  write_text_file((dir / "trajectories.csv").string(), art.points_csv);
  write_text_file((dir / "gaps.csv").string(), art.gaps_csv);
  std::cout << art.gaps_csv;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"radar-camera fusion multi-object tracking testbed"};
  app.require_subcommand(1);

  std::string config_path, out_dir, tmpl = "crossing_trio", cam_path, radar_path;
  std::string gt_path, tracks_path, tracks_dir, space = "bev", denom, csv_out, out_path;
  std::string params_px, params_bev, scene_dir;
  int frames = 600;
  bool night = false;
  std::uint64_t seed = 1;
  double gate = 0.0;

  auto* sim = app.add_subcommand("simulate", "generate a synthetic scene");
  sim->add_option("--config", config_path);
  sim->add_option("--template", tmpl)
      ->check(CLI::IsMember({"radial_single", "free_pair", "crossing_trio"}));
  sim->add_option("--frames", frames);
  sim->add_flag("--night", night);
  sim->add_option("--seed", seed);
  sim->add_option("--out", out_dir)->required();

  auto* trk = app.add_subcommand("track", "run the tri-output tracker");
  trk->add_option("--config", config_path);
  trk->add_option("--camera", cam_path)->required();
  trk->add_option("--radar", radar_path)->required();
  trk->add_option("--motion-px", params_px);
  trk->add_option("--motion-bev", params_bev);
  trk->add_option("--out", out_dir)->required();

  auto* ev = app.add_subcommand("evaluate", "CLEAR metrics for one tracks file");
  ev->add_option("--config", config_path);
  ev->add_option("--gt", gt_path)->required();
  ev->add_option("--tracks", tracks_path)->required();
  ev->add_option("--gate", gate);
  ev->add_option("--denominator", denom)->check(CLI::IsMember({"gt", "matches"}));
  ev->add_option("--csv", csv_out);

  auto* te = app.add_subcommand("train-embedder", "train the appearance embedder");
  te->add_option("--config", config_path);
  te->add_option("--seed", seed);
  te->add_option("--out", out_path)->required();

  auto* tmn = app.add_subcommand("train-motion", "train a Bi-LSTM motion model");
  tmn->add_option("--config", config_path);
  tmn->add_option("--space", space)->check(CLI::IsMember({"pixel", "bev"}));
  tmn->add_option("--scene", scene_dir)->required();
  tmn->add_option("--seed", seed);
  tmn->add_option("--out", out_path)->required();

  auto* ab = app.add_subcommand("ablate", "run the four-variant comparison");
  ab->add_option("--config", config_path);
  ab->add_option("--scene", scene_dir)->required();
  ab->add_option("--out", out_dir)->required();

  auto* pl = app.add_subcommand("plot", "trajectory panels and coverage gaps");
  pl->add_option("--config", config_path);
  pl->add_option("--gt", gt_path)->required();
  pl->add_option("--tracks-dir", tracks_dir)->required();
  pl->add_option("--out", out_dir)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const RunConfig cfg = load_or_default(config_path);
    if (sim->parsed()) return cmd_simulate(cfg, tmpl, frames, night, seed, out_dir);
    if (trk->parsed()) return cmd_track(cfg, cam_path, radar_path, out_dir, params_px,
                                        params_bev);
    if (ev->parsed()) {
      return cmd_evaluate(cfg, gt_path, tracks_path, gate,
                          denom.empty() ? cfg.metrics_motp_denominator : denom, csv_out);
    }
    if (te->parsed()) return cmd_train_embedder(cfg, seed, out_path);
    if (tmn->parsed()) return cmd_train_motion(cfg, space, scene_dir, seed, out_path);
    if (ab->parsed()) return cmd_ablate(cfg, scene_dir, out_dir);
    if (pl->parsed()) return cmd_plot(cfg, gt_path, tracks_dir, out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
